#include "gebc/bitmap.hpp"

#include <algorithm>

namespace gebc {

std::size_t SignBitmap::predicted_kernels() const {
  return static_cast<std::size_t>(std::count(level1.begin(), level1.end(), true));
}

std::size_t SignBitmap::payload_bits() const {
  switch (variant) {
    case Variant::none: return 0;
    case Variant::flip_bit: return 1;
    case Variant::kernel_maps: return kernel_count + predicted_kernels();
  }
  return 0;
}

const char* to_string(SignBitmap::Variant v) {
  switch (v) {
    case SignBitmap::Variant::none: return "none";
    case SignBitmap::Variant::flip_bit: return "flip_bit";
    case SignBitmap::Variant::kernel_maps: return "kernel_maps";
  }
  return "?";
}

void write_bitmap(ByteWriter& out, const SignBitmap& bitmap) {
  out.u8(static_cast<std::uint8_t>(bitmap.variant));
  switch (bitmap.variant) {
    case SignBitmap::Variant::none: break;
    case SignBitmap::Variant::flip_bit: out.u8(bitmap.flip ? 1 : 0); break;
    case SignBitmap::Variant::kernel_maps:
      out.u32(static_cast<std::uint32_t>(bitmap.kernel_count));
      out.bytes(pack_bits(bitmap.level1));
      out.bytes(pack_bits(bitmap.level2));
      break;
  }
}

SignBitmap read_bitmap(ByteReader& in) {
  SignBitmap b;
  const std::uint8_t tag = in.u8();
  switch (tag) {
    case 0: break;
    case 1: {
      b.variant = SignBitmap::Variant::flip_bit;
      const std::uint8_t flip = in.u8();
      if (flip > 1) throw IntegrityError("flip bit must be 0 or 1");
      b.flip = flip == 1;
      break;
    }
    case 2: {
      b.variant = SignBitmap::Variant::kernel_maps;
      b.kernel_count = in.u32();
      if (packed_size(b.kernel_count) > in.remaining()) throw IntegrityError("bitmap level 1 truncated");
      b.level1 = unpack_bits(in.bytes(packed_size(b.kernel_count)), b.kernel_count);
      const std::size_t predicted = b.predicted_kernels();
      if (packed_size(predicted) > in.remaining()) throw IntegrityError("bitmap level 2 truncated");
      b.level2 = unpack_bits(in.bytes(packed_size(predicted)), predicted);
      break;
    }
    default: throw IntegrityError("unknown bitmap variant " + std::to_string(tag));
  }
  return b;
}

std::size_t serialized_size(const SignBitmap& bitmap) {
  switch (bitmap.variant) {
    case SignBitmap::Variant::none: return 1;
    case SignBitmap::Variant::flip_bit: return 2;
    case SignBitmap::Variant::kernel_maps:
      return 1 + 4 + packed_size(bitmap.kernel_count) + packed_size(bitmap.predicted_kernels());
  }
  return 1;
}

void check_consistent(const SignBitmap& bitmap, const LayerSpec& spec) {
  if (bitmap.variant != SignBitmap::Variant::kernel_maps) return;
  if (spec.kind() != LayerKind::conv4d) {
    throw IntegrityError("kernel bitmap sent for non-convolutional layer '" + spec.name + "'");
  }
  if (bitmap.kernel_count != spec.kernel_count() || bitmap.level1.size() != bitmap.kernel_count) {
    throw IntegrityError("bitmap kernel count does not match layer '" + spec.name + "'");
  }
  if (bitmap.level2.size() != bitmap.predicted_kernels()) {
    throw IntegrityError("bitmap level 2 length differs from predicted kernel count");
  }
}

}  // namespace gebc
