#pragma once

#include <cstdint>
#include <vector>

#include "gebc/bytes.hpp"
#include "gebc/trace.hpp"

namespace gebc {

// Side channel that tells the decoder which signs were predicted.
//
//  - none:        no sign prediction for the layer.
//  - flip_bit:    full-batch mode; one bit saying whether the previous
//                 round's signs are negated.
//  - kernel_maps: mini-batch conv layers; level1 has one bit per kernel
//                 (1 = predicted), level2 has one bit per predicted kernel
//                 (1 = positive dominant sign, 0 = negative).
struct SignBitmap {
  enum class Variant : std::uint8_t { none = 0, flip_bit = 1, kernel_maps = 2 };

  Variant variant = Variant::none;
  bool flip = false;
  std::size_t kernel_count = 0;
  std::vector<bool> level1;
  std::vector<bool> level2;

  static SignBitmap make_none() { return {}; }
  static SignBitmap make_flip(bool flip) { return {Variant::flip_bit, flip, 0, {}, {}}; }

  std::size_t predicted_kernels() const;
  // kernel_count + popcount(level1) for kernel maps, 1 for a flip bit.
  std::size_t payload_bits() const;

  bool operator==(const SignBitmap&) const = default;
};

const char* to_string(SignBitmap::Variant v);

// Wire layout: u8 variant; flip_bit adds one byte (0/1); kernel_maps adds
// u32 kernel_count, level1 packed LSB-first, level2 packed LSB-first, each
// padded to a byte boundary.
void write_bitmap(ByteWriter& out, const SignBitmap& bitmap);
SignBitmap read_bitmap(ByteReader& in);
std::size_t serialized_size(const SignBitmap& bitmap);

// Integrity check of a decoded bitmap against the layer it describes.
void check_consistent(const SignBitmap& bitmap, const LayerSpec& spec);

}  // namespace gebc
