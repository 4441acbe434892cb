#include "gebc/bytes.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>

namespace gebc {

void ByteWriter::f32_array(std::span<const float> values) {
  buf_.reserve(buf_.size() + 4 * values.size());
  for (float v : values) f32(v);
}

void ByteReader::need(std::size_t n) const {
  if (n > remaining()) {
    throw_error(on_truncation_, "unexpected end of data: need " + std::to_string(n) +
                                    " bytes at offset " + std::to_string(pos_) + ", have " +
                                    std::to_string(remaining()));
  }
}

ByteView ByteReader::bytes(std::size_t n) {
  need(n);
  ByteView out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::string ByteReader::string(std::size_t n) {
  ByteView raw = bytes(n);
  return std::string(raw.begin(), raw.end());
}

std::vector<float> ByteReader::f32_array(std::size_t n) {
  if (n > remaining() / 4) {
    throw_error(on_truncation_, "float array truncated: declared " + std::to_string(n) +
                                    " values, " + std::to_string(remaining() / 4) + " present");
  }
  std::vector<float> out(n);
  for (auto& v : out) v = f32();
  return out;
}

void ByteReader::expect_tag(std::string_view magic, std::string_view what) {
  if (remaining() < magic.size() ||
      std::memcmp(data_.data() + pos_, magic.data(), magic.size()) != 0) {
    throw FormatError("bad magic: not a " + std::string(what));
  }
  pos_ += magic.size();
}

Bytes pack_bits(const std::vector<bool>& bits) {
  Bytes out(packed_size(bits.size()), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return out;
}

std::vector<bool> unpack_bits(ByteView packed, std::size_t nbits) {
  if (packed.size() < packed_size(nbits)) throw IntegrityError("packed bit array truncated");
  std::vector<bool> out(nbits);
  for (std::size_t i = 0; i < nbits; ++i) out[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return out;
}

std::uint64_t fnv1a64(ByteView data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::uint8_t b : data) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw FormatError("read failed: " + path.string());
  return data;
}

void write_file_atomic(const std::filesystem::path& path, ByteView data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open for writing: " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw FormatError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FormatError("cannot rename into " + path.string());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace gebc
