#pragma once

// Little-endian byte and bit streams used by every on-disk and on-wire
// format in the library.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gebc/errors.hpp"

namespace gebc {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes initial) : buf_(std::move(initial)) {}

  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { put_le(v); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void i32(std::int32_t v) { put_le(static_cast<std::uint32_t>(v)); }
  void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
  void bytes(ByteView v) { buf_.insert(buf_.end(), v.begin(), v.end()); }
  void tag(std::string_view magic) { buf_.insert(buf_.end(), magic.begin(), magic.end()); }
  void f32_array(std::span<const float> values);

  std::size_t size() const { return buf_.size(); }
  const Bytes& view() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  template <typename U>
  void put_le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  Bytes buf_;
};

// Bounds-checked reader. Running past the end throws an error of the kind
// chosen at construction so each format can classify truncation itself.
class ByteReader {
 public:
  explicit ByteReader(ByteView data, ErrorKind on_truncation = ErrorKind::integrity)
      : data_(data), on_truncation_(on_truncation) {}

  std::uint8_t u8() { return get_le<std::uint8_t>(); }
  std::uint16_t u16() { return get_le<std::uint16_t>(); }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(get_le<std::uint32_t>()); }
  float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
  ByteView bytes(std::size_t n);
  std::string string(std::size_t n);
  std::vector<float> f32_array(std::size_t n);

  // Throws unless the next bytes equal `magic`; mismatch is a format error.
  void expect_tag(std::string_view magic, std::string_view what);

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }
  void set_truncation_kind(ErrorKind kind) { on_truncation_ = kind; }

 private:
  void need(std::size_t n) const;

  template <typename U>
  U get_le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(data_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return v;
  }

  ByteView data_;
  std::size_t pos_ = 0;
  ErrorKind on_truncation_;
};

// Bits are packed LSB-first within each byte.
class BitWriter {
 public:
  void bit(bool b) {
    if (nbits_ % 8 == 0) buf_.push_back(0);
    if (b) buf_.back() |= static_cast<std::uint8_t>(1u << (nbits_ % 8));
    ++nbits_;
  }
  // Writes the low `len` bits of `code`, most significant first.
  void code(std::uint64_t code, unsigned len) {
    for (unsigned i = len; i-- > 0;) bit((code >> i) & 1u);
  }

  std::uint64_t bit_count() const { return nbits_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
  std::uint64_t nbits_ = 0;
};

class BitReader {
 public:
  BitReader(ByteView data, std::uint64_t nbits) : data_(data), nbits_(nbits) {}

  bool bit() {
    if (pos_ >= nbits_) throw IntegrityError("bitstream truncated");
    const bool b = (data_[pos_ / 8] >> (pos_ % 8)) & 1u;
    ++pos_;
    return b;
  }
  bool exhausted() const { return pos_ >= nbits_; }
  std::uint64_t position() const { return pos_; }

 private:
  ByteView data_;
  std::uint64_t nbits_;
  std::uint64_t pos_ = 0;
};

Bytes pack_bits(const std::vector<bool>& bits);
std::vector<bool> unpack_bits(ByteView packed, std::size_t nbits);
constexpr std::size_t packed_size(std::size_t nbits) { return (nbits + 7) / 8; }

std::uint64_t fnv1a64(ByteView data, std::uint64_t seed = 0xcbf29ce484222325ull);

// File helpers. Failures are format errors (the CLI reports I/O and format
// problems under one exit code).
Bytes read_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, ByteView data);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace gebc
