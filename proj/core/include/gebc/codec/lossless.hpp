#pragma once

// General-purpose lossless stage applied to every layer blob.

#include <cstdint>
#include <string_view>

#include "gebc/bytes.hpp"

namespace gebc {

enum class LosslessBackend : std::uint8_t {
  store = 0,    // identity
  deflate = 1,  // zlib deflate, the default
};

inline constexpr LosslessBackend kDefaultBackend = LosslessBackend::deflate;

LosslessBackend parse_backend(std::string_view name);  // "default" | "deflate" | "store"
const char* to_string(LosslessBackend backend);

// Output: u8 backend id, u64 original length, backend body. The header makes
// the result self-describing; decompression needs no backend argument.
Bytes lossless_compress(ByteView input, LosslessBackend backend = kDefaultBackend);
Bytes lossless_decompress(ByteView input);

inline constexpr std::size_t kLosslessHeaderSize = 9;

}  // namespace gebc
