#pragma once

#include <cstdint>
#include <vector>

#include "gebc/bytes.hpp"

namespace gebc {

inline constexpr char kPayloadMagic[] = "GEBC";
inline constexpr std::uint16_t kPayloadVersion = 1;

// One client's compressed update for one round.
struct CompressedPayload {
  std::uint16_t version = kPayloadVersion;
  std::uint32_t client_id = 0;
  std::uint32_t round = 0;
  std::uint64_t spec_digest = 0;
  std::vector<Bytes> blobs;  // one per layer, in layer order

  bool operator==(const CompressedPayload&) const = default;
};

// "GEBC", u16 version, u32 client id, u32 round, u64 spec digest,
// u32 layer count, then per layer u32 blob length + blob bytes.
// All integers little-endian.
Bytes frame_payload(const CompressedPayload& payload);
// Bad magic, unknown version, truncation and trailing bytes are format
// errors.
CompressedPayload parse_payload(ByteView framed);

enum class BlobTag : std::uint8_t { lossless_only = 0, lossy = 1 };

const char* to_string(BlobTag tag);
// Reads the tag byte without decompressing the blob.
BlobTag peek_tag(ByteView blob);

}  // namespace gebc
