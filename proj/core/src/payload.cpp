#include "gebc/payload.hpp"

#include <limits>
#include <string>

namespace gebc {

Bytes frame_payload(const CompressedPayload& payload) {
  ByteWriter w;
  w.tag(kPayloadMagic);
  w.u16(payload.version);
  w.u32(payload.client_id);
  w.u32(payload.round);
  w.u64(payload.spec_digest);
  w.u32(static_cast<std::uint32_t>(payload.blobs.size()));
  for (const auto& blob : payload.blobs) {
    if (blob.size() > std::numeric_limits<std::uint32_t>::max()) throw UsageError("layer blob exceeds 4 GiB");
    w.u32(static_cast<std::uint32_t>(blob.size()));
    w.bytes(blob);
  }
  return w.take();
}

CompressedPayload parse_payload(ByteView framed) {
  ByteReader r(framed, ErrorKind::format);
  r.expect_tag(kPayloadMagic, "compressed payload");
  CompressedPayload p;
  p.version = r.u16();
  if (p.version != kPayloadVersion) {
    throw UnsupportedVersionError("unsupported payload version " + std::to_string(p.version) +
                                      " (this build reads version " + std::to_string(kPayloadVersion) + ")",
                                  p.version);
  }
  p.client_id = r.u32();
  p.round = r.u32();
  p.spec_digest = r.u64();
  const std::uint32_t count = r.u32();
  if (count > r.remaining() / 4) throw FormatError("layer count exceeds payload size");
  p.blobs.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const ByteView blob = r.bytes(r.u32());
    p.blobs.emplace_back(blob.begin(), blob.end());
  }
  if (!r.at_end()) throw FormatError("trailing bytes after payload");
  return p;
}

const char* to_string(BlobTag tag) {
  switch (tag) {
    case BlobTag::lossless_only: return "lossless_only";
    case BlobTag::lossy: return "lossy";
  }
  return "?";
}

BlobTag peek_tag(ByteView blob) {
  if (blob.empty()) throw IntegrityError("empty layer blob");
  if (blob[0] > 1) throw IntegrityError("unknown layer blob tag " + std::to_string(blob[0]));
  return static_cast<BlobTag>(blob[0]);
}

}  // namespace gebc
