#include "gebc/codec/lossless.hpp"

#include <zlib.h>

#include <limits>
#include <string>

namespace gebc {

LosslessBackend parse_backend(std::string_view name) {
  if (name == "default" || name == "deflate") return LosslessBackend::deflate;
  if (name == "store") return LosslessBackend::store;
  throw UsageError("unknown lossless backend '" + std::string(name) + "'");
}

const char* to_string(LosslessBackend backend) {
  switch (backend) {
    case LosslessBackend::store: return "store";
    case LosslessBackend::deflate: return "deflate";
  }
  return "?";
}

Bytes lossless_compress(ByteView input, LosslessBackend backend) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(backend));
  w.u64(input.size());
  Bytes out = w.take();
  switch (backend) {
    case LosslessBackend::store:
      out.insert(out.end(), input.begin(), input.end());
      return out;
    case LosslessBackend::deflate: {
      if (input.size() > std::numeric_limits<uLong>::max()) throw UsageError("input too large for deflate");
      uLongf bound = compressBound(static_cast<uLong>(input.size()));
      out.resize(kLosslessHeaderSize + bound);
      const int rc = compress2(out.data() + kLosslessHeaderSize, &bound, input.data(),
                               static_cast<uLong>(input.size()), Z_DEFAULT_COMPRESSION);
      if (rc != Z_OK) throw UsageError("deflate failed with code " + std::to_string(rc));
      out.resize(kLosslessHeaderSize + bound);
      return out;
    }
  }
  throw UsageError("unknown lossless backend");
}

Bytes lossless_decompress(ByteView input) {
  ByteReader r(input, ErrorKind::integrity);
  const std::uint8_t id = r.u8();
  const std::uint64_t size = r.u64();
  const ByteView body = input.subspan(kLosslessHeaderSize);
  switch (id) {
    case static_cast<std::uint8_t>(LosslessBackend::store):
      if (body.size() != size) throw IntegrityError("stored block length mismatch");
      return Bytes(body.begin(), body.end());
    case static_cast<std::uint8_t>(LosslessBackend::deflate): {
      // Deflate cannot expand data by more than ~1032x; larger claims are corrupt.
      if (size > std::numeric_limits<uLong>::max() || size > 1100 * (body.size() + 16)) {
        throw IntegrityError("deflate block declares an implausible size");
      }
      Bytes out(size ? size : 1);
      uLongf got = static_cast<uLongf>(out.size());
      const int rc = uncompress(out.data(), &got, body.data(), static_cast<uLong>(body.size()));
      if (rc != Z_OK || got != size) throw IntegrityError("corrupt deflate block");
      out.resize(size);
      return out;
    }
    default: throw IntegrityError("unknown lossless backend id " + std::to_string(id));
  }
}

}  // namespace gebc
