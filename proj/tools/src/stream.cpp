#include "stream.hpp"

namespace gebc::cli {

Bytes encode_stream(const PayloadStream& s) {
  ByteWriter w;
  w.tag(kStreamMagic);
  w.u16(kStreamVersion);
  w.u8(static_cast<std::uint8_t>(s.mode));
  write_layer_table(w, s.layers);
  w.f64(s.predict.beta);
  w.f64(s.predict.tau);
  w.f64(s.predict.sigma_floor);
  w.u8(s.predict.full_batch ? 1 : 0);
  w.u8(s.prediction ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(s.frames.size()));
  for (const auto& f : s.frames) {
    w.u64(f.size());
    w.bytes(f);
  }
  return w.take();
}

PayloadStream decode_stream(ByteView data) {
  ByteReader in(data, ErrorKind::format);
  in.expect_tag(kStreamMagic, "payload stream");
  const std::uint16_t version = in.u16();
  if (version != kStreamVersion) {
    throw UnsupportedVersionError("unsupported payload stream version " + std::to_string(version), version);
  }
  PayloadStream s;
  const std::uint8_t mode = in.u8();
  if (mode > 1) throw FormatError("unknown trace mode " + std::to_string(mode));
  s.mode = static_cast<TraceMode>(mode);
  s.layers = read_layer_table(in);
  s.predict.beta = in.f64();
  s.predict.tau = in.f64();
  s.predict.sigma_floor = in.f64();
  s.predict.full_batch = in.u8() != 0;
  s.prediction = in.u8() != 0;
  try {
    validate(s.predict);
  } catch (const UsageError& e) {
    throw FormatError(std::string("payload stream carries invalid parameters: ") + e.what());
  }
  const std::uint32_t count = in.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint64_t len = in.u64();
    if (len > in.remaining()) {
      throw FormatError("payload stream truncated in frame " + std::to_string(i + 1) + " of " + std::to_string(count));
    }
    const ByteView f = in.bytes(static_cast<std::size_t>(len));
    s.frames.emplace_back(f.begin(), f.end());
  }
  if (!in.at_end()) throw FormatError("trailing bytes after the last payload frame");
  return s;
}

PayloadStream load_stream(const std::filesystem::path& path) { return decode_stream(read_file(path)); }

void save_stream(const PayloadStream& s, const std::filesystem::path& path) {
  write_file_atomic(path, encode_stream(s));
}

}  // namespace gebc::cli
