#pragma once

// Payload stream file written by `gebc compress`: every round's framed
// payload for one client plus what the server needs to replay them.
//
//   "GEBS", u16 version, u8 trace mode, layer table,
//   f64 beta, f64 tau, f64 sigma_floor, u8 full_batch, u8 prediction,
//   u32 frame count, then per frame u64 length + framed payload bytes.

#include <filesystem>

#include "gebc/pipeline.hpp"

namespace gebc::cli {

inline constexpr char kStreamMagic[] = "GEBS";
inline constexpr std::uint16_t kStreamVersion = 1;

struct PayloadStream {
  TraceMode mode = TraceMode::mini_batch;
  std::vector<LayerSpec> layers;
  PredictParams predict;
  bool prediction = true;
  std::vector<Bytes> frames;
};

Bytes encode_stream(const PayloadStream& s);
// Everything that goes wrong here is a format error; damage inside a frame
// surfaces later from parse_payload / decompress_round.
PayloadStream decode_stream(ByteView data);

PayloadStream load_stream(const std::filesystem::path& path);
void save_stream(const PayloadStream& s, const std::filesystem::path& path);

}  // namespace gebc::cli
