#pragma once

// Client-side compression and server-side decompression of one round of
// gradients. Both sides keep an EndpointState and update it from the
// reconstructed gradients only, so the framed payload is the whole channel.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gebc/codec/huffman.hpp"
#include "gebc/codec/lossless.hpp"
#include "gebc/codec/quantizer.hpp"
#include "gebc/payload.hpp"
#include "gebc/predictor.hpp"
#include "gebc/trace.hpp"

namespace gebc {

inline constexpr std::size_t kDefaultLossyThreshold = 1024;

struct PipelineParams {
  PredictParams predict;
  ErrorBoundConfig bound;
  std::size_t lossy_threshold = kDefaultLossyThreshold;  // layers with <= this many elements go lossless
  LosslessBackend backend = kDefaultBackend;
  bool prediction = true;  // false: plain quantize of the raw gradient
  std::int32_t bin_cap = kDefaultBinCap;
};

void validate(const PipelineParams& params);

struct LayerState {
  MagPredictorState magnitude;
  std::vector<float> prev_recon;  // reconstructed gradient of the last round
  SignTensor prev_sign;           // sign(prev_recon)
};

struct EndpointState {
  std::vector<LayerSpec> layers;
  std::vector<LayerState> per_layer;
  std::uint32_t round = 0;  // number of rounds processed

  static EndpointState init(std::span<const LayerSpec> layers);
};

using ClientState = EndpointState;
using ServerState = EndpointState;

// Canonical byte image, used to check client/server agreement.
Bytes serialize_state(const EndpointState& state);

struct LayerReport {
  std::string name;
  BlobTag tag = BlobTag::lossless_only;
  std::size_t elements = 0;
  std::size_t original_bytes = 0;
  std::size_t blob_bytes = 0;
  double delta = 0.0;          // 0 for lossless layers
  double max_abs_error = 0.0;
  std::size_t bitmap_bytes = 0;  // serialized bitmap before the lossless stage
  std::size_t bitmap_bits = 0;   // kernel_count + predicted kernels (or 1 for a flip bit)
  std::size_t kernel_count = 0;
  std::size_t predicted_kernels = 0;
  std::size_t literal_count = 0;
  std::map<std::int32_t, std::uint64_t> bin_histogram;
};

struct CompressResult {
  CompressedPayload payload;
  std::vector<LayerReport> layers;
};

// Compresses round state.round + 1 and advances `state` to it. `state` is
// left untouched if an error is thrown.
CompressResult compress_round(std::span<const GradientTensor> layers, ClientState& state,
                              const PipelineParams& params, std::uint32_t client_id = 0);

// Reconstructs one payload and advances `state` exactly as the client did.
// Desynchronized state (digest or round mismatch) is a protocol error;
// damaged blobs are integrity errors.
std::vector<GradientTensor> decompress_round(const CompressedPayload& payload, ServerState& state,
                                             const PipelineParams& params);

// Decoded view of one layer blob, for inspection tools.
struct BlobInfo {
  BlobTag tag = BlobTag::lossless_only;
  std::size_t blob_bytes = 0;
  std::size_t body_bytes = 0;  // after the lossless stage is undone
  LosslessBackend backend = kDefaultBackend;
  float mu = 0.0f;
  float sigma = 0.0f;
  double delta = 0.0;
  HuffmanBlock huffman;
  std::size_t distinct_symbols = 0;
  unsigned max_code_length = 0;
  std::size_t literal_count = 0;
  SignBitmap bitmap;
};

BlobInfo inspect_blob(ByteView blob, const LayerSpec& spec);

}  // namespace gebc
