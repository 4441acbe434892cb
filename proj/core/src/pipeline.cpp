#include "gebc/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace gebc {
namespace {

std::vector<float> abs_values(std::span<const float> v) {
  std::vector<float> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](float x) { return std::fabs(x); });
  return out;
}

double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return m;
}

Bytes seal(BlobTag tag, ByteView body, LosslessBackend backend) {
  Bytes packed = lossless_compress(body, backend);
  Bytes blob;
  blob.reserve(packed.size() + 1);
  blob.push_back(static_cast<std::uint8_t>(tag));
  blob.insert(blob.end(), packed.begin(), packed.end());
  return blob;
}

struct LossyBody {
  float mu = 0.0f;
  float sigma = 0.0f;
  double delta = 0.0;
  HuffmanBlock huffman;
  QuantizedStream stream;
  SignBitmap bitmap;
};

// body = mu f32, sigma f32, delta f64, Huffman block, literal section, bitmap
Bytes encode_lossy_body(const LossyBody& b) {
  ByteWriter w;
  w.f32(b.mu);
  w.f32(b.sigma);
  w.f64(b.delta);
  write_huffman(w, b.huffman);
  write_literals(w, b.stream);
  write_bitmap(w, b.bitmap);
  return w.take();
}

LossyBody decode_lossy_body(ByteView body, const LayerSpec& spec) {
  ByteReader r(body, ErrorKind::integrity);
  LossyBody b;
  b.mu = r.f32();
  b.sigma = r.f32();
  b.delta = r.f64();
  if (!std::isfinite(b.mu) || !std::isfinite(b.sigma) || !(b.delta > 0.0) || !std::isfinite(b.delta)) {
    throw IntegrityError("layer '" + spec.name + "' carries invalid statistics");
  }
  b.huffman = read_huffman(r);
  b.stream.bins = entropy_decode(b.huffman);
  b.huffman.symbol_count = b.stream.bins.size();
  if (b.stream.bins.size() != spec.element_count()) {
    throw IntegrityError("layer '" + spec.name + "' decodes to " + std::to_string(b.stream.bins.size()) +
                         " bins, expected " + std::to_string(spec.element_count()));
  }
  read_literals(r, b.stream);
  b.bitmap = read_bitmap(r);
  check_consistent(b.bitmap, spec);
  if (!r.at_end()) throw IntegrityError("trailing bytes in layer '" + spec.name + "'");
  return b;
}

void check_layers(std::span<const GradientTensor> layers, const EndpointState& state) {
  if (layers.size() != state.layers.size()) {
    throw UsageError("round has " + std::to_string(layers.size()) + " layers, state tracks " +
                     std::to_string(state.layers.size()));
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].spec != state.layers[l] || layers[l].values.size() != state.layers[l].element_count()) {
      throw UsageError("layer " + std::to_string(l) + " does not match the state's layer '" +
                       state.layers[l].name + "'");
    }
    check_finite(layers[l].values, state.layers[l].name);
  }
}

void commit(LayerState& st, std::vector<float> recon) {
  st.prev_sign = signs_of(recon);
  st.prev_recon = std::move(recon);
}

}  // namespace

void validate(const PipelineParams& params) {
  validate(params.predict);
  validate(params.bound);
  if (params.bin_cap < 1) throw UsageError("bin cap must be positive");
}

EndpointState EndpointState::init(std::span<const LayerSpec> layers) {
  EndpointState s;
  s.layers.assign(layers.begin(), layers.end());
  for (const auto& spec : layers) {
    validate(spec);
    const std::size_t n = spec.element_count();
    s.per_layer.push_back({MagPredictorState::zeros(n), std::vector<float>(n, 0.0f), SignTensor(n, 0)});
  }
  return s;
}

Bytes serialize_state(const EndpointState& state) {
  ByteWriter w;
  write_layer_table(w, state.layers);
  w.u32(state.round);
  for (const auto& st : state.per_layer) {
    w.u8(st.magnitude.initialized ? 1 : 0);
    w.f32_array(st.magnitude.memory);
    w.f32_array(st.prev_recon);
    for (auto s : st.prev_sign) w.u8(static_cast<std::uint8_t>(s));
  }
  return w.take();
}

CompressResult compress_round(std::span<const GradientTensor> layers, ClientState& state,
                              const PipelineParams& params, std::uint32_t client_id) {
  validate(params);
  check_layers(layers, state);
  const std::uint32_t round = state.round + 1;

  CompressResult result;
  result.payload.client_id = client_id;
  result.payload.round = round;
  result.payload.spec_digest = spec_digest(state.layers);
  std::vector<LayerState> next = state.per_layer;

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& spec = state.layers[l];
    const std::span<const float> g(layers[l].values);
    const std::size_t n = g.size();
    LayerState& st = next[l];
    LayerReport rep;
    rep.name = spec.name;
    rep.elements = n;
    rep.original_bytes = 4 * n;
    rep.kernel_count = spec.kernel_count();

    if (n <= params.lossy_threshold) {
      ByteWriter body;
      body.f32_array(g);
      result.payload.blobs.push_back(seal(BlobTag::lossless_only, body.view(), params.backend));
      commit(st, std::vector<float>(g.begin(), g.end()));
      rep.tag = BlobTag::lossless_only;
      rep.blob_bytes = result.payload.blobs.back().size();
      result.layers.push_back(std::move(rep));
      continue;
    }

    LossyBody body;
    const AbsStats cur = abs_stats(g);
    body.mu = static_cast<float>(cur.mean);
    body.sigma = static_cast<float>(cur.std);
    body.delta = resolve_bound(params.bound, g);

    std::vector<float> pred(n, 0.0f);
    if (params.prediction) {
      const auto prev_abs = abs_values(st.prev_recon);
      MagnitudePrediction mag = predict_magnitude(prev_abs, body.mu, body.sigma, st.magnitude, params.predict);
      // No sign history exists in the first round.
      if (round > 1) {
        SignPrediction sp = predict_signs(layers[l], st.prev_sign, st.prev_recon, params.predict);
        for (std::size_t i = 0; i < n; ++i) pred[i] = static_cast<float>(sp.signs[i]) * mag.pred_abs[i];
        body.bitmap = std::move(sp.bitmap);
      }
      st.magnitude = std::move(mag.state);
    }

    body.stream = quantize(g, pred, body.delta, params.bin_cap);
    body.huffman = entropy_encode(body.stream.bins);
    std::vector<float> recon = dequantize(body.stream, pred, body.delta);

    rep.tag = BlobTag::lossy;
    rep.delta = body.delta;
    rep.max_abs_error = max_abs_diff(g, recon);
    rep.bitmap_bytes = serialized_size(body.bitmap);
    rep.bitmap_bits = body.bitmap.payload_bits();
    rep.predicted_kernels = body.bitmap.predicted_kernels();
    rep.literal_count = body.stream.literals.size();
    for (auto b : body.stream.bins) ++rep.bin_histogram[b];

    result.payload.blobs.push_back(seal(BlobTag::lossy, encode_lossy_body(body), params.backend));
    rep.blob_bytes = result.payload.blobs.back().size();
    result.layers.push_back(std::move(rep));
    commit(st, std::move(recon));
  }

  state.per_layer = std::move(next);
  state.round = round;
  return result;
}

std::vector<GradientTensor> decompress_round(const CompressedPayload& payload, ServerState& state,
                                             const PipelineParams& params) {
  validate(params);
  if (payload.version != kPayloadVersion) {
    throw UnsupportedVersionError("unsupported payload version " + std::to_string(payload.version),
                                  payload.version);
  }
  if (payload.spec_digest != spec_digest(state.layers)) {
    throw ProtocolError("payload layer digest does not match the server's model");
  }
  if (payload.round != state.round + 1) {
    throw ProtocolError("payload is for round " + std::to_string(payload.round) + ", server expects round " +
                        std::to_string(state.round + 1));
  }
  if (payload.blobs.size() != state.layers.size()) {
    throw IntegrityError("payload carries " + std::to_string(payload.blobs.size()) + " blobs for " +
                         std::to_string(state.layers.size()) + " layers");
  }

  std::vector<LayerState> next = state.per_layer;
  std::vector<GradientTensor> out;
  out.reserve(state.layers.size());
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const auto& spec = state.layers[l];
    const ByteView blob(payload.blobs[l]);
    const std::size_t n = spec.element_count();
    LayerState& st = next[l];
    const BlobTag tag = peek_tag(blob);
    const Bytes body = lossless_decompress(blob.subspan(1));

    if (tag == BlobTag::lossless_only) {
      if (body.size() != 4 * n) throw IntegrityError("lossless blob for '" + spec.name + "' has wrong length");
      ByteReader r(body);
      std::vector<float> values = r.f32_array(n);
      check_finite(values, spec.name);
      out.push_back({spec, values});
      commit(st, std::move(values));
      continue;
    }

    LossyBody b = decode_lossy_body(body, spec);
    std::vector<float> pred(n, 0.0f);
    if (params.prediction) {
      const auto prev_abs = abs_values(st.prev_recon);
      MagnitudePrediction mag = predict_magnitude(prev_abs, b.mu, b.sigma, st.magnitude, params.predict);
      const SignTensor signs = reconstruct_signs(b.bitmap, st.prev_sign, spec);
      for (std::size_t i = 0; i < n; ++i) pred[i] = static_cast<float>(signs[i]) * mag.pred_abs[i];
      st.magnitude = std::move(mag.state);
    } else if (b.bitmap.variant != SignBitmap::Variant::none) {
      throw ProtocolError("sign bitmap received while prediction is disabled");
    }
    std::vector<float> recon = dequantize(b.stream, pred, b.delta);
    out.push_back({spec, recon});
    commit(st, std::move(recon));
  }

  state.per_layer = std::move(next);
  state.round = payload.round;
  return out;
}

BlobInfo inspect_blob(ByteView blob, const LayerSpec& spec) {
  BlobInfo info;
  info.tag = peek_tag(blob);
  info.blob_bytes = blob.size();
  if (blob.size() < 1 + kLosslessHeaderSize) throw IntegrityError("layer blob truncated");
  info.backend = static_cast<LosslessBackend>(blob[1]);
  const Bytes body = lossless_decompress(blob.subspan(1));
  info.body_bytes = body.size();
  if (info.tag == BlobTag::lossless_only) {
    if (body.size() != 4 * spec.element_count()) throw IntegrityError("lossless blob has wrong length");
    return info;
  }
  LossyBody b = decode_lossy_body(body, spec);
  info.mu = b.mu;
  info.sigma = b.sigma;
  info.delta = b.delta;
  info.literal_count = b.stream.literals.size();
  for (auto len : b.huffman.code_lengths) {
    if (len) {
      ++info.distinct_symbols;
      info.max_code_length = std::max<unsigned>(info.max_code_length, len);
    }
  }
  info.huffman = std::move(b.huffman);
  info.bitmap = std::move(b.bitmap);
  return info;
}

}  // namespace gebc
