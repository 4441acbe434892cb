#include <random>

#include "doctest.h"
#include "gebc/pipeline.hpp"
#include "oracles.hpp"

using namespace gebc;

namespace {

GradientTrace structured(TraceMode mode, std::size_t rounds = 10, std::uint64_t seed = 1) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.mode = mode;
  cfg.rounds = rounds;
  cfg.layers = {parse_layer_spec("conv1:16x3x3x3"), parse_layer_spec("conv2:32x16x3x3"),
                parse_layer_spec("fc:10x256"), parse_layer_spec("bias:32")};
  return synth_trace(cfg);
}

double max_err(std::span<const float> a, std::span<const float> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(double(a[i]) - b[i]));
  return m;
}

}  // namespace

TEST_CASE("small layers take the lossless path") {
  const LayerSpec spec{"tiny", {10}};
  std::mt19937_64 eng(1);
  const std::vector<GradientTensor> round{{spec, oracle::random_values(eng, 10)}};
  auto client = EndpointState::init({&spec, 1});
  auto server = client;
  const auto res = compress_round(round, client, PipelineParams{});
  CHECK(res.layers[0].tag == BlobTag::lossless_only);
  CHECK(peek_tag(res.payload.blobs[0]) == BlobTag::lossless_only);
  const auto out = decompress_round(res.payload, server, PipelineParams{});
  CHECK(bitwise_equal(out[0].values, round[0].values));
  CHECK(client.per_layer[0].magnitude.memory == std::vector<float>(10, 0.0f));
  CHECK_FALSE(client.per_layer[0].magnitude.initialized);
}

TEST_CASE("client and server stay synchronized and within bound") {
  for (auto mode : {TraceMode::mini_batch, TraceMode::full_batch}) {
    for (auto bm : {BoundMode::relative, BoundMode::absolute}) {
      const auto trace = structured(mode);
      PipelineParams p;
      p.predict.full_batch = mode == TraceMode::full_batch;
      p.bound = {bm, bm == BoundMode::relative ? 3e-2 : 1e-5};
      auto client = EndpointState::init(trace.layers);
      auto server = client;
      for (const auto& round : trace.rounds) {
        const auto res = compress_round(round, client, p);
        const auto framed = frame_payload(res.payload);
        const auto out = decompress_round(parse_payload(framed), server, p);
        REQUIRE(serialize_state(client) == serialize_state(server));
        for (std::size_t l = 0; l < round.size(); ++l) {
          CHECK(bitwise_equal(out[l].values, client.per_layer[l].prev_recon));
          const double delta = res.layers[l].tag == BlobTag::lossy ? res.layers[l].delta : 0.0;
          CHECK(max_err(round[l].values, out[l].values) <= delta);
          CHECK(res.layers[l].max_abs_error == max_err(round[l].values, out[l].values));
          if (bm == BoundMode::relative && res.layers[l].tag == BlobTag::lossy) {
            CHECK(delta == resolve_bound(p.bound, round[l].values));
          }
        }
      }
      CHECK(client.round == 10);
    }
  }
}

TEST_CASE("round 1 matches the no-prediction oracle") {
  for (auto mode : {TraceMode::mini_batch, TraceMode::full_batch}) {
    const auto trace = structured(mode, 1);
    PipelineParams p;
    p.predict.full_batch = mode == TraceMode::full_batch;
    auto client = EndpointState::init(trace.layers);
    const auto res = compress_round(trace.rounds[0], client, p);
    for (std::size_t l = 0; l < trace.layers.size(); ++l) {
      const auto& g = trace.rounds[0][l].values;
      if (res.layers[l].tag == BlobTag::lossless_only) continue;
      CHECK(res.layers[l].bitmap_bits == 0);
      const double delta = resolve_bound(p.bound, g);
      const auto oracle_recon = dequantize(quantize(g, delta), delta);
      CHECK(bitwise_equal(client.per_layer[l].prev_recon, oracle_recon));
    }
  }
}

TEST_CASE("disabled prediction equals plain quantization") {
  const auto trace = structured(TraceMode::mini_batch, 5);
  for (int variant = 0; variant < 2; ++variant) {
    PipelineParams p;
    if (variant == 0) p.prediction = false;
    else p.predict.tau = 1.01;  // no kernel qualifies, fc never predicts in mini-batch
    auto client = EndpointState::init(trace.layers);
    auto server = client;
    for (const auto& round : trace.rounds) {
      const auto res = compress_round(round, client, p);
      const auto out = decompress_round(res.payload, server, p);
      for (std::size_t l = 0; l < round.size(); ++l) {
        if (res.layers[l].tag != BlobTag::lossy) continue;
        const auto& g = round[l].values;
        const double delta = resolve_bound(p.bound, g);
        CHECK(bitwise_equal(out[l].values, dequantize(quantize(g, delta), delta)));
        if (variant == 0) CHECK(res.layers[l].bitmap_bits == 0);
      }
    }
  }
}

TEST_CASE("payload bytes are deterministic") {
  const auto trace = structured(TraceMode::mini_batch, 4);
  auto run = [&] {
    auto client = EndpointState::init(trace.layers);
    Bytes all;
    for (const auto& round : trace.rounds) {
      const auto f = frame_payload(compress_round(round, client, PipelineParams{}, 7).payload);
      all.insert(all.end(), f.begin(), f.end());
    }
    return all;
  };
  CHECK(run() == run());
}

TEST_CASE("compress leaves state untouched on error") {
  const auto trace = structured(TraceMode::mini_batch, 2);
  auto client = EndpointState::init(trace.layers);
  compress_round(trace.rounds[0], client, PipelineParams{});
  const Bytes before = serialize_state(client);
  auto bad = trace.rounds[1];
  bad[1].values[5] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(compress_round(bad, client, PipelineParams{}), DataError);
  CHECK(serialize_state(client) == before);
  auto wrong = trace.rounds[1];
  wrong.pop_back();
  CHECK_THROWS_AS(compress_round(wrong, client, PipelineParams{}), UsageError);
  CHECK(serialize_state(client) == before);
}

TEST_CASE("payload framing") {
  std::mt19937_64 eng(3);
  for (int trial = 0; trial < 30; ++trial) {
    CompressedPayload p;
    p.client_id = std::uint32_t(eng());
    p.round = std::uint32_t(eng());
    p.spec_digest = eng();
    p.blobs.resize(eng() % 6);
    for (auto& b : p.blobs) {
      b.resize(eng() % 100);
      for (auto& x : b) x = std::uint8_t(eng());
    }
    CHECK(parse_payload(frame_payload(p)) == p);
  }
  CompressedPayload p;
  p.blobs = {{1, 2, 3}};
  Bytes f = frame_payload(p);
  SUBCASE("wrong magic") {
    f[0] = 'X';
    CHECK_THROWS_AS(parse_payload(f), FormatError);
  }
  SUBCASE("newer version") {
    f[4] = kPayloadVersion + 1;
    CHECK_THROWS_AS(parse_payload(f), UnsupportedVersionError);
  }
  SUBCASE("truncated") {
    f.pop_back();
    CHECK_THROWS_AS(parse_payload(f), FormatError);
  }
  SUBCASE("trailing bytes") {
    f.push_back(0);
    CHECK_THROWS_AS(parse_payload(f), FormatError);
  }
}

TEST_CASE("desynchronized server") {
  const auto trace = structured(TraceMode::mini_batch, 3);
  auto client = EndpointState::init(trace.layers);
  const auto r1 = compress_round(trace.rounds[0], client, PipelineParams{});
  const auto r2 = compress_round(trace.rounds[1], client, PipelineParams{});

  SUBCASE("skipped round") {
    auto server = EndpointState::init(trace.layers);
    CHECK_THROWS_AS(decompress_round(r2.payload, server, PipelineParams{}), ProtocolError);
  }
  SUBCASE("different model") {
    auto layers = trace.layers;
    layers[0].name = "renamed";
    auto server = EndpointState::init(layers);
    CHECK_THROWS_AS(decompress_round(r1.payload, server, PipelineParams{}), ProtocolError);
  }
  SUBCASE("bitmap while prediction is off") {
    auto server = EndpointState::init(trace.layers);
    PipelineParams off;
    off.prediction = false;
    decompress_round(r1.payload, server, off);
    CHECK_THROWS_AS(decompress_round(r2.payload, server, off), ProtocolError);
  }
  SUBCASE("blob count") {
    auto server = EndpointState::init(trace.layers);
    auto p = r1.payload;
    p.blobs.pop_back();
    CHECK_THROWS_AS(decompress_round(p, server, PipelineParams{}), IntegrityError);
  }
}

TEST_CASE("tampered blobs are integrity errors and leave the server state alone") {
  const auto trace = structured(TraceMode::mini_batch, 1);
  auto client = EndpointState::init(trace.layers);
  PipelineParams p;
  p.backend = LosslessBackend::store;  // so flips land in the body, not in deflate framing
  const auto res = compress_round(trace.rounds[0], client, p);
  std::mt19937_64 eng(9);
  int caught = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto payload = res.payload;
    auto& blob = payload.blobs[1];
    const std::size_t at = 1 + kLosslessHeaderSize + 16 + eng() % 10;  // Huffman header area
    blob[at] ^= std::uint8_t(1u << (eng() % 8));
    auto server = EndpointState::init(trace.layers);
    const Bytes before = serialize_state(server);
    try {
      decompress_round(payload, server, p);
    } catch (const IntegrityError&) {
      ++caught;
      CHECK(serialize_state(server) == before);
    }
  }
  CHECK(caught > 0);
  auto payload = res.payload;
  payload.blobs[1].resize(payload.blobs[1].size() / 2);
  auto server = EndpointState::init(trace.layers);
  CHECK_THROWS_AS(decompress_round(payload, server, p), IntegrityError);
  payload = res.payload;
  payload.blobs[1][0] = 9;
  CHECK_THROWS_AS(decompress_round(payload, server, p), IntegrityError);
}

TEST_CASE("inspect_blob reports what was encoded") {
  const auto trace = structured(TraceMode::mini_batch, 2);
  auto client = EndpointState::init(trace.layers);
  compress_round(trace.rounds[0], client, PipelineParams{});
  const auto res = compress_round(trace.rounds[1], client, PipelineParams{});
  for (std::size_t l = 0; l < trace.layers.size(); ++l) {
    const auto info = inspect_blob(res.payload.blobs[l], trace.layers[l]);
    CHECK(info.tag == res.layers[l].tag);
    CHECK(info.blob_bytes == res.layers[l].blob_bytes);
    if (info.tag == BlobTag::lossy) {
      CHECK(info.delta == res.layers[l].delta);
      CHECK(info.bitmap.payload_bits() == res.layers[l].bitmap_bits);
      CHECK(info.literal_count == res.layers[l].literal_count);
      CHECK(info.distinct_symbols == res.layers[l].bin_histogram.size());
    }
  }
  const auto conv = inspect_blob(res.payload.blobs[1], trace.layers[1]);
  CHECK(conv.bitmap.variant == SignBitmap::Variant::kernel_maps);
  CHECK(conv.bitmap.payload_bits() == trace.layers[1].kernel_count() + conv.bitmap.predicted_kernels());
}
