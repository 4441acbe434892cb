#include <filesystem>
#include <random>

#include "doctest.h"
#include "gebc/trace.hpp"
#include "oracles.hpp"

using namespace gebc;

namespace {

std::filesystem::path tmp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gebc_test_trace_" + name);
}

GradientTrace small_trace(std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  GradientTrace t;
  t.mode = seed % 2 ? TraceMode::full_batch : TraceMode::mini_batch;
  t.layers = {parse_layer_spec("conv:4x3x3x3"), parse_layer_spec("fc:7x5"), parse_layer_spec("b:3")};
  for (int r = 0; r < 3; ++r) {
    std::vector<GradientTensor> round;
    for (const auto& l : t.layers) round.push_back({l, oracle::random_values(eng, l.element_count())});
    t.rounds.push_back(std::move(round));
  }
  return t;
}

Bytes tiny_trace_bytes(float value, std::uint32_t declared) {
  ByteWriter w;
  w.tag("GTRC");
  w.u16(1);
  w.u8(0);
  w.u32(1);
  w.u16(1);
  w.tag("x");
  w.u8(1);
  w.u32(declared);
  w.u32(1);
  for (int i = 0; i < 9; ++i) w.f32(i == 4 ? value : 1.0f);
  return w.take();
}

}  // namespace

TEST_CASE("layer spec kinds and counts") {
  const auto conv = parse_layer_spec("c:8x4x3x3");
  CHECK(conv.kind() == LayerKind::conv4d);
  CHECK(conv.element_count() == 288);
  CHECK(conv.kernel_count() == 32);
  CHECK(conv.kernel_size() == 9);
  const auto fc = parse_layer_spec("fc:10x20");
  CHECK(fc.kind() == LayerKind::other);
  CHECK(fc.kernel_count() == 0);
  CHECK_THROWS_AS(parse_layer_spec("bad"), UsageError);
  CHECK_THROWS_AS(parse_layer_spec("z:3x0"), UsageError);
  CHECK_THROWS_AS(parse_layer_spec("five:1x1x1x1x1"), UsageError);
}

TEST_CASE("save then load is a bitwise identity on random traces") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t = small_trace(seed);
    CHECK(bitwise_equal(decode_trace(encode_trace(t)), t));
  }
  const auto t = small_trace(3);
  const auto path = tmp_path("roundtrip.gtrc");
  save_trace(t, path);
  CHECK(bitwise_equal(load_trace(path), t));
  const Bytes first = read_file(path);
  save_trace(t, path);
  CHECK(read_file(path) == first);
  std::filesystem::remove(path);
}

TEST_CASE("negative zero survives the file format") {
  GradientTrace t;
  t.layers = {parse_layer_spec("x:2")};
  t.rounds = {{{t.layers[0], {-0.0f, 0.0f}}}};
  const auto back = decode_trace(encode_trace(t));
  CHECK(std::signbit(back.rounds[0][0].values[0]));
  CHECK_FALSE(std::signbit(back.rounds[0][0].values[1]));
}

TEST_CASE("load_trace error classes") {
  SUBCASE("declared 10 values but 9 present") {
    CHECK_THROWS_AS(decode_trace(tiny_trace_bytes(1.0f, 10)), IntegrityError);
  }
  SUBCASE("well-formed file decodes") { CHECK(decode_trace(tiny_trace_bytes(1.0f, 9)).rounds.size() == 1); }
  SUBCASE("NaN payload") {
    CHECK_THROWS_AS(decode_trace(tiny_trace_bytes(std::numeric_limits<float>::quiet_NaN(), 9)), DataError);
  }
  SUBCASE("Inf payload") {
    CHECK_THROWS_AS(decode_trace(tiny_trace_bytes(std::numeric_limits<float>::infinity(), 9)), DataError);
  }
  SUBCASE("bad magic") {
    Bytes b = tiny_trace_bytes(1.0f, 9);
    b[0] = 'X';
    CHECK_THROWS_AS(decode_trace(b), FormatError);
  }
  SUBCASE("truncated header") {
    Bytes b = tiny_trace_bytes(1.0f, 9);
    b.resize(9);
    CHECK_THROWS_AS(decode_trace(b), FormatError);
  }
  SUBCASE("future version") {
    Bytes b = tiny_trace_bytes(1.0f, 9);
    b[4] = 2;
    CHECK_THROWS_AS(decode_trace(b), UnsupportedVersionError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_trace(tmp_path("does_not_exist")), FormatError); }
}

TEST_CASE("saving an empty layer list is a format error") {
  GradientTrace t;
  t.rounds = {{}};
  CHECK_THROWS_AS(encode_trace(t), FormatError);
}

TEST_CASE("abs_stats uses the population form") {
  const std::vector<float> a{3.0f, -4.0f};
  CHECK(abs_stats(a).mean == doctest::Approx(3.5));
  CHECK(abs_stats(a).std == doctest::Approx(0.5));
  const std::vector<float> c{-2.0f, 2.0f, 2.0f};
  CHECK(abs_stats(c).mean == doctest::Approx(2.0));
  CHECK(abs_stats(c).std == 0.0);
  const std::vector<float> z{0.0f};
  CHECK(abs_stats(z).mean == 0.0);
  CHECK(abs_stats(z).std == 0.0);
}

TEST_CASE("synth_trace is a pure function of its config") {
  SynthConfig cfg;
  cfg.layers = {parse_layer_spec("c:8x4x3x3"), parse_layer_spec("fc:50")};
  cfg.rounds = 4;
  CHECK(bitwise_equal(synth_trace(cfg), synth_trace(cfg)));
  SynthConfig other = cfg;
  other.seed = 2;
  CHECK_FALSE(bitwise_equal(synth_trace(cfg), synth_trace(other)));
  cfg.mode = TraceMode::full_batch;
  CHECK(bitwise_equal(synth_trace(cfg), synth_trace(cfg)));
}

TEST_CASE("synth_trace magnitude decay follows decay^(t-1)") {
  // Every factor in the generator has expectation 1 apart from the envelope,
  // so E[mean|g| at round 10] / E[mean|g| at round 1] = 0.9^9.
  SynthConfig cfg;
  cfg.layers = {parse_layer_spec("c:64x32x3x3")};
  cfg.rounds = 10;
  cfg.magnitude_decay = 0.9;
  const auto t = synth_trace(cfg);
  const double ratio = oracle::mean_abs(t.rounds[9][0].values) / oracle::mean_abs(t.rounds[0][0].values);
  CHECK(ratio == doctest::Approx(0.387420489).epsilon(0.2));
}

TEST_CASE("synth_trace kernel sign consistency meets its target") {
  for (double target : {0.5, 0.8, 0.95}) {
    SynthConfig cfg;
    cfg.layers = {parse_layer_spec("c:64x32x3x3")};
    cfg.rounds = 3;
    cfg.target_sign_consistency = target;
    const auto t = synth_trace(cfg);
    for (const auto& round : t.rounds) {
      const std::span<const float> v(round[0].values);
      double sum = 0.0;
      for (std::size_t k = 0; k < 2048; ++k) sum += oracle::consistency(v.subspan(k * 9, 9));
      CHECK(sum / 2048 >= target - 0.05);
    }
  }
}

TEST_CASE("synthetic kernels beat a sign-shuffled control") {
  SynthConfig cfg;
  cfg.layers = {parse_layer_spec("c:64x32x3x3")};
  cfg.rounds = 1;
  cfg.target_sign_consistency = 0.9;
  auto values = synth_trace(cfg).rounds[0][0].values;
  auto fraction = [](std::span<const float> v) {
    std::size_t hit = 0;
    for (std::size_t k = 0; k < v.size() / 9; ++k) hit += oracle::consistency(v.subspan(k * 9, 9)) >= 0.5;
    return double(hit) / double(v.size() / 9);
  };
  const double structured = fraction(values);
  std::mt19937_64 eng(11);
  std::shuffle(values.begin(), values.end(), eng);
  CHECK(structured > fraction(values));
}

TEST_CASE("full-batch synthesis alternates direction with the period") {
  SynthConfig cfg;
  cfg.layers = {parse_layer_spec("c:16x8x3x3")};
  cfg.rounds = 6;
  cfg.mode = TraceMode::full_batch;
  cfg.oscillation_period = 1;
  auto t = synth_trace(cfg);
  for (std::size_t r = 1; r < 6; ++r) {
    CHECK(oracle::naive_correlation(t.rounds[r - 1][0].values, t.rounds[r][0].values) < 0.0);
  }
  cfg.oscillation_period = 2;
  t = synth_trace(cfg);
  CHECK(oracle::naive_correlation(t.rounds[0][0].values, t.rounds[1][0].values) > 0.0);
  CHECK(oracle::naive_correlation(t.rounds[1][0].values, t.rounds[2][0].values) < 0.0);
}

TEST_CASE("synth config validation") {
  SynthConfig cfg;
  CHECK_THROWS_AS(synth_trace(cfg), UsageError);  // no layers
  cfg.layers = {parse_layer_spec("x:4")};
  cfg.target_sign_consistency = 1.5;
  CHECK_THROWS_AS(synth_trace(cfg), UsageError);
  cfg.target_sign_consistency = 0.5;
  cfg.magnitude_decay = 0.0;
  CHECK_THROWS_AS(synth_trace(cfg), UsageError);
  cfg.magnitude_decay = 1.0;
  cfg.rounds = 0;
  CHECK_THROWS_AS(synth_trace(cfg), UsageError);
}

TEST_CASE("flip probability calibration") {
  CHECK(flip_probability_for(1.0, 9) == 0.0);
  CHECK(flip_probability_for(0.1, 9) == 0.5);  // random signs already score ~0.18
  const double q = flip_probability_for(0.8, 9);
  CHECK(q > 0.0);
  CHECK(q < 0.5);
}
