#include <random>

#include "doctest.h"
#include "gebc/predictor.hpp"
#include "oracles.hpp"

using namespace gebc;

namespace {

GradientTensor conv_tensor(std::vector<float> values, std::uint32_t out, std::uint32_t in) {
  return {LayerSpec{"c", {out, in, 3, 3}}, std::move(values)};
}

std::vector<float> random_kernel(std::mt19937_64& eng, std::size_t t) {
  std::uniform_int_distribution<int> d(-1, 1);
  std::vector<float> k(t);
  for (auto& v : k) v = static_cast<float>(d(eng));
  return k;
}

}  // namespace

TEST_CASE("magnitude predictor hand trace") {
  const std::vector<float> prev{1, 2, 3};
  PredictParams p;
  p.beta = 0.5;
  const auto out = predict_magnitude(prev, 1.0f, 0.5f, MagPredictorState::zeros(3), p);
  CHECK(out.pred_abs[0] == doctest::Approx(0.6938138).epsilon(1e-6));
  CHECK(out.pred_abs[1] == doctest::Approx(1.0));
  CHECK(out.pred_abs[2] == doctest::Approx(1.3061862).epsilon(1e-6));
  CHECK(out.state.memory[0] == doctest::Approx(-0.6123724).epsilon(1e-6));
  CHECK(out.state.memory[1] == doctest::Approx(0.0));
  CHECK(out.state.memory[2] == doctest::Approx(0.6123724).epsilon(1e-6));
  CHECK(out.state.initialized);
}

TEST_CASE("constant history predicts the current mean") {
  const std::vector<float> prev(5, 0.7f);
  const auto out = predict_magnitude(prev, 0.25f, 0.1f, MagPredictorState::zeros(5), PredictParams{});
  for (float v : out.pred_abs) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("beta = 1 ignores memory") {
  const std::vector<float> prev{0.1f, 0.5f, 0.2f, 0.9f};
  PredictParams p;
  p.beta = 1.0;
  MagPredictorState junk{{5, -3, 2, 8}, true};
  const auto a = predict_magnitude(prev, 0.4f, 0.2f, junk, p);
  const auto b = predict_magnitude(prev, 0.4f, 0.2f, MagPredictorState::zeros(4), p);
  CHECK(bitwise_equal(a.pred_abs, b.pred_abs));
}

TEST_CASE("predicted magnitudes are clamped at zero, memory is not") {
  const std::vector<float> prev{0, 0, 0, 10};
  PredictParams p;
  p.beta = 1.0;
  const auto out = predict_magnitude(prev, 0.01f, 1.0f, MagPredictorState::zeros(4), p);
  CHECK(out.pred_abs[0] == 0.0f);
  CHECK(out.state.memory[0] < 0.0f);
}

TEST_CASE("magnitude predictor is deterministic and checks lengths") {
  std::mt19937_64 eng(3);
  PredictParams p;
  MagPredictorState s1 = MagPredictorState::zeros(100), s2 = s1;
  for (int r = 0; r < 5; ++r) {
    auto prev = oracle::random_values(eng, 100);
    for (auto& v : prev) v = std::fabs(v);
    const auto a = predict_magnitude(prev, 0.3f, 0.2f, s1, p);
    const auto b = predict_magnitude(prev, 0.3f, 0.2f, s2, p);
    CHECK(bitwise_equal(a.pred_abs, b.pred_abs));
    CHECK(bitwise_equal(a.state.memory, b.state.memory));
    s1 = a.state;
    s2 = b.state;
  }
  CHECK_THROWS_AS(predict_magnitude(std::vector<float>(3), 0, 0, MagPredictorState::zeros(4), p), UsageError);
}

TEST_CASE("baseline predictors") {
  const std::vector<std::vector<float>> one{{1, 2}};
  CHECK(baseline_predict(BaselineKind::lorenzo, one) == std::vector<float>{1, 2});
  const std::vector<std::vector<float>> three{{1}, {2}, {3}};
  CHECK(baseline_predict(BaselineKind::ma3, three)[0] == doctest::Approx(2.0));
  CHECK_THROWS_AS(baseline_predict(BaselineKind::ma5, three), UsageError);
  const std::vector<std::vector<float>> four{{4}};
  CHECK(baseline_predict(BaselineKind::ema_nonorm, four, 0.5)[0] == doctest::Approx(2.0));
  CHECK(baseline_predict(BaselineKind::ar1, one) == std::vector<float>{1, 2});  // phi defaults to 1
  const std::vector<std::vector<float>> halving{{8, 4}, {4, 2}};
  const auto ar = baseline_predict(BaselineKind::ar1, halving);
  CHECK(ar[0] == doctest::Approx(2.0));
  CHECK(ar[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(baseline_predict(BaselineKind::lorenzo, std::span<const std::vector<float>>{}), UsageError);
}

TEST_CASE("gradient correlation") {
  std::mt19937_64 eng(5);
  for (int i = 0; i < 50; ++i) {
    auto a = oracle::random_values(eng, 257);
    auto neg = a;
    for (auto& v : neg) v = -v;
    CHECK(*gradient_correlation(a, a) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(*gradient_correlation(a, neg) == doctest::Approx(-1.0).epsilon(1e-6));
  }
  const std::vector<float> x{1, 0}, y{0, 1}, z{0, 0};
  CHECK(*gradient_correlation(x, y) == 0.0);
  CHECK_FALSE(gradient_correlation(x, z).has_value());
  CHECK_THROWS_AS(gradient_correlation(x, std::vector<float>{1}), UsageError);
}

TEST_CASE("sign consistency examples") {
  CHECK(sign_consistency(SignCounts{9, 0, 0}) == 1.0);
  CHECK(sign_consistency(SignCounts{5, 4, 0}) == 0.0);
  CHECK(sign_consistency(SignCounts{7, 2, 0}) == 0.5);
  CHECK(sign_consistency(std::vector<float>{-3.0f}) == 1.0);
  const std::vector<float> k{1, 1, 1, 1, 1, 1, 1, -1, -1};
  CHECK(sign_consistency(k) == doctest::Approx(oracle::consistency(k)));
}

TEST_CASE("sign consistency properties over random kernels") {
  std::mt19937_64 eng(17);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t t = 1 + eng() % 25;
    const auto k = random_kernel(eng, t);
    const double c = sign_consistency(k);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    CHECK(c == oracle::consistency(k));
    const auto counts = count_signs(k);
    if (counts.zero == 0 && t > 1) {
      const bool same = counts.positive == t || counts.negative == t;
      CHECK((c == 1.0) == same);
      if (t % 2 == 1) {
        const long diff = long(counts.positive) - long(counts.negative);
        CHECK((c == 0.0) == (std::labs(diff) <= 1));
      }
    }
  }
}

TEST_CASE("dominant sign ties are unpredictable") {
  CHECK(dominant_sign({3, 1, 5}) == 1);
  CHECK(dominant_sign({1, 3, 5}) == -1);
  CHECK(dominant_sign({2, 2, 5}) == 0);
  CHECK(dominant_sign({0, 0, 9}) == 0);
}

TEST_CASE("mini-batch kernel prediction") {
  PredictParams p;
  p.tau = 0.5;
  // kernel 0: consistency exactly 0.5 -> predicted positive
  // kernel 1: P=5,N=4 -> consistency 0 -> unpredicted
  // kernel 2: all zero -> unpredicted
  // kernel 3: all negative -> predicted negative
  std::vector<float> v{1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, 1, 1, 1, -1, -1, -1, -1,
                       0, 0, 0, 0, 0, 0, 0, 0,  0,  -2, -2, -2, -2, -2, -2, -2, -2, -2};
  const auto g = conv_tensor(v, 2, 2);
  const auto sp = predict_signs(g, {}, {}, p);
  REQUIRE(sp.bitmap.variant == SignBitmap::Variant::kernel_maps);
  CHECK(sp.bitmap.level1 == std::vector<bool>{true, false, false, true});
  CHECK(sp.bitmap.level2 == std::vector<bool>{true, false});
  for (int i = 0; i < 9; ++i) CHECK(sp.signs[i] == 1);
  for (int i = 9; i < 27; ++i) CHECK(sp.signs[i] == 0);
  for (int i = 27; i < 36; ++i) CHECK(sp.signs[i] == -1);
  CHECK(reconstruct_signs(sp.bitmap, {}, g.spec) == sp.signs);
}

TEST_CASE("mini-batch non-conv layers get no prediction") {
  GradientTensor g{LayerSpec{"fc", {4, 4}}, std::vector<float>(16, 1.0f)};
  const auto sp = predict_signs(g, {}, {}, PredictParams{});
  CHECK(sp.bitmap.variant == SignBitmap::Variant::none);
  CHECK(sp.signs == SignTensor(16, 0));
}

TEST_CASE("full-batch flip rule") {
  PredictParams p;
  p.full_batch = true;
  std::mt19937_64 eng(23);
  const auto cur = oracle::random_values(eng, 90);
  GradientTensor g{LayerSpec{"c", {10, 1, 3, 3}}, cur};
  std::vector<float> anti = cur;
  for (auto& v : anti) v = -v;
  const SignTensor prev_sign = signs_of(anti);

  const auto sp = predict_signs(g, prev_sign, anti, p);
  CHECK(sp.bitmap.variant == SignBitmap::Variant::flip_bit);
  CHECK(sp.bitmap.flip);
  for (std::size_t i = 0; i < cur.size(); ++i) CHECK(sp.signs[i] == -prev_sign[i]);
  CHECK(reconstruct_signs(sp.bitmap, prev_sign, g.spec) == sp.signs);

  CHECK(reconstruct_signs(SignBitmap::make_flip(false), prev_sign, g.spec) == prev_sign);
  // Zero-norm history counts as "no flip".
  const auto zero = predict_signs(g, SignTensor(90, 0), std::vector<float>(90, 0.0f), p);
  CHECK_FALSE(zero.bitmap.flip);
}

TEST_CASE("reconstruct_signs inverts predict_signs on random tensors") {
  std::mt19937_64 eng(29);
  for (int trial = 0; trial < 40; ++trial) {
    PredictParams p;
    p.full_batch = trial % 2 == 1;
    p.tau = (trial % 5) * 0.25;
    const std::uint32_t out = 1 + eng() % 8, in = 1 + eng() % 8;
    GradientTensor g{LayerSpec{"c", {out, in, 3, 3}}, oracle::random_values(eng, out * in * 9)};
    for (std::size_t i = 0; i < g.values.size(); i += 7) g.values[i] = 0.0f;
    const auto prev = oracle::random_values(eng, g.values.size());
    const auto prev_sign = signs_of(prev);
    const auto sp = predict_signs(g, prev_sign, prev, p);
    ByteWriter w;
    write_bitmap(w, sp.bitmap);
    ByteReader r(w.view());
    const SignBitmap wire = read_bitmap(r);
    CHECK(wire == sp.bitmap);
    CHECK(reconstruct_signs(wire, prev_sign, g.spec) == sp.signs);
  }
}

TEST_CASE("kernel bitmap with no predicted kernels") {
  SignBitmap b;
  b.variant = SignBitmap::Variant::kernel_maps;
  b.kernel_count = 4;
  b.level1.assign(4, false);
  CHECK(reconstruct_signs(b, {}, LayerSpec{"c", {2, 2, 3, 3}}) == SignTensor(36, 0));
}

TEST_CASE("bitmap serialized size is exact") {
  std::mt19937_64 eng(31);
  for (int i = 0; i < 30; ++i) {
    SignBitmap b;
    b.variant = SignBitmap::Variant::kernel_maps;
    b.kernel_count = 1 + eng() % 500;
    for (std::size_t k = 0; k < b.kernel_count; ++k) {
      b.level1.push_back(eng() % 3 != 0);
      if (b.level1.back()) b.level2.push_back(eng() % 2);
    }
    ByteWriter w;
    write_bitmap(w, b);
    CHECK(b.payload_bits() == b.kernel_count + b.predicted_kernels());
    CHECK(w.size() == 1 + 4 + (b.kernel_count + 7) / 8 + (b.predicted_kernels() + 7) / 8);
    CHECK(w.size() == serialized_size(b));
  }
}

TEST_CASE("bitmap integrity checks") {
  SignBitmap b;
  b.variant = SignBitmap::Variant::kernel_maps;
  b.kernel_count = 3;
  b.level1 = {true, false, true};
  b.level2 = {true, false};
  CHECK_NOTHROW(check_consistent(b, LayerSpec{"c", {3, 1, 2, 2}}));
  CHECK_THROWS_AS(check_consistent(b, LayerSpec{"c", {4, 1, 2, 2}}), IntegrityError);
  CHECK_THROWS_AS(check_consistent(b, LayerSpec{"fc", {12}}), IntegrityError);
  ByteWriter w;
  write_bitmap(w, b);
  Bytes bytes = w.take();
  bytes.pop_back();
  ByteReader r(bytes);
  CHECK_THROWS_AS(read_bitmap(r), IntegrityError);
  Bytes bad{9};
  ByteReader r2(bad);
  CHECK_THROWS_AS(read_bitmap(r2), IntegrityError);
}

TEST_CASE("bitmap overhead formula") {
  CHECK(bitmap_overhead_ratio(0.6, 32, 9, 1.2) == doctest::Approx(0.0046296296));
  CHECK(bitmap_overhead_ratio(0.0, 1, 1, 1.0) == 1.0);
  CHECK(bitmap_overhead_ratio(1.0, 32, 9, 1.0) == doctest::Approx(2.0 / 288.0));
}

TEST_CASE("normalized EMA beats Lorenzo on a persistent synthetic trace") {
  SynthConfig cfg;
  cfg.layers = {parse_layer_spec("c:64x32x3x3")};
  cfg.rounds = 12;
  const auto t = synth_trace(cfg);
  PredictParams p;
  MagPredictorState s = MagPredictorState::zeros(t.layers[0].element_count());
  double mse_ema = 0, mse_lorenzo = 0;
  std::vector<std::vector<float>> history;
  for (std::size_t r = 0; r < t.rounds.size(); ++r) {
    std::vector<float> a(t.rounds[r][0].values.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::fabs(t.rounds[r][0].values[i]);
    const AbsStats st = abs_stats(a);
    if (!history.empty()) {
      const auto ema = predict_magnitude(history.back(), float(st.mean), float(st.std), s, p);
      s = ema.state;
      const auto lor = baseline_predict(BaselineKind::lorenzo, history);
      for (std::size_t i = 0; i < a.size(); ++i) {
        mse_ema += std::pow(ema.pred_abs[i] - a[i], 2);
        mse_lorenzo += std::pow(lor[i] - a[i], 2);
      }
    }
    history.push_back(a);
  }
  CHECK(mse_ema < mse_lorenzo);
}
