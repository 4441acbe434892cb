#include "gebc/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gebc {

void validate(const PredictParams& params) {
  if (!(params.beta > 0.0 && params.beta <= 1.0)) throw UsageError("beta must lie in (0, 1]");
  // tau above 1 is allowed: it disables kernel prediction entirely.
  if (!(params.tau >= 0.0)) throw UsageError("tau must be nonnegative");
  if (!(params.sigma_floor > 0.0)) throw UsageError("sigma_floor must be positive");
}

MagnitudePrediction predict_magnitude(std::span<const float> prev_recon_abs, float mu_curr,
                                      float sigma_curr, const MagPredictorState& state,
                                      const PredictParams& params) {
  const std::size_t n = prev_recon_abs.size();
  if (state.memory.size() != n) {
    throw UsageError("magnitude state holds " + std::to_string(state.memory.size()) +
                     " entries for a layer of " + std::to_string(n));
  }
  const AbsStats prev = abs_stats(prev_recon_abs);
  const double sd_prev = std::max(prev.std, params.sigma_floor);
  const double sd_curr = std::max(static_cast<double>(sigma_curr), 0.0);
  const double mu = mu_curr;
  const double beta = params.beta;

  MagnitudePrediction out;
  out.pred_abs.resize(n);
  out.state.memory.resize(n);
  out.state.initialized = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double z_prev = (std::fabs(static_cast<double>(prev_recon_abs[i])) - prev.mean) / sd_prev;
    const double z_pred = (1.0 - beta) * state.memory[i] + beta * z_prev;
    out.pred_abs[i] = static_cast<float>(std::max(z_pred * sd_curr + mu, 0.0));
    out.state.memory[i] = static_cast<float>(z_pred);
  }
  return out;
}

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::lorenzo: return "lorenzo";
    case BaselineKind::ma3: return "ma3";
    case BaselineKind::ma5: return "ma5";
    case BaselineKind::ar1: return "ar1";
    case BaselineKind::ema_nonorm: return "ema_nonorm";
  }
  return "?";
}

std::size_t min_history(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::ma3: return 3;
    case BaselineKind::ma5: return 5;
    default: return 1;
  }
}

std::vector<float> baseline_predict(BaselineKind kind, std::span<const std::vector<float>> history,
                                    double beta) {
  if (history.size() < min_history(kind)) {
    throw UsageError(std::string(to_string(kind)) + " needs at least " +
                     std::to_string(min_history(kind)) + " history arrays");
  }
  const std::size_t n = history.back().size();
  for (const auto& h : history) {
    if (h.size() != n) throw UsageError("history arrays differ in length");
  }
  std::vector<float> out(n);
  switch (kind) {
    case BaselineKind::lorenzo: out = history.back(); break;
    case BaselineKind::ma3:
    case BaselineKind::ma5: {
      const std::size_t w = min_history(kind);
      const auto window = history.last(w);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& h : window) s += h[i];
        out[i] = static_cast<float>(s / static_cast<double>(w));
      }
      break;
    }
    case BaselineKind::ar1: {
      double num = 0.0, den = 0.0;
      for (std::size_t t = 1; t < history.size(); ++t) {
        for (std::size_t i = 0; i < n; ++i) {
          num += static_cast<double>(history[t - 1][i]) * history[t][i];
          den += static_cast<double>(history[t - 1][i]) * history[t - 1][i];
        }
      }
      const double phi = den > 0.0 ? num / den : 1.0;
      for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(phi * history.back()[i]);
      break;
    }
    case BaselineKind::ema_nonorm: {
      std::vector<double> m(n, 0.0);
      for (const auto& h : history) {
        for (std::size_t i = 0; i < n; ++i) m[i] = (1.0 - beta) * m[i] + beta * h[i];
      }
      for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(m[i]);
      break;
    }
  }
  return out;
}

std::optional<double> gradient_correlation(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw UsageError("correlation of arrays with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

SignCounts count_signs(std::span<const float> kernel) {
  SignCounts c;
  for (float v : kernel) {
    if (v > 0.0f) ++c.positive;
    else if (v < 0.0f) ++c.negative;
    else ++c.zero;
  }
  return c;
}

double sign_consistency(const SignCounts& counts) {
  const std::size_t t = counts.total();
  if (t <= 1) return 1.0;
  const std::size_t half = (t + 1) / 2;
  const double num = static_cast<double>(std::max(counts.positive, counts.negative) + counts.zero) -
                     static_cast<double>(half);
  return std::clamp(num / static_cast<double>(t - half), 0.0, 1.0);
}

double sign_consistency(std::span<const float> kernel) { return sign_consistency(count_signs(kernel)); }

int dominant_sign(const SignCounts& counts) {
  if (counts.positive > counts.negative) return 1;
  if (counts.negative > counts.positive) return -1;
  return 0;
}

SignTensor signs_of(std::span<const float> values) {
  SignTensor s(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) s[i] = static_cast<std::int8_t>((values[i] > 0.0f) - (values[i] < 0.0f));
  return s;
}

SignPrediction predict_signs(const GradientTensor& g_curr, std::span<const std::int8_t> prev_sign,
                             std::span<const float> prev_recon, const PredictParams& params) {
  const LayerSpec& spec = g_curr.spec;
  const std::size_t n = g_curr.values.size();
  if (n != spec.element_count()) throw UsageError("tensor does not match its layer spec");

  SignPrediction out;
  out.signs.assign(n, 0);

  if (params.full_batch) {
    if (prev_sign.size() != n || prev_recon.size() != n) {
      throw UsageError("full-batch sign prediction needs previous signs and reconstruction");
    }
    const double c = gradient_correlation(prev_recon, g_curr.values).value_or(1.0);
    const bool flip = c < 0.0;
    for (std::size_t i = 0; i < n; ++i) out.signs[i] = static_cast<std::int8_t>(flip ? -prev_sign[i] : prev_sign[i]);
    out.bitmap = SignBitmap::make_flip(flip);
    return out;
  }

  if (spec.kind() != LayerKind::conv4d) return out;

  const std::size_t kernels = spec.kernel_count();
  const std::size_t ksize = spec.kernel_size();
  SignBitmap& bm = out.bitmap;
  bm.variant = SignBitmap::Variant::kernel_maps;
  bm.kernel_count = kernels;
  bm.level1.assign(kernels, false);
  const std::span<const float> values(g_curr.values);
  for (std::size_t k = 0; k < kernels; ++k) {
    const auto kernel = values.subspan(k * ksize, ksize);
    const SignCounts counts = count_signs(kernel);
    const int dom = dominant_sign(counts);
    if (dom == 0 || sign_consistency(counts) < params.tau) continue;
    bm.level1[k] = true;
    bm.level2.push_back(dom > 0);
    std::fill_n(out.signs.begin() + static_cast<std::ptrdiff_t>(k * ksize), ksize, static_cast<std::int8_t>(dom));
  }
  return out;
}

SignTensor reconstruct_signs(const SignBitmap& bitmap, std::span<const std::int8_t> prev_sign,
                             const LayerSpec& spec) {
  const std::size_t n = spec.element_count();
  SignTensor out(n, 0);
  switch (bitmap.variant) {
    case SignBitmap::Variant::none: break;
    case SignBitmap::Variant::flip_bit:
      if (prev_sign.size() != n) throw IntegrityError("previous sign tensor does not match layer");
      for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::int8_t>(bitmap.flip ? -prev_sign[i] : prev_sign[i]);
      break;
    case SignBitmap::Variant::kernel_maps: {
      check_consistent(bitmap, spec);
      const std::size_t ksize = spec.kernel_size();
      std::size_t next = 0;
      for (std::size_t k = 0; k < bitmap.kernel_count; ++k) {
        if (!bitmap.level1[k]) continue;
        const std::int8_t s = bitmap.level2[next++] ? 1 : -1;
        std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(k * ksize), ksize, s);
      }
      break;
    }
  }
  return out;
}

double bitmap_overhead_ratio(double prediction_ratio, unsigned bits_per_value, std::size_t kernel_size,
                             double lossless_ratio) {
  return (1.0 + prediction_ratio) /
         (static_cast<double>(bits_per_value) * static_cast<double>(kernel_size) * lossless_ratio);
}

}  // namespace gebc
