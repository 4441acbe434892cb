#include <cmath>
#include <random>
#include <string>

#include "gebc/predictor.hpp"
#include "gebc/trace.hpp"

namespace gebc {
namespace {

// Portable conversions on top of mt19937_64; the std distributions are
// implementation-defined and would make traces differ across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }  // [0, 1)
  double symmetric() { return 2.0 * uniform() - 1.0; }                           // [-1, 1)
  double exponential() { return -std::log1p(-uniform()); }                      // mean 1
  bool coin(double p) { return uniform() < p; }
  int sign() { return (eng_() >> 63) ? 1 : -1; }

 private:
  std::mt19937_64 eng_;
};

double expected_consistency(double q, std::size_t t) {
  // Sum over the number of elements that kept the dominant sign.
  double e = 0.0;
  for (std::size_t kept = 0; kept <= t; ++kept) {
    const double logp = std::lgamma(double(t) + 1) - std::lgamma(double(kept) + 1) -
                        std::lgamma(double(t - kept) + 1) +
                        (kept ? double(kept) * std::log1p(-q) : 0.0) +
                        (t - kept ? double(t - kept) * std::log(q) : 0.0);
    const SignCounts c{kept, t - kept, 0};
    e += std::exp(logp) * sign_consistency(c);
  }
  return e;
}

// Per-layer sign pattern: kernels share a dominant sign with flips,
// non-convolutional layers get independent signs.
void draw_signs(Rng& rng, const LayerSpec& spec, double flip_q, std::vector<std::int8_t>& out) {
  out.resize(spec.element_count());
  if (spec.kind() != LayerKind::conv4d) {
    for (auto& s : out) s = static_cast<std::int8_t>(rng.sign());
    return;
  }
  const std::size_t ksize = spec.kernel_size();
  for (std::size_t k = 0; k < spec.kernel_count(); ++k) {
    const int dom = rng.sign();
    for (std::size_t j = 0; j < ksize; ++j) {
      out[k * ksize + j] = static_cast<std::int8_t>(rng.coin(flip_q) ? -dom : dom);
    }
  }
}

}  // namespace

double flip_probability_for(double target, std::size_t kernel_size) {
  if (kernel_size <= 1 || target >= 1.0) return 0.0;
  if (expected_consistency(0.5, kernel_size) >= target) return 0.5;
  double lo = 0.0, hi = 0.5;  // expected consistency decreases in q on [0, 0.5]
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_consistency(mid, kernel_size) > target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

void validate(const SynthConfig& cfg) {
  if (cfg.layers.empty()) throw UsageError("synthetic trace needs at least one layer");
  for (const auto& l : cfg.layers) validate(l);
  if (cfg.rounds < 1) throw UsageError("synthetic trace needs at least one round");
  if (!(cfg.magnitude_decay > 0.0 && cfg.magnitude_decay <= 1.0)) throw UsageError("magnitude_decay must lie in (0, 1]");
  if (!(cfg.noise_level >= 0.0)) throw UsageError("noise_level must be nonnegative");
  if (!(cfg.target_sign_consistency >= 0.0 && cfg.target_sign_consistency <= 1.0)) {
    throw UsageError("target_sign_consistency must lie in [0, 1]");
  }
  if (cfg.oscillation_period < 1) throw UsageError("oscillation_period must be positive");
  if (!(cfg.scale > 0.0) || !std::isfinite(cfg.scale)) throw UsageError("scale must be positive");
  if (!(cfg.persistence >= 0.0 && cfg.persistence < 1.0)) throw UsageError("persistence must lie in [0, 1)");
}

GradientTrace synth_trace(const SynthConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const std::size_t nlayers = cfg.layers.size();

  GradientTrace trace;
  trace.mode = cfg.mode;
  trace.layers = cfg.layers;
  trace.rounds.resize(cfg.rounds);

  std::vector<double> flip_q(nlayers, 0.5);
  std::vector<std::vector<double>> base(nlayers), factor(nlayers);
  std::vector<std::vector<std::int8_t>> direction(nlayers);
  for (std::size_t l = 0; l < nlayers; ++l) {
    const auto& spec = cfg.layers[l];
    if (spec.kind() == LayerKind::conv4d) {
      flip_q[l] = flip_probability_for(cfg.target_sign_consistency, spec.kernel_size());
    }
    base[l].resize(spec.element_count());
    for (auto& b : base[l]) b = rng.exponential();
    factor[l] = base[l];
    if (cfg.mode == TraceMode::full_batch) draw_signs(rng, spec, flip_q[l], direction[l]);
  }

  const double rho = cfg.persistence;
  std::vector<std::int8_t> signs;
  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    const double envelope = cfg.scale * std::pow(cfg.magnitude_decay, static_cast<double>(t));
    const bool negate = cfg.mode == TraceMode::full_batch && (t / cfg.oscillation_period) % 2 == 1;
    auto& round = trace.rounds[t];
    round.reserve(nlayers);
    for (std::size_t l = 0; l < nlayers; ++l) {
      const auto& spec = cfg.layers[l];
      auto& f = factor[l];
      if (t > 0) {
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = rho * f[i] + (1.0 - rho) * base[l][i] * rng.exponential();
      }
      if (cfg.mode == TraceMode::full_batch) signs = direction[l];
      else draw_signs(rng, spec, flip_q[l], signs);

      GradientTensor g{spec, std::vector<float>(f.size())};
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double mag = envelope * f[i] * std::fabs(1.0 + cfg.noise_level * rng.symmetric());
        const double s = negate ? -signs[i] : signs[i];
        g.values[i] = static_cast<float>(s * mag);
      }
      round.push_back(std::move(g));
    }
  }
  return trace;
}

}  // namespace gebc
