#pragma once

// Magnitude and sign predictors for gradient tensors.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gebc/bitmap.hpp"
#include "gebc/trace.hpp"

namespace gebc {

struct PredictParams {
  double beta = 0.5;  // EMA weight on the newest normalized magnitudes, (0, 1]
  double tau = 0.5;   // kernel sign-consistency threshold, inclusive
  bool full_batch = false;
  double sigma_floor = 1e-12;
};

void validate(const PredictParams& params);

// EMA memory in normalized space, one entry per layer element. Starts at
// zero and is only ever touched by predict_magnitude.
struct MagPredictorState {
  std::vector<float> memory;
  bool initialized = false;

  static MagPredictorState zeros(std::size_t n) { return {std::vector<float>(n, 0.0f), false}; }
};

struct MagnitudePrediction {
  std::vector<float> pred_abs;
  MagPredictorState state;
};

// Normalizes the previous reconstructed magnitudes by their own mean/std,
// blends them into the EMA memory and de-normalizes with the current
// round's statistics. Output is clamped at zero; the memory keeps the
// unclamped normalized prediction.
MagnitudePrediction predict_magnitude(std::span<const float> prev_recon_abs, float mu_curr,
                                      float sigma_curr, const MagPredictorState& state,
                                      const PredictParams& params);

// Reference predictors for magnitude ablations.
enum class BaselineKind { lorenzo, ma3, ma5, ar1, ema_nonorm };

const char* to_string(BaselineKind kind);
std::size_t min_history(BaselineKind kind);

// `history` is ordered oldest to newest. ar1 fits one lag-1 coefficient by
// least squares over consecutive pairs in the history (1 when only one
// array is available); ema_nonorm runs the EMA from zero memory over the
// whole history without normalization.
std::vector<float> baseline_predict(BaselineKind kind, std::span<const std::vector<float>> history,
                                    double beta = 0.5);

// Cosine similarity of two gradients; nullopt when either has zero norm.
std::optional<double> gradient_correlation(std::span<const float> a, std::span<const float> b);

struct SignCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t zero = 0;

  std::size_t total() const { return positive + negative + zero; }
};

SignCounts count_signs(std::span<const float> kernel);

// (max(P,N) + Z - ceil(T/2)) / (T - ceil(T/2)), clamped to [0, 1]; 1 for T = 1.
double sign_consistency(const SignCounts& counts);
double sign_consistency(std::span<const float> kernel);

// +1 or -1 for the majority sign among nonzero elements, 0 on a tie
// (including all-zero kernels).
int dominant_sign(const SignCounts& counts);

using SignTensor = std::vector<std::int8_t>;

SignTensor signs_of(std::span<const float> values);

struct SignPrediction {
  SignTensor signs;  // 0 = no prediction
  SignBitmap bitmap;
};

// Full-batch: negate or keep prev_sign according to the correlation of
// prev_recon with the current gradient (zero norm counts as "keep").
// Mini-batch conv4d: kernels with consistency >= tau get their dominant sign.
// Mini-batch other layers: no prediction.
SignPrediction predict_signs(const GradientTensor& g_curr, std::span<const std::int8_t> prev_sign,
                             std::span<const float> prev_recon, const PredictParams& params);

// Server-side inverse of predict_signs' encoding.
SignTensor reconstruct_signs(const SignBitmap& bitmap, std::span<const std::int8_t> prev_sign,
                             const LayerSpec& spec);

// Size of a kernel bitmap relative to the original tensor:
// (1 + P) / (bits_per_value * kernel_size * lossless_ratio).
double bitmap_overhead_ratio(double prediction_ratio, unsigned bits_per_value, std::size_t kernel_size,
                             double lossless_ratio);

}  // namespace gebc
