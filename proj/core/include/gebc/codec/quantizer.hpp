#pragma once

// Error-bounded linear quantizer: bin = nearest-integer(residual / 2Δ),
// ties to even. Elements whose bin exceeds the cap, or whose float
// reconstruction would miss the bound, are stored as exact literals.

#include <cstdint>
#include <span>
#include <vector>

#include "gebc/bytes.hpp"

namespace gebc {

enum class BoundMode : std::uint8_t { absolute, relative };

struct ErrorBoundConfig {
  BoundMode mode = BoundMode::relative;
  double value = 1e-2;  // Δ for absolute, ε for relative
};

void validate(const ErrorBoundConfig& cfg);

inline constexpr double kMinDelta = 1e-30;
inline constexpr std::int32_t kDefaultBinCap = 1 << 15;

// Absolute Δ for one tensor. Relative mode scales by the value range of the
// original tensor and floors at kMinDelta.
double resolve_bound(const ErrorBoundConfig& cfg, std::span<const float> original);

struct QuantizedStream {
  std::vector<std::int32_t> bins;  // 0 at literal positions
  std::vector<bool> literal_mask;
  std::vector<float> literals;     // exact values, in element order
  std::int32_t bin_cap = kDefaultBinCap;

  std::size_t size() const { return bins.size(); }
};

// Quantizes values - predictions. Literals hold the original value, so the
// reconstruction of a literal element is exact.
QuantizedStream quantize(std::span<const float> values, std::span<const float> predictions, double delta,
                         std::int32_t bin_cap = kDefaultBinCap);
// Prediction-free form: quantizes the residuals themselves.
QuantizedStream quantize(std::span<const float> residuals, double delta,
                         std::int32_t bin_cap = kDefaultBinCap);

// Inverse of quantize(values, predictions, ...): literal elements take the
// literal, the rest float(prediction + bin * 2Δ).
std::vector<float> dequantize(const QuantizedStream& stream, std::span<const float> predictions, double delta);
std::vector<float> dequantize(const QuantizedStream& stream, double delta);

// Literal section: u32 count, packed literal mask (omitted when the count
// is zero), raw 32-bit values. The mask length is the number of bins.
void write_literals(ByteWriter& out, const QuantizedStream& stream);
void read_literals(ByteReader& in, QuantizedStream& stream);

// Empirical Shannon entropy of a symbol array in bits per symbol.
double shannon_entropy(std::span<const std::int32_t> symbols);

}  // namespace gebc
