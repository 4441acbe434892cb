#include "gebc/codec/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace gebc {

void validate(const ErrorBoundConfig& cfg) {
  if (!(cfg.value > 0.0) || !std::isfinite(cfg.value)) throw UsageError("error bound must be positive and finite");
}

double resolve_bound(const ErrorBoundConfig& cfg, std::span<const float> original) {
  validate(cfg);
  if (cfg.mode == BoundMode::absolute) return cfg.value;
  if (original.empty()) return kMinDelta;
  const auto [lo, hi] = std::minmax_element(original.begin(), original.end());
  const double range = static_cast<double>(*hi) - static_cast<double>(*lo);
  return std::max(cfg.value * range, kMinDelta);
}

QuantizedStream quantize(std::span<const float> values, std::span<const float> predictions, double delta,
                         std::int32_t bin_cap) {
  if (!(delta > 0.0)) throw UsageError("quantizer needs a positive error bound");
  if (bin_cap < 1) throw UsageError("bin cap must be positive");
  if (!predictions.empty() && predictions.size() != values.size()) {
    throw UsageError("prediction length differs from value length");
  }
  const std::size_t n = values.size();
  const double width = 2.0 * delta;
  QuantizedStream q;
  q.bin_cap = bin_cap;
  q.bins.assign(n, 0);
  q.literal_mask.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = predictions.empty() ? 0.0 : static_cast<double>(predictions[i]);
    const double v = values[i];
    const double bin = std::nearbyint((v - pred) / width);  // FE_TONEAREST: ties to even
    bool literal = !(std::fabs(bin) <= static_cast<double>(bin_cap));
    if (!literal) {
      // The decoder rebuilds a float; make sure rounding keeps the bound.
      const float recon = static_cast<float>(pred + bin * width);
      literal = !(std::fabs(static_cast<double>(recon) - v) <= delta);
    }
    if (literal) {
      q.literal_mask[i] = true;
      q.literals.push_back(values[i]);
    } else {
      q.bins[i] = static_cast<std::int32_t>(bin);
    }
  }
  return q;
}

QuantizedStream quantize(std::span<const float> residuals, double delta, std::int32_t bin_cap) {
  return quantize(residuals, {}, delta, bin_cap);
}

std::vector<float> dequantize(const QuantizedStream& stream, std::span<const float> predictions, double delta) {
  const std::size_t n = stream.bins.size();
  if (stream.literal_mask.size() != n) throw IntegrityError("literal mask length differs from bin count");
  if (!predictions.empty() && predictions.size() != n) throw IntegrityError("prediction length differs from bin count");
  const double width = 2.0 * delta;
  std::vector<float> out(n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (stream.literal_mask[i]) {
      if (next >= stream.literals.size()) throw IntegrityError("literal section shorter than its mask");
      out[i] = stream.literals[next++];
      continue;
    }
    const std::int32_t b = stream.bins[i];
    if (b > stream.bin_cap || b < -stream.bin_cap) throw IntegrityError("bin index exceeds cap");
    const double pred = predictions.empty() ? 0.0 : static_cast<double>(predictions[i]);
    out[i] = static_cast<float>(pred + static_cast<double>(b) * width);
  }
  if (next != stream.literals.size()) throw IntegrityError("literal section longer than its mask");
  return out;
}

std::vector<float> dequantize(const QuantizedStream& stream, double delta) { return dequantize(stream, {}, delta); }

void write_literals(ByteWriter& out, const QuantizedStream& stream) {
  out.u32(static_cast<std::uint32_t>(stream.literals.size()));
  if (stream.literals.empty()) return;
  out.bytes(pack_bits(stream.literal_mask));
  out.f32_array(stream.literals);
}

void read_literals(ByteReader& in, QuantizedStream& stream) {
  const std::size_t n = stream.bins.size();
  const std::uint32_t count = in.u32();
  if (count > n) throw IntegrityError("more literals than elements");
  if (count == 0) {
    stream.literal_mask.assign(n, false);
    stream.literals.clear();
    return;
  }
  stream.literal_mask = unpack_bits(in.bytes(packed_size(n)), n);
  if (static_cast<std::size_t>(std::count(stream.literal_mask.begin(), stream.literal_mask.end(), true)) != count) {
    throw IntegrityError("literal mask popcount differs from literal count");
  }
  stream.literals = in.f32_array(count);
  for (std::size_t i = 0; i < n; ++i) {
    if (stream.literal_mask[i] && stream.bins[i] != 0) throw IntegrityError("literal position carries a bin");
  }
}

double shannon_entropy(std::span<const std::int32_t> symbols) {
  if (symbols.empty()) return 0.0;
  std::unordered_map<std::int32_t, std::size_t> hist;
  for (auto s : symbols) ++hist[s];
  const double n = static_cast<double>(symbols.size());
  double h = 0.0;
  for (const auto& [sym, c] : hist) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace gebc
