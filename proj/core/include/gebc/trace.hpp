#pragma once

// Gradient tensors, per-round traces, the GTRC trace file format and a
// synthetic trace generator.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gebc/bytes.hpp"

namespace gebc {

enum class LayerKind : std::uint8_t { conv4d, other };

// Shape of one model layer. A 4-axis shape is a convolution weight laid out
// as [out_channels, in_channels, kh, kw]; every other rank is `other`.
struct LayerSpec {
  std::string name;
  std::vector<std::uint32_t> shape;

  LayerKind kind() const { return shape.size() == 4 ? LayerKind::conv4d : LayerKind::other; }
  std::size_t element_count() const;
  // Number of (out, in) kernels; zero for non-convolutional layers.
  std::size_t kernel_count() const;
  // Elements per kernel (kh * kw); zero for non-convolutional layers.
  std::size_t kernel_size() const;

  bool operator==(const LayerSpec&) const = default;
};

// Throws UsageError when a layer spec breaks its invariants (1-4 positive axes).
void validate(const LayerSpec& spec);

// Parses "name:64x32x3x3".
LayerSpec parse_layer_spec(std::string_view text);
std::string format_shape(const LayerSpec& spec);

struct GradientTensor {
  LayerSpec spec;
  std::vector<float> values;  // row-major
};

bool bitwise_equal(std::span<const float> a, std::span<const float> b);
bool bitwise_equal(const GradientTensor& a, const GradientTensor& b);

enum class TraceMode : std::uint8_t { mini_batch = 0, full_batch = 1 };

struct GradientTrace {
  TraceMode mode = TraceMode::mini_batch;
  std::vector<LayerSpec> layers;
  std::vector<std::vector<GradientTensor>> rounds;  // rounds[t][layer]
};

bool bitwise_equal(const GradientTrace& a, const GradientTrace& b);

// Checks shape agreement and finiteness. Mismatches raise IntegrityError,
// NaN/Inf raises DataError, an empty layer or round list raises FormatError.
void validate(const GradientTrace& trace);
void check_finite(std::span<const float> values, std::string_view what);

// Layer table shared by the trace file, the payload stream file and the layer
// digest: u32 count, then per layer u16 name length, name, u8 axis count,
// u32 axes.
void write_layer_table(ByteWriter& out, std::span<const LayerSpec> layers);
std::vector<LayerSpec> read_layer_table(ByteReader& in);
std::uint64_t spec_digest(std::span<const LayerSpec> layers);

inline constexpr char kTraceMagic[] = "GTRC";
inline constexpr std::uint16_t kTraceVersion = 1;

Bytes encode_trace(const GradientTrace& trace);
GradientTrace decode_trace(ByteView data);
GradientTrace load_trace(const std::filesystem::path& path);
void save_trace(const GradientTrace& trace, const std::filesystem::path& path);

struct AbsStats {
  double mean = 0.0;
  double std = 0.0;  // population form
};

// Mean and population standard deviation of |values|.
AbsStats abs_stats(std::span<const float> values);

struct SynthConfig {
  std::uint64_t seed = 1;
  std::vector<LayerSpec> layers;
  std::size_t rounds = 10;
  TraceMode mode = TraceMode::mini_batch;
  double magnitude_decay = 0.99;          // (0, 1]
  double noise_level = 0.3;               // >= 0
  double target_sign_consistency = 0.8;   // [0, 1]
  std::size_t oscillation_period = 1;     // full-batch only
  double scale = 1e-3;                    // mean |g| at round 1
  double persistence = 0.8;               // per-element magnitude EMA factor, [0, 1)
};

void validate(const SynthConfig& cfg);

// Deterministic in cfg. Magnitudes follow a decaying envelope times a
// per-element persistent factor times multiplicative noise; kernels of
// conv4d layers share a dominant sign with calibrated per-element flips.
// In full-batch mode the direction is fixed and negated every
// `oscillation_period` rounds.
GradientTrace synth_trace(const SynthConfig& cfg);

// Per-element flip probability q in [0, 0.5] whose expected kernel sign
// consistency over `kernel_size` elements equals `target` (q = 0.5 when the
// target is below the consistency of random signs).
double flip_probability_for(double target, std::size_t kernel_size);

}  // namespace gebc
