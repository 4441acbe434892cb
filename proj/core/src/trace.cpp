#include "gebc/trace.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace gebc {

std::size_t LayerSpec::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

std::size_t LayerSpec::kernel_count() const {
  return kind() == LayerKind::conv4d ? std::size_t{shape[0]} * shape[1] : 0;
}

std::size_t LayerSpec::kernel_size() const {
  return kind() == LayerKind::conv4d ? std::size_t{shape[2]} * shape[3] : 0;
}

void validate(const LayerSpec& spec) {
  if (spec.shape.empty() || spec.shape.size() > 4) {
    throw UsageError("layer '" + spec.name + "' must have 1-4 axes");
  }
  for (auto d : spec.shape) {
    if (d == 0) throw UsageError("layer '" + spec.name + "' has a zero dimension");
  }
  if (spec.name.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw UsageError("layer name too long");
  }
}

LayerSpec parse_layer_spec(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw UsageError("layer spec must look like name:DxDx..., got '" + std::string(text) + "'");
  }
  LayerSpec spec{std::string(text.substr(0, colon)), {}};
  std::string_view dims = text.substr(colon + 1);
  while (!dims.empty()) {
    const auto x = dims.find('x');
    const std::string tok(dims.substr(0, x));
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(tok, &used);
      if (used != tok.size() || v > std::numeric_limits<std::uint32_t>::max()) throw std::out_of_range(tok);
      spec.shape.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::logic_error&) {
      throw UsageError("bad dimension '" + tok + "' in layer spec");
    }
    if (x == std::string_view::npos) break;
    dims.remove_prefix(x + 1);
  }
  validate(spec);
  return spec;
}

std::string format_shape(const LayerSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(spec.shape[i]);
  }
  return out;
}

bool bitwise_equal(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

bool bitwise_equal(const GradientTensor& a, const GradientTensor& b) {
  return a.spec == b.spec && bitwise_equal(a.values, b.values);
}

bool bitwise_equal(const GradientTrace& a, const GradientTrace& b) {
  if (a.mode != b.mode || a.layers != b.layers || a.rounds.size() != b.rounds.size()) return false;
  for (std::size_t t = 0; t < a.rounds.size(); ++t) {
    if (a.rounds[t].size() != b.rounds[t].size()) return false;
    for (std::size_t l = 0; l < a.rounds[t].size(); ++l) {
      if (!bitwise_equal(a.rounds[t][l], b.rounds[t][l])) return false;
    }
  }
  return true;
}

void check_finite(std::span<const float> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataError("non-finite value at index " + std::to_string(i) + " in " + std::string(what));
    }
  }
}

void validate(const GradientTrace& trace) {
  if (trace.layers.empty()) throw FormatError("trace has no layers");
  if (trace.rounds.empty()) throw FormatError("trace has no rounds");
  for (const auto& spec : trace.layers) validate(spec);
  for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
    const auto& round = trace.rounds[t];
    if (round.size() != trace.layers.size()) {
      throw IntegrityError("round " + std::to_string(t + 1) + " has " + std::to_string(round.size()) +
                           " tensors for " + std::to_string(trace.layers.size()) + " layers");
    }
    for (std::size_t l = 0; l < round.size(); ++l) {
      if (round[l].spec != trace.layers[l] || round[l].values.size() != trace.layers[l].element_count()) {
        throw IntegrityError("round " + std::to_string(t + 1) + " layer '" + trace.layers[l].name +
                             "' does not match its declared shape");
      }
      check_finite(round[l].values, trace.layers[l].name);
    }
  }
}

void write_layer_table(ByteWriter& out, std::span<const LayerSpec> layers) {
  out.u32(static_cast<std::uint32_t>(layers.size()));
  for (const auto& spec : layers) {
    out.u16(static_cast<std::uint16_t>(spec.name.size()));
    out.tag(spec.name);
    out.u8(static_cast<std::uint8_t>(spec.shape.size()));
    for (auto d : spec.shape) out.u32(d);
  }
}

std::vector<LayerSpec> read_layer_table(ByteReader& in) {
  const std::uint32_t count = in.u32();
  if (count == 0) throw FormatError("layer table is empty");
  // Each entry needs at least 7 bytes; reject absurd counts before allocating.
  if (count > in.remaining() / 7) throw FormatError("layer count exceeds available data");
  std::vector<LayerSpec> layers;
  layers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerSpec spec;
    spec.name = in.string(in.u16());
    const std::uint8_t axes = in.u8();
    if (axes == 0 || axes > 4) throw FormatError("layer '" + spec.name + "' has invalid axis count");
    for (std::uint8_t a = 0; a < axes; ++a) {
      spec.shape.push_back(in.u32());
      if (spec.shape.back() == 0) throw FormatError("layer '" + spec.name + "' has a zero dimension");
    }
    layers.push_back(std::move(spec));
  }
  return layers;
}

std::uint64_t spec_digest(std::span<const LayerSpec> layers) {
  ByteWriter w;
  write_layer_table(w, layers);
  return fnv1a64(w.view());
}

Bytes encode_trace(const GradientTrace& trace) {
  validate(trace);
  ByteWriter w;
  w.tag(kTraceMagic);
  w.u16(kTraceVersion);
  w.u8(static_cast<std::uint8_t>(trace.mode));
  write_layer_table(w, trace.layers);
  w.u32(static_cast<std::uint32_t>(trace.rounds.size()));
  for (const auto& round : trace.rounds) {
    for (const auto& tensor : round) w.f32_array(tensor.values);
  }
  return w.take();
}

GradientTrace decode_trace(ByteView data) {
  ByteReader in(data, ErrorKind::format);
  in.expect_tag(kTraceMagic, "gradient trace");
  const std::uint16_t version = in.u16();
  if (version != kTraceVersion) {
    throw UnsupportedVersionError("unsupported trace version " + std::to_string(version), version);
  }
  GradientTrace trace;
  const std::uint8_t mode = in.u8();
  if (mode > 1) throw FormatError("unknown trace mode " + std::to_string(mode));
  trace.mode = static_cast<TraceMode>(mode);
  trace.layers = read_layer_table(in);
  const std::uint32_t rounds = in.u32();
  if (rounds == 0) throw FormatError("trace has no rounds");

  // Header parsed; from here a short or long payload is a count mismatch.
  in.set_truncation_kind(ErrorKind::integrity);
  std::size_t per_round = 0;
  for (const auto& spec : trace.layers) per_round += spec.element_count();
  if (in.remaining() != std::size_t{rounds} * per_round * 4) {
    throw IntegrityError("trace payload holds " + std::to_string(in.remaining()) + " bytes, header declares " +
                         std::to_string(std::size_t{rounds} * per_round * 4));
  }
  trace.rounds.resize(rounds);
  for (auto& round : trace.rounds) {
    round.reserve(trace.layers.size());
    for (const auto& spec : trace.layers) {
      round.push_back(GradientTensor{spec, in.f32_array(spec.element_count())});
      check_finite(round.back().values, spec.name);
    }
  }
  return trace;
}

GradientTrace load_trace(const std::filesystem::path& path) { return decode_trace(read_file(path)); }

void save_trace(const GradientTrace& trace, const std::filesystem::path& path) {
  write_file_atomic(path, encode_trace(trace));
}

AbsStats abs_stats(std::span<const float> values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (float v : values) sum += std::fabs(static_cast<double>(v));
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (float v : values) {
    const double d = std::fabs(static_cast<double>(v)) - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

}  // namespace gebc
