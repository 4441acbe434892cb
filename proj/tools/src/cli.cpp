#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>

#include "gebc/flsim.hpp"
#include "stream.hpp"

namespace gebc::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const std::vector<std::string> kDefaultLayers = {"conv1:32x3x3x3", "conv2:64x32x3x3", "conv3:128x64x3x3",
                                                 "fc:10x2048", "bias:64"};

struct CodecFlags {
  std::string eb_mode = "rel";
  double eb = 1e-2;
  double beta = 0.5;
  double tau = 0.5;
  bool full_batch = false;
  std::size_t t_lossy = kDefaultLossyThreshold;
  std::string backend = "default";
  std::string prediction = "on";
};

void add_codec_flags(CLI::App* app, CodecFlags& f) {
  app->add_option("--eb-mode", f.eb_mode, "abs: --eb is the bound; rel: bound = eb * value range")
      ->check(CLI::IsMember({"abs", "rel"}))
      ->capture_default_str();
  app->add_option("--eb", f.eb, "error bound value")->capture_default_str();
  app->add_option("--beta", f.beta, "EMA weight of the newest magnitudes")->capture_default_str();
  app->add_option("--tau", f.tau, "kernel sign-consistency threshold")->capture_default_str();
  app->add_flag("--full-batch", f.full_batch, "flip-bit sign prediction");
  app->add_option("--t-lossy", f.t_lossy, "layers with at most this many elements stay lossless")
      ->capture_default_str();
  app->add_option("--backend", f.backend, "lossless stage")
      ->check(CLI::IsMember({"default", "deflate", "store"}))
      ->capture_default_str();
  app->add_option("--prediction", f.prediction, "magnitude and sign prediction")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
}

PipelineParams to_params(const CodecFlags& f) {
  PipelineParams p;
  p.bound = {f.eb_mode == "abs" ? BoundMode::absolute : BoundMode::relative, f.eb};
  p.predict.beta = f.beta;
  p.predict.tau = f.tau;
  p.predict.full_batch = f.full_batch;
  p.lossy_threshold = f.t_lossy;
  p.backend = parse_backend(f.backend);
  p.prediction = f.prediction == "on";
  validate(p);
  return p;
}

struct SynthFlags {
  std::vector<std::string> layers;
  std::size_t rounds = 10;
  std::string mode = "mini";
  double decay = 0.99;
  double noise = 0.3;
  double consistency = 0.8;
  std::size_t period = 1;
  double scale = 1e-3;
  double persistence = 0.8;
};

void add_synth_flags(CLI::App* app, SynthFlags& f) {
  app->add_option("--layers", f.layers, "name:AxBxCxD, comma separated")->delimiter(',');
  app->add_option("--mode", f.mode, "trace mode")->check(CLI::IsMember({"mini", "full"}))->capture_default_str();
  app->add_option("--decay", f.decay, "per-round magnitude decay")->capture_default_str();
  app->add_option("--noise", f.noise, "multiplicative noise level")->capture_default_str();
  app->add_option("--consistency", f.consistency, "target kernel sign consistency")->capture_default_str();
  app->add_option("--period", f.period, "full-batch oscillation period")->capture_default_str();
  app->add_option("--scale", f.scale, "mean |g| in round 1")->capture_default_str();
  app->add_option("--persistence", f.persistence, "per-element magnitude persistence")->capture_default_str();
}

SynthConfig to_synth(const SynthFlags& f, std::uint64_t seed, bool full_batch) {
  SynthConfig c;
  c.seed = seed;
  for (const auto& l : f.layers.empty() ? kDefaultLayers : f.layers) c.layers.push_back(parse_layer_spec(l));
  c.rounds = f.rounds;
  c.mode = (f.mode == "full" || full_batch) ? TraceMode::full_batch : TraceMode::mini_batch;
  c.magnitude_decay = f.decay;
  c.noise_level = f.noise;
  c.target_sign_consistency = f.consistency;
  c.oscillation_period = f.period;
  c.scale = f.scale;
  c.persistence = f.persistence;
  validate(c);
  return c;
}

// Accepts plain bits/s or a k/M/G suffix: "10M" = 1e7.
double parse_bandwidth(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("bad bandwidth '" + text + "'");
  }
  const std::string suffix = text.substr(used);
  if (suffix == "k" || suffix == "K") v *= 1e3;
  else if (suffix == "M") v *= 1e6;
  else if (suffix == "G") v *= 1e9;
  else if (!suffix.empty()) throw UsageError("bad bandwidth suffix in '" + text + "'");
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("bandwidth must be positive: '" + text + "'");
  return v;
}

// Writes to `path`, or to `out` when no path was given.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) out << text;
  else write_file_atomic(path, std::string_view(text));
}

// ---- compress ---------------------------------------------------------------

struct CompressArgs {
  std::string input, output, csv, timing = "fixed";
  std::uint32_t client = 0;
  CodecFlags codec;
};

void do_compress(const CompressArgs& a) {
  const GradientTrace trace = load_trace(a.input);
  PipelineParams params = to_params(a.codec);
  if (trace.mode == TraceMode::full_batch) params.predict.full_batch = true;

  PayloadStream s;
  s.mode = trace.mode;
  s.layers = trace.layers;
  s.predict = params.predict;
  s.prediction = params.prediction;

  ClientState state = ClientState::init(trace.layers);
  std::vector<RoundReport> reports;
  for (const auto& round : trace.rounds) {
    const auto start = Clock::now();
    CompressResult r = compress_round(round, state, params, a.client);
    Bytes frame = frame_payload(r.payload);
    const double t = seconds_since(start);

    ClientRoundStats c;
    c.client = a.client;
    c.compressed_bytes = frame.size();
    for (const auto& l : r.layers) {
      c.original_bytes += l.original_bytes;
      c.max_abs_error = std::max(c.max_abs_error, l.max_abs_error);
      c.bitmap_bytes += l.bitmap_bytes;
    }
    c.compression_ratio = double(c.original_bytes) / double(c.compressed_bytes);
    c.t_comp = a.timing == "measured" ? t : 0.0;
    c.layers = std::move(r.layers);
    RoundReport rep;
    rep.round = r.payload.round;
    rep.mean_compression_ratio = c.compression_ratio;
    rep.clients.push_back(std::move(c));
    reports.push_back(std::move(rep));
    s.frames.push_back(std::move(frame));
  }
  save_stream(s, a.output);
  if (!a.csv.empty()) write_file_atomic(a.csv, std::string_view(report_csv(reports)));
}

// ---- decompress -------------------------------------------------------------

struct DecompressArgs {
  std::string input, output, reference, csv;
};

void do_decompress(const DecompressArgs& a, std::ostream& out) {
  const PayloadStream s = load_stream(a.input);
  if (s.frames.empty()) throw FormatError("payload stream holds no rounds");
  PipelineParams params;
  params.predict = s.predict;
  params.prediction = s.prediction;

  std::optional<GradientTrace> ref;
  if (!a.reference.empty()) {
    ref = load_trace(a.reference);
    if (ref->layers != s.layers) throw UsageError("reference trace describes a different model");
    if (ref->rounds.size() < s.frames.size()) throw UsageError("reference trace has fewer rounds than the stream");
  }

  ServerState state = ServerState::init(s.layers);
  GradientTrace recon;
  recon.mode = s.mode;
  recon.layers = s.layers;
  std::string csv = "round,layer,tag,delta,max_err,within_bound\n";
  std::string violation;
  double worst = 0.0;
  for (std::size_t t = 0; t < s.frames.size(); ++t) {
    const CompressedPayload payload = parse_payload(s.frames[t]);
    auto layers = decompress_round(payload, state, params);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const BlobTag tag = peek_tag(payload.blobs[l]);
      const double delta = tag == BlobTag::lossy ? inspect_blob(payload.blobs[l], s.layers[l]).delta : 0.0;
      csv += std::to_string(payload.round) + ',' + s.layers[l].name + ',' + to_string(tag) + ',' + fmt(delta) + ',';
      if (!ref) {
        csv += ",\n";
        continue;
      }
      const auto& g = ref->rounds[t][l].values;
      double err = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        err = std::max(err, std::fabs(double(g[i]) - double(layers[l].values[i])));
      }
      worst = std::max(worst, err);
      const bool ok = err <= delta;
      csv += fmt(err) + ',' + (ok ? "1" : "0") + '\n';
      if (!ok && violation.empty()) {
        violation = "error bound violated at round " + std::to_string(payload.round) + ", layer '" +
                    s.layers[l].name + "': " + fmt(err) + " > " + fmt(delta);
      }
    }
    recon.rounds.push_back(std::move(layers));
  }
  save_trace(recon, a.output);
  if (!a.csv.empty()) write_file_atomic(a.csv, std::string_view(csv));
  if (!violation.empty()) throw IntegrityError(violation);
  if (ref) {
    out << "bound OK: " << s.frames.size() << " rounds, " << s.layers.size() << " layers, max error " << fmt(worst)
        << '\n';
  }
}

// ---- inspect ----------------------------------------------------------------

struct InspectArgs {
  std::string input, csv;
};

void do_inspect(const InspectArgs& a, std::ostream& out) {
  const PayloadStream s = load_stream(a.input);
  const std::uint64_t digest = spec_digest(s.layers);
  std::string text =
      "round,client,layer,shape,tag,blob_bytes,body_bytes,backend,mu,sigma,delta,distinct_symbols,"
      "max_code_length,huffman_bits,literals,bitmap,bitmap_bits,bitmap_bytes,kernels,predicted_kernels\n";
  for (const auto& frame : s.frames) {
    const CompressedPayload p = parse_payload(frame);
    if (p.spec_digest != digest) throw IntegrityError("frame for round " + std::to_string(p.round) +
                                                      " was made for a different model");
    if (p.blobs.size() != s.layers.size()) {
      throw IntegrityError("frame for round " + std::to_string(p.round) + " has " + std::to_string(p.blobs.size()) +
                           " blobs for " + std::to_string(s.layers.size()) + " layers");
    }
    for (std::size_t l = 0; l < s.layers.size(); ++l) {
      const BlobInfo b = inspect_blob(p.blobs[l], s.layers[l]);
      text += std::to_string(p.round) + ',' + std::to_string(p.client_id) + ',' + s.layers[l].name + ',' +
              format_shape(s.layers[l]) + ',' + to_string(b.tag) + ',' + std::to_string(b.blob_bytes) + ',' +
              std::to_string(b.body_bytes) + ',' + to_string(b.backend) + ',';
      if (b.tag == BlobTag::lossless_only) {
        text += ",,,,,,,none,0,0," + std::to_string(s.layers[l].kernel_count()) + ",0\n";
        continue;
      }
      text += fmt(b.mu) + ',' + fmt(b.sigma) + ',' + fmt(b.delta) + ',' + std::to_string(b.distinct_symbols) + ',' +
              std::to_string(b.max_code_length) + ',' + std::to_string(b.huffman.bit_count) + ',' +
              std::to_string(b.literal_count) + ',' + to_string(b.bitmap.variant) + ',' +
              std::to_string(b.bitmap.payload_bits()) + ',' + std::to_string(serialized_size(b.bitmap)) + ',' +
              std::to_string(s.layers[l].kernel_count()) + ',' + std::to_string(b.bitmap.predicted_kernels()) + '\n';
    }
  }
  emit(a.csv, text, out);
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::vector<std::string> traces;
  std::size_t clients = 1;
  std::size_t rounds = 0;
  std::vector<std::string> bandwidths = {"1M", "10M", "100M", "1G"};
  std::string timing = "measured";
  double t_comp = 0.0, t_decomp = 0.0;
  bool compare = false;
  std::vector<double> eb_list = {1e-3, 1e-2, 3e-2, 5e-2};
  std::string csv;
  std::uint64_t seed = 1;
  CodecFlags codec;
  SynthFlags synth;
};

void do_simulate(const SimulateArgs& a, std::ostream& out) {
  SimConfig cfg;
  cfg.clients = a.clients;
  cfg.params = to_params(a.codec);
  if (a.traces.empty()) {
    SynthFlags sf = a.synth;
    if (a.rounds) sf.rounds = a.rounds;
    cfg.synth = to_synth(sf, a.seed, a.codec.full_batch);
    if (cfg.synth->mode == TraceMode::full_batch) cfg.params.predict.full_batch = true;
  } else {
    for (const auto& path : a.traces) cfg.traces.push_back(load_trace(path));
    if (cfg.traces.front().mode == TraceMode::full_batch) cfg.params.predict.full_batch = true;
    cfg.rounds = a.rounds;
  }
  for (const auto& b : a.bandwidths) cfg.bandwidths_bps.push_back(parse_bandwidth(b));
  cfg.timing = a.timing == "fixed" ? TimingMode::fixed : TimingMode::measured;
  cfg.fixed_comp_s = a.t_comp;
  cfg.fixed_decomp_s = a.t_decomp;
  if (a.compare) {
    if (a.eb_list.empty()) throw UsageError("--eb-list is empty");
    for (double e : a.eb_list) {
      if (!(e > 0.0)) throw UsageError("--eb-list values must be positive");
    }
    emit(a.csv, comparison_csv(compare_modes(cfg, a.eb_list)), out);
  } else {
    emit(a.csv, report_csv(run_simulation(cfg)), out);
  }
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string output;
  std::uint64_t seed = 1;
  SynthFlags synth;
};

void do_synth(const SynthArgs& a) { save_trace(synth_trace(to_synth(a.synth, a.seed, false)), a.output); }

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
  std::string trace, csv;
  std::size_t repeat = 3;
  bool ablation = false;
  double model_bytes = 95.6e6;
  double model_cr = 14.98;
  std::uint64_t seed = 1;
  CodecFlags codec;
  SynthFlags synth;
};

std::vector<std::vector<float>> magnitudes(const GradientTrace& t, std::size_t layer) {
  std::vector<std::vector<float>> out;
  for (const auto& round : t.rounds) {
    std::vector<float> a(round[layer].values.size());
    std::transform(round[layer].values.begin(), round[layer].values.end(), a.begin(),
                   [](float x) { return std::fabs(x); });
    out.push_back(std::move(a));
  }
  return out;
}

// Mean squared error of one-step magnitude predictions over every lossy-size
// layer, scored from the sixth round on so every predictor has its history.
std::string ablation_rows(const GradientTrace& t, const PipelineParams& params) {
  constexpr std::size_t first_scored = 5;
  if (t.rounds.size() <= first_scored) throw UsageError("ablation needs at least 6 rounds");
  const BaselineKind kinds[] = {BaselineKind::lorenzo, BaselineKind::ma3, BaselineKind::ma5, BaselineKind::ar1,
                                BaselineKind::ema_nonorm};
  double ema_sse = 0.0;
  std::vector<double> base_sse(std::size(kinds), 0.0);
  std::size_t count = 0;
  for (std::size_t l = 0; l < t.layers.size(); ++l) {
    if (t.layers[l].element_count() <= params.lossy_threshold) continue;
    const auto mags = magnitudes(t, l);
    MagPredictorState state = MagPredictorState::zeros(mags[0].size());
    for (std::size_t r = 1; r < mags.size(); ++r) {
      const AbsStats st = abs_stats(mags[r]);
      auto pred = predict_magnitude(mags[r - 1], float(st.mean), float(st.std), state, params.predict);
      state = std::move(pred.state);
      if (r < first_scored) continue;
      const std::span<const std::vector<float>> history(mags.data(), r);
      for (std::size_t i = 0; i < mags[r].size(); ++i) {
        const double d = double(pred.pred_abs[i]) - mags[r][i];
        ema_sse += d * d;
      }
      for (std::size_t k = 0; k < std::size(kinds); ++k) {
        const auto b = baseline_predict(kinds[k], history, params.predict.beta);
        for (std::size_t i = 0; i < mags[r].size(); ++i) {
          const double d = double(b[i]) - mags[r][i];
          base_sse[k] += d * d;
        }
      }
      count += mags[r].size();
    }
  }
  if (count == 0) throw UsageError("ablation needs at least one layer above --t-lossy");
  std::string rows = "mse_ema_norm," + fmt(ema_sse / double(count)) + '\n';
  for (std::size_t k = 0; k < std::size(kinds); ++k) {
    rows += std::string("mse_") + to_string(kinds[k]) + ',' + fmt(base_sse[k] / double(count)) + '\n';
  }
  return rows;
}

void do_bench(const BenchArgs& a, std::ostream& out) {
  if (a.repeat < 1) throw UsageError("--repeat must be at least 1");
  if (!(a.model_bytes > 0.0) || !(a.model_cr > 0.0)) throw UsageError("reference model size and CR must be positive");
  const GradientTrace trace =
      a.trace.empty() ? synth_trace(to_synth(a.synth, a.seed, a.codec.full_batch)) : load_trace(a.trace);
  PipelineParams params = to_params(a.codec);
  if (trace.mode == TraceMode::full_batch) params.predict.full_batch = true;

  double best_comp = 1e300, best_decomp = 1e300;
  std::size_t original = 0, compressed = 0;
  for (std::size_t rep = 0; rep <= a.repeat; ++rep) {  // pass 0 is a warm-up
    ClientState client = ClientState::init(trace.layers);
    ServerState server = ServerState::init(trace.layers);
    std::vector<Bytes> frames;
    original = compressed = 0;
    auto start = Clock::now();
    for (const auto& round : trace.rounds) {
      frames.push_back(frame_payload(compress_round(round, client, params).payload));
      compressed += frames.back().size();
      for (const auto& g : round) original += 4 * g.values.size();
    }
    const double tc = seconds_since(start);
    start = Clock::now();
    for (const auto& f : frames) decompress_round(parse_payload(f), server, params);
    const double td = seconds_since(start);
    if (rep == 0) continue;
    best_comp = std::min(best_comp, tc);
    best_decomp = std::min(best_decomp, td);
  }
  const double comp_bps = double(original) / best_comp;
  const double decomp_bps = double(original) / best_decomp;
  const double codec_s = a.model_bytes / comp_bps + a.model_bytes / decomp_bps;
  const auto be = break_even_bandwidth(a.model_bytes, a.model_cr, codec_s);

  std::string text = "metric,value\n";
  text += "rounds," + std::to_string(trace.rounds.size()) + '\n';
  text += "original_bytes," + std::to_string(original) + '\n';
  text += "compressed_bytes," + std::to_string(compressed) + '\n';
  text += "compression_ratio," + fmt(double(original) / double(compressed)) + '\n';
  text += "compress_s," + fmt(best_comp) + '\n';
  text += "decompress_s," + fmt(best_decomp) + '\n';
  text += "compress_MBps," + fmt(comp_bps / 1e6) + '\n';
  text += "decompress_MBps," + fmt(decomp_bps / 1e6) + '\n';
  text += "ref_model_bytes," + fmt(a.model_bytes) + '\n';
  text += "ref_compression_ratio," + fmt(a.model_cr) + '\n';
  text += "ref_codec_s," + fmt(codec_s) + '\n';
  text += "break_even_bps," + (be ? fmt(*be) : std::string()) + '\n';
  if (a.ablation) text += ablation_rows(trace, params);
  emit(a.csv, text, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Error-bounded gradient compressor with magnitude and sign prediction", "gebc"};
  app.require_subcommand(1);

  CompressArgs ca;
  auto* compress = app.add_subcommand("compress", "compress every round of a trace into a payload stream");
  compress->add_option("input", ca.input, "trace file")->required();
  compress->add_option("-o,--output", ca.output, "payload stream file")->required();
  compress->add_option("--csv", ca.csv, "per-layer summary CSV");
  compress->add_option("--client-id", ca.client, "client id written into every payload");
  compress->add_option("--timing", ca.timing, "codec times in the CSV")
      ->check(CLI::IsMember({"fixed", "measured"}))
      ->capture_default_str();
  add_codec_flags(compress, ca.codec);

  DecompressArgs da;
  auto* decompress = app.add_subcommand("decompress", "rebuild a trace from a payload stream");
  decompress->add_option("input", da.input, "payload stream file")->required();
  decompress->add_option("-o,--output", da.output, "reconstructed trace file")->required();
  decompress->add_option("--reference", da.reference, "original trace; checks the error bound");
  decompress->add_option("--csv", da.csv, "per-layer bound report CSV");

  InspectArgs ia;
  auto* inspect = app.add_subcommand("inspect", "dump the framing of a payload stream as CSV");
  inspect->add_option("input", ia.input, "payload stream file")->required();
  inspect->add_option("--csv", ia.csv, "write the dump here instead of standard output");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "multi-client rounds with modeled communication time");
  simulate->add_option("--trace", sa.traces, "trace file; one shared or one per client");
  simulate->add_option("--clients", sa.clients, "number of clients")->capture_default_str();
  simulate->add_option("--rounds", sa.rounds, "rounds to run (synthetic traces: rounds to generate)");
  simulate->add_option("--bandwidths", sa.bandwidths, "bits/s, k/M/G suffixes allowed")->delimiter(',');
  simulate->add_option("--timing", sa.timing, "codec times")
      ->check(CLI::IsMember({"fixed", "measured"}))
      ->capture_default_str();
  simulate->add_option("--t-comp", sa.t_comp, "fixed compression time per client round, seconds");
  simulate->add_option("--t-decomp", sa.t_decomp, "fixed decompression time per client round, seconds");
  simulate->add_flag("--compare", sa.compare, "prediction on vs off at every --eb-list epsilon");
  simulate->add_option("--eb-list", sa.eb_list, "relative bounds for --compare")->delimiter(',');
  simulate->add_option("--csv", sa.csv, "write the report here instead of standard output");
  simulate->add_option("--seed", sa.seed, "seed of client 0's synthetic trace")->capture_default_str();
  add_codec_flags(simulate, sa.codec);
  add_synth_flags(simulate, sa.synth);

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "write a synthetic trace");
  synth->add_option("-o,--output", ya.output, "trace file")->required();
  synth->add_option("--seed", ya.seed)->capture_default_str();
  synth->add_option("--rounds", ya.synth.rounds)->capture_default_str();
  add_synth_flags(synth, ya.synth);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "codec throughput and break-even bandwidth");
  bench->add_option("--trace", ba.trace, "trace file (default: synthetic)");
  bench->add_option("--repeat", ba.repeat, "timed passes; the best is reported")->capture_default_str();
  bench->add_flag("--ablation", ba.ablation, "add magnitude predictor MSE rows");
  bench->add_option("--model-bytes", ba.model_bytes, "model size for the break-even estimate")->capture_default_str();
  bench->add_option("--model-cr", ba.model_cr, "compression ratio for the break-even estimate")
      ->capture_default_str();
  bench->add_option("--csv", ba.csv, "write the report here instead of standard output");
  bench->add_option("--seed", ba.seed)->capture_default_str();
  bench->add_option("--rounds", ba.synth.rounds, "synthetic rounds")->capture_default_str();
  add_codec_flags(bench, ba.codec);
  add_synth_flags(bench, ba.synth);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_code(ErrorKind::usage);
  }

  try {
    if (*compress) do_compress(ca);
    else if (*decompress) do_decompress(da, out);
    else if (*inspect) do_inspect(ia, out);
    else if (*simulate) do_simulate(sa, out);
    else if (*synth) do_synth(ya);
    else if (*bench) do_bench(ba, out);
  } catch (const Error& e) {
    err << "gebc: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "gebc: internal error: " << e.what() << '\n';
    return 5;
  }
  return 0;
}

}  // namespace gebc::cli
