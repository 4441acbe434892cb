#include "gebc/flsim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace gebc {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<GradientTrace> resolve_traces(const SimConfig& cfg) {
  if (cfg.clients < 1) throw UsageError("simulation needs at least one client");
  std::vector<GradientTrace> traces;
  if (!cfg.traces.empty()) {
    if (cfg.traces.size() == cfg.clients) {
      traces = cfg.traces;
    } else if (cfg.traces.size() == 1) {
      traces.assign(cfg.clients, cfg.traces.front());
    } else {
      throw UsageError("need one trace per client or a single shared trace");
    }
  } else if (cfg.synth) {
    for (std::size_t k = 0; k < cfg.clients; ++k) {
      SynthConfig s = *cfg.synth;
      s.seed += k;
      traces.push_back(synth_trace(s));
    }
  } else {
    throw UsageError("simulation has no trace source");
  }
  for (const auto& t : traces) {
    validate(t);
    if (t.layers != traces.front().layers) throw UsageError("client traces describe different models");
  }
  return traces;
}

std::size_t round_count(const SimConfig& cfg, const std::vector<GradientTrace>& traces) {
  std::size_t available = traces.front().rounds.size();
  for (const auto& t : traces) available = std::min(available, t.rounds.size());
  if (cfg.rounds == 0) return available;
  if (cfg.rounds > available) {
    throw UsageError("requested " + std::to_string(cfg.rounds) + " rounds, traces hold " + std::to_string(available));
  }
  return cfg.rounds;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

CommTimes comm_times(const CommModel& m) {
  if (!(m.bandwidth_bps > 0.0)) throw UsageError("bandwidth must be positive");
  CommTimes t;
  t.t_ori = 8.0 * m.original_bytes / m.bandwidth_bps;
  t.t_comm = m.t_comp + 8.0 * m.compressed_bytes / m.bandwidth_bps + m.t_decomp;
  t.ratio = t.t_ori > 0.0 ? t.t_comm / t.t_ori : 0.0;
  return t;
}

std::optional<double> break_even_bandwidth(double original_bytes, double compression_ratio, double codec_time) {
  if (!(compression_ratio > 1.0) || !(codec_time > 0.0)) return std::nullopt;
  return 8.0 * original_bytes * (1.0 - 1.0 / compression_ratio) / codec_time;
}

std::vector<std::vector<float>> federated_average(const std::vector<std::vector<GradientTensor>>& recon) {
  std::vector<std::vector<float>> agg;
  if (recon.empty()) return agg;
  const double k = static_cast<double>(recon.size());
  for (std::size_t l = 0; l < recon.front().size(); ++l) {
    std::vector<double> sum(recon.front()[l].values.size(), 0.0);
    for (const auto& client : recon) {
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += client[l].values[i];
    }
    std::vector<float> mean(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) mean[i] = static_cast<float>(sum[i] / k);
    agg.push_back(std::move(mean));
  }
  return agg;
}

std::vector<RoundReport> run_simulation(const SimConfig& cfg, const RoundObserver& observer) {
  validate(cfg.params);
  for (double b : cfg.bandwidths_bps) {
    if (!(b > 0.0)) throw UsageError("bandwidths must be positive");
  }
  const auto traces = resolve_traces(cfg);
  const std::size_t rounds = round_count(cfg, traces);
  const auto& layers = traces.front().layers;

  if (cfg.timing == TimingMode::measured) {
    // Untimed warm-up on scratch state.
    ClientState c = ClientState::init(layers);
    ServerState s = ServerState::init(layers);
    decompress_round(parse_payload(frame_payload(compress_round(traces[0].rounds[0], c, cfg.params).payload)), s,
                     cfg.params);
  }

  std::vector<ClientState> client_states(cfg.clients, ClientState::init(layers));
  std::vector<ServerState> server_states(cfg.clients, ServerState::init(layers));
  std::vector<RoundReport> reports;

  for (std::size_t t = 0; t < rounds; ++t) {
    RoundReport report;
    report.round = static_cast<std::uint32_t>(t + 1);
    std::vector<std::vector<GradientTensor>> recon(cfg.clients);

    for (std::size_t k = 0; k < cfg.clients; ++k) {
      const auto& g = traces[k].rounds[t];
      const std::string where = "round " + std::to_string(t + 1) + ", client " + std::to_string(k);

      auto start = Clock::now();
      CompressResult cr = compress_round(g, client_states[k], cfg.params, static_cast<std::uint32_t>(k));
      const Bytes wire = frame_payload(cr.payload);
      const double t_comp = seconds_since(start);

      start = Clock::now();
      recon[k] = decompress_round(parse_payload(wire), server_states[k], cfg.params);
      const double t_decomp = seconds_since(start);

      if (serialize_state(client_states[k]) != serialize_state(server_states[k])) {
        throw ProtocolError("client/server state mismatch at " + where);
      }

      ClientRoundStats stats;
      stats.client = static_cast<std::uint32_t>(k);
      stats.compressed_bytes = wire.size();
      for (std::size_t l = 0; l < g.size(); ++l) {
        const LayerReport& rep = cr.layers[l];
        double err = 0.0;
        for (std::size_t i = 0; i < g[l].values.size(); ++i) {
          err = std::max(err, std::fabs(static_cast<double>(g[l].values[i]) - recon[k][l].values[i]));
        }
        const bool ok = rep.tag == BlobTag::lossy ? err <= rep.delta : err == 0.0;
        if (!ok) {
          throw IntegrityError("error bound violated at " + where + ", layer '" + rep.name + "': " + fmt(err) +
                               " > " + fmt(rep.delta));
        }
        stats.original_bytes += rep.original_bytes;
        stats.max_abs_error = std::max(stats.max_abs_error, err);
        stats.bitmap_bytes += rep.bitmap_bytes;
      }
      stats.compression_ratio = static_cast<double>(stats.original_bytes) / static_cast<double>(stats.compressed_bytes);
      stats.t_comp = cfg.timing == TimingMode::measured ? t_comp : cfg.fixed_comp_s;
      stats.t_decomp = cfg.timing == TimingMode::measured ? t_decomp : cfg.fixed_decomp_s;
      stats.layers = std::move(cr.layers);
      report.clients.push_back(std::move(stats));
    }

    const auto aggregate = federated_average(recon);
    if (observer) observer(RoundObservation{report.round, recon, aggregate});

    CommModel mean;
    for (const auto& c : report.clients) {
      report.mean_compression_ratio += c.compression_ratio;
      mean.original_bytes += static_cast<double>(c.original_bytes);
      mean.compressed_bytes += static_cast<double>(c.compressed_bytes);
      mean.t_comp += c.t_comp;
      mean.t_decomp += c.t_decomp;
    }
    const double k = static_cast<double>(cfg.clients);
    report.mean_compression_ratio /= k;
    mean.original_bytes /= k;
    mean.compressed_bytes /= k;
    mean.t_comp /= k;
    mean.t_decomp /= k;
    for (double b : cfg.bandwidths_bps) {
      CommModel m = mean;
      m.bandwidth_bps = b;
      report.comm.push_back({b, comm_times(m),
                             break_even_bandwidth(m.original_bytes, m.original_bytes / m.compressed_bytes,
                                                  m.t_comp + m.t_decomp)});
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

double histogram_entropy(const std::map<std::int32_t, std::uint64_t>& hist) {
  double n = 0.0;
  for (const auto& [s, c] : hist) n += static_cast<double>(c);
  if (n == 0.0) return 0.0;
  double h = 0.0;
  for (const auto& [s, c] : hist) {
    if (!c) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<ModeComparison> compare_modes(const SimConfig& cfg, const std::vector<double>& epsilons) {
  std::vector<ModeComparison> rows;
  SimConfig run = cfg;
  run.timing = TimingMode::fixed;
  run.bandwidths_bps.clear();
  if (run.traces.empty()) {
    run.traces = resolve_traces(cfg);
    run.synth.reset();
  }
  for (double eps : epsilons) {
    ModeComparison row;
    row.epsilon = eps;
    for (bool on : {true, false}) {
      run.params.bound = {BoundMode::relative, eps};
      run.params.prediction = on;
      double s = 0.0, s_prime = 0.0;
      std::map<std::int32_t, std::uint64_t> hist;
      for (const auto& r : run_simulation(run)) {
        for (const auto& c : r.clients) {
          s += static_cast<double>(c.original_bytes);
          s_prime += static_cast<double>(c.compressed_bytes);
          for (const auto& l : c.layers) {
            for (const auto& [b, n] : l.bin_histogram) hist[b] += n;
          }
        }
      }
      (on ? row.cr_on : row.cr_off) = s / s_prime;
      (on ? row.entropy_on : row.entropy_off) = histogram_entropy(hist);
    }
    row.gain = row.cr_on / row.cr_off;
    rows.push_back(row);
  }
  return rows;
}

std::string report_csv(const std::vector<RoundReport>& reports) {
  std::string out =
      "round,client,layer,S_bytes,Sprime_bytes,CR,max_err,delta,bitmap_bytes,t_comp_s,t_decomp_s,"
      "bandwidth_bps,t_ori_s,t_comm_s,ratio,savings,break_even_bps\n";
  for (const auto& r : reports) {
    const std::string round = std::to_string(r.round);
    for (const auto& c : r.clients) {
      const std::string client = std::to_string(c.client);
      for (const auto& l : c.layers) {
        out += round + ',' + client + ',' + l.name + ',' + std::to_string(l.original_bytes) + ',' +
               std::to_string(l.blob_bytes) + ',' +
               fmt(static_cast<double>(l.original_bytes) / static_cast<double>(l.blob_bytes)) + ',' +
               fmt(l.max_abs_error) + ',' + fmt(l.delta) + ',' + std::to_string(l.bitmap_bytes) + ",,,,,,,,\n";
      }
      out += round + ',' + client + ",*," + std::to_string(c.original_bytes) + ',' +
             std::to_string(c.compressed_bytes) + ',' + fmt(c.compression_ratio) + ',' + fmt(c.max_abs_error) + ",," +
             std::to_string(c.bitmap_bytes) + ',' + fmt(c.t_comp) + ',' + fmt(c.t_decomp) + ",,,,,,\n";
    }
    for (const auto& b : r.comm) {
      out += round + ",*,*,,," + fmt(r.mean_compression_ratio) + ",,,,,," + fmt(b.bandwidth_bps) + ',' +
             fmt(b.times.t_ori) + ',' + fmt(b.times.t_comm) + ',' + fmt(b.times.ratio) + ',' +
             fmt(1.0 - b.times.ratio) + ',' + (b.break_even_bps ? fmt(*b.break_even_bps) : std::string()) + '\n';
    }
  }
  return out;
}

std::string comparison_csv(const std::vector<ModeComparison>& rows) {
  std::string out = "epsilon,CR_on,CR_off,gain,entropy_on,entropy_off\n";
  for (const auto& r : rows) {
    out += fmt(r.epsilon) + ',' + fmt(r.cr_on) + ',' + fmt(r.cr_off) + ',' + fmt(r.gain) + ',' + fmt(r.entropy_on) +
           ',' + fmt(r.entropy_off) + '\n';
  }
  return out;
}

}  // namespace gebc
