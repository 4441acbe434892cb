#pragma once

// Federated round simulator: every client compresses its gradients, the
// server decompresses and averages them, and communication time is
// modeled analytically from payload sizes and codec times.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gebc/pipeline.hpp"
#include "gebc/trace.hpp"

namespace gebc {

// S and S' in bytes, bandwidth in bits per second, times in seconds.
struct CommModel {
  double original_bytes = 0.0;
  double compressed_bytes = 0.0;
  double bandwidth_bps = 0.0;
  double t_comp = 0.0;
  double t_decomp = 0.0;
};

struct CommTimes {
  double t_ori = 0.0;   // 8S / B
  double t_comm = 0.0;  // t_comp + 8S'/B + t_decomp
  double ratio = 0.0;   // t_comm / t_ori
};

CommTimes comm_times(const CommModel& m);

// Bandwidth (bits/s) at which compression stops paying off:
// 8S (1 - 1/CR) / codec_time. nullopt when CR <= 1.
std::optional<double> break_even_bandwidth(double original_bytes, double compression_ratio, double codec_time);

enum class TimingMode { measured, fixed };

struct SimConfig {
  std::size_t clients = 1;
  // Either one trace per client, one trace shared by all clients, or empty
  // to synthesize client k's trace from `synth` with seed + k.
  std::vector<GradientTrace> traces;
  std::optional<SynthConfig> synth;
  std::size_t rounds = 0;  // 0 = every round of the traces
  PipelineParams params;
  std::vector<double> bandwidths_bps;
  TimingMode timing = TimingMode::measured;
  double fixed_comp_s = 0.0;
  double fixed_decomp_s = 0.0;
};

struct ClientRoundStats {
  std::uint32_t client = 0;
  std::size_t original_bytes = 0;
  std::size_t compressed_bytes = 0;  // framed payload
  double compression_ratio = 0.0;
  double max_abs_error = 0.0;
  std::size_t bitmap_bytes = 0;
  double t_comp = 0.0;
  double t_decomp = 0.0;
  std::vector<LayerReport> layers;
};

struct BandwidthRow {
  double bandwidth_bps = 0.0;
  CommTimes times;
  std::optional<double> break_even_bps;
};

struct RoundReport {
  std::uint32_t round = 0;
  std::vector<ClientRoundStats> clients;
  double mean_compression_ratio = 0.0;
  std::vector<BandwidthRow> comm;  // one per configured bandwidth, per-client means
};

struct RoundObservation {
  std::uint32_t round = 0;
  const std::vector<std::vector<GradientTensor>>& server_recon;  // [client][layer]
  const std::vector<std::vector<float>>& aggregate;              // [layer]
};

using RoundObserver = std::function<void(const RoundObservation&)>;

// Runs every round, checking after each client that the client and server
// states serialize identically and that every lossy layer meets its bound.
// The first violation aborts with an error naming round, client and layer.
std::vector<RoundReport> run_simulation(const SimConfig& cfg, const RoundObserver& observer = {});

// Uniform FedAvg of per-client reconstructions.
std::vector<std::vector<float>> federated_average(const std::vector<std::vector<GradientTensor>>& recon);

struct ModeComparison {
  double epsilon = 0.0;
  double cr_on = 0.0;
  double cr_off = 0.0;
  double gain = 0.0;  // cr_on / cr_off
  double entropy_on = 0.0;   // bits per bin over all lossy layers and rounds
  double entropy_off = 0.0;
};

// Runs the same clients with prediction on and off under relative bounds.
std::vector<ModeComparison> compare_modes(const SimConfig& cfg, const std::vector<double>& epsilons);

// CSV header: round,client,layer,S_bytes,Sprime_bytes,CR,max_err,delta,
// bitmap_bytes,t_comp_s,t_decomp_s,bandwidth_bps,t_ori_s,t_comm_s,ratio,
// savings,break_even_bps. Layer rows leave the timing and bandwidth
// columns empty; each client gets a total row (layer "*") with its codec
// times; each round gets one aggregate row (client "*") per bandwidth.
std::string report_csv(const std::vector<RoundReport>& reports);
std::string comparison_csv(const std::vector<ModeComparison>& rows);

// Entropy of a merged histogram, in bits per symbol.
double histogram_entropy(const std::map<std::int32_t, std::uint64_t>& hist);

}  // namespace gebc
