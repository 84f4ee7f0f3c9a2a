#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drkf/baselines.hpp"
#include "drkf/channel.hpp"
#include "drkf/filter.hpp"
#include "drkf/model.hpp"
#include "drkf/swf.hpp"

namespace drkf {

enum class FilterKind { kDrkf, kDrkfSwf, kCkf, kCrkf };

std::string filter_kind_name(FilterKind kind);
FilterKind parse_filter_kind(const std::string& name);

/// Shape of a noise source. Every distribution is scaled to meet its
/// covariance bound with equality; the bounds are moment bounds, so any
/// shape with the right second moment is admissible.
struct DistributionSpec {
  enum class Kind { kNormal, kUniform, kZero } kind = Kind::kNormal;
};

DistributionSpec parse_distribution(const std::string& name);
std::string distribution_name(const DistributionSpec& d);

/// What the simulated channel does (noise) and what the filters assume
/// about it (bounds). The two are configured independently: scenario
/// studies vary the assumed bounds while the physical channel stays put.
struct ChannelConfig {
  ChannelBounds bounds;
  ChannelMode mode = ChannelMode::kPaperLiteral;
  LinkNoiseSpec noise;
};

struct Scenario {
  std::string name;
  SystemModel model;
  NoiseBounds bounds;
  SensorGraph graph;
  ChannelConfig channel;
  FilterKind filter = FilterKind::kDrkf;
  SwfOptions swf;
  int horizon = 0;
  int runs = 100;
  std::uint64_t seed = 1;
  Vector xhat0;
  Matrix pi0;
  DistributionSpec w_dist, v_dist, x0_dist, eps_dist;
  int tail_window_start = -1;  // defaults to horizon/2 + 1 when negative
};

/// Throws on any structural problem (invalid graph, mismatched sensor
/// counts, fading intervals escaping [0, 1], ...).
void validate_scenario(const Scenario& scenario);

/// Per-step, per-estimator Monte Carlo statistics. For the distributed
/// filters the estimator labels are the sensor ids 1..N; the centralized
/// baselines report a single estimator labeled 0.
struct RunStatistics {
  int horizon = 0;
  std::vector<int> estimator_labels;
  std::vector<std::vector<double>> mse;  // [k][estimator]
  std::vector<std::vector<double>> trp;  // [k][estimator]
  std::vector<double> mse_network;       // average over estimators, per k
  std::vector<double> trp_network;
  int tail_window_start = 0;
  double mse_max = 0.0;  // max of mse_network over the tail window
  double p_max = 0.0;    // max of trp_network over the tail window

  long swf_optimized = 0;
  long swf_infeasible = 0;
  long swf_iteration_limit = 0;
  long channel_clip_events = 0;

  std::string to_csv() const;
  std::string summary() const;
};

/// Parses the CSV produced by to_csv (used for round-trip checks and by
/// chart emission).
struct CsvRow {
  int k = 0;
  int sensor = 0;
  double mse = 0.0;
  double trp = 0.0;
};
std::vector<CsvRow> parse_statistics_csv(const std::string& csv);

/// Ground-truth trajectory x_0 .. x_K of one run.
std::vector<Vector> simulate_truth(const Scenario& scenario,
                                   std::uint64_t run_seed);

/// Per-sensor measurement streams y_{k,i} for k = 1 .. K; index [k-1][i].
std::vector<std::vector<Vector>> simulate_measurements(
    const std::vector<Vector>& truth, const Scenario& scenario,
    std::uint64_t run_seed);

/// Runs the full Monte Carlo suite: per run, truth -> measurements ->
/// channel corruption -> filter loop, then a deterministic reduction in run
/// order. Identical seeds give bitwise-identical statistics regardless of
/// the thread count.
RunStatistics run_monte_carlo(const Scenario& scenario);

/// Built-in presets. "example1" (with its five variant cases) is the
/// four-sensor time-varying scenario; "example2" is the 50-node
/// Metropolis-weighted network on unstable dynamics.
Scenario example1_scenario(int table_case = 1);
Scenario example2_scenario();
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

}  // namespace drkf
