#pragma once

#include <deque>
#include <map>
#include <vector>

#include "drkf/filter.hpp"

namespace drkf {

/// One retained reception: the inflated pair as it stood at `time`.
struct WindowEntry {
  int time = 0;
  EstimatePair pair;
};

/// Per-neighbor ring of the last L inflated receptions of one sensor. The
/// window is built receiver-side from retained history; neighbors transmit
/// exactly what they transmit for the plain filter.
class WindowBuffer {
 public:
  WindowBuffer(int capacity, std::vector<int> neighbors);

  void push(int from, int time, EstimatePair inflated);

  int available(int from) const;
  /// age 0 = newest entry.
  const WindowEntry& entry(int from, int age) const;
  int capacity() const { return capacity_; }

 private:
  int capacity_;
  std::map<int, std::deque<WindowEntry>> slots_;
};

/// Re-predicts a buffered pair from `entry_time` to `target_time` by
/// composing the one-step predictor: x <- A_t x,
/// P <- A_t P A_t^T + Q_t + mu_t F_t Pi_t F_t^T for t = entry_time ..
/// target_time - 1. Zero steps is the identity.
EstimatePair window_predict(const EstimatePair& inflated, int entry_time,
                            int target_time, const SystemModel& model,
                            const NoiseBounds& bounds, MomentTrace& pi);

struct WeightOptions {
  int max_iterations = 500;
  double rel_tol = 1e-9;
  // J > 0 is relaxed to J >= eps*I with eps = epsilon_scale * ||baseline
  // information matrix||; strict cones are not numerically testable.
  double epsilon_scale = 1e-8;
  double armijo_c = 1e-4;
};

enum class WeightStatus {
  kOptimized,
  kInfeasible,
  kIterationLimit,  // treated as infeasible by callers, logged distinctly
};

struct WeightOptResult {
  WeightStatus status = WeightStatus::kInfeasible;
  std::vector<double> weights;
  double objective = 0.0;
  double epsilon = 0.0;
};

/// Solves the windowed CI weight problem: minimize Tr(J(a)^{-1}) over the
/// simplex, J(a) = sum_m a_m candidate_bounds[m]^{-1} - sum_j
/// baseline_weights[j] baseline_bounds[j]^{-1}, subject to J(a) >= eps*I.
///
/// Projected gradient descent with exact gradient, simplex projection and
/// Armijo backtracking; feasibility is decided first by maximizing
/// lambda_min(J(a)) with the same machinery.
WeightOptResult optimize_weights(const std::vector<Matrix>& candidate_bounds,
                                 const std::vector<Matrix>& baseline_bounds,
                                 const std::vector<double>& baseline_weights,
                                 const WeightOptions& opts = {});

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::vector<double> v);

/// A re-predicted window candidate of sensor `from` at age `age`.
struct WindowCandidate {
  int from = 0;
  int age = 0;
  EstimatePair pair;
};

struct WindowWeights {
  std::vector<double> a;  // aligned with a candidate list
  enum class Source { kOptimized, kFallback } source = Source::kFallback;
};

/// Fallback weights over a candidate list: the graph weight of each sender
/// on its age-0 candidate, zero on every older one. Fusing with these
/// reproduces the plain (windowless) fusion exactly.
WindowWeights fallback_window_weights(
    const std::vector<WindowCandidate>& candidates, const SensorGraph& graph,
    int i);

/// CI combination of window candidates under the given weights. Throws
/// naming the (sensor, age) of any candidate whose bound is not PD.
EstimatePair swf_fuse(const std::vector<WindowCandidate>& candidates,
                      const std::vector<double>& weights);

struct SwfOptions {
  int window = 1;              // L >= 1
  std::vector<int> interval;   // Delta_i >= 1 per sensor; size 1 broadcasts
  WeightOptions weights;
};

/// Sliding-window variant: prediction and update are identical to the plain
/// filter; fusion switches to optimized windowed CI at each sensor's
/// scheduled instants, falling back to the plain fusion whenever the weight
/// problem is infeasible or does not converge.
class SwfFilter {
 public:
  SwfFilter(const SystemModel& model, const NoiseBounds& bounds,
            const SensorGraph& graph, const ChannelBounds& channel,
            std::vector<EstimatePair> initial, Matrix pi0, SwfOptions opts);

  const std::vector<EstimatePair>& predict_and_update(
      const std::vector<Vector>& measurements);
  void fuse_received(const std::vector<std::vector<ReceivedPair>>& received);
  void step(const std::vector<Vector>& measurements,
            const DrkfFilter::ChannelFn& channel);

  struct FusionCounters {
    long optimized = 0;
    long infeasible = 0;
    long iteration_limit = 0;
    long off_schedule = 0;
  };
  const FusionCounters& counters() const { return counters_; }

  int current_step() const { return core_.current_step(); }
  int sensor_count() const { return core_.sensor_count(); }
  const SensorState& sensor_state(int i) const {
    return core_.sensor_state(i);
  }
  MomentTrace& moment_trace() { return core_.moment_trace(); }
  int window() const { return L_; }
  int interval(int i) const { return delta_.at(i); }

 private:
  void fuse_sensor(int i, const std::vector<ReceivedPair>& received);

  DrkfFilter core_;
  int L_;
  std::vector<int> delta_;
  WeightOptions wopts_;
  std::vector<WindowBuffer> buffers_;
  FusionCounters counters_;
};

}  // namespace drkf
