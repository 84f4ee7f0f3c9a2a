#pragma once

#include <functional>
#include <vector>

#include "drkf/channel.hpp"
#include "drkf/model.hpp"
#include "drkf/moment.hpp"
#include "drkf/types.hpp"

namespace drkf {

/// Per-sensor filter state across the three phases of a tick.
struct SensorState {
  int id = 0;
  EstimatePair fused;      // result of the fusion phase
  EstimatePair predicted;  // result of the prediction phase
  EstimatePair updated;    // result of the measurement update (transmitted)
  Matrix gain;             // n x m gain used in the last update
};

/// Prediction: x = A_{k-1} x_prev,
/// P = A_{k-1} P_prev A_{k-1}^T + mu_{k-1} F_{k-1} Pi_{k-1} F_{k-1}^T + Q_{k-1}.
EstimatePair predict(const EstimatePair& prev, const SystemModel& model,
                     const NoiseBounds& bounds, MomentTrace& pi, int k);

/// Gain minimizing the trace of the updated bound:
/// K = tau * Pbar C^T Xi^{-1} with
/// Xi = tau^2 C Pbar C^T + R + phi C Pi_k C^T, solved via a PD
/// factorization, never an explicit inverse. Throws when Xi is numerically
/// singular, carrying a condition estimate.
Matrix optimal_gain(const Matrix& pbar, const SensorSpec& spec,
                    const Matrix& pi_k, int k);

struct UpdateResult {
  EstimatePair pair;
  Matrix gain;
};

/// Measurement update at the optimal gain:
/// x = xbar + K (y - tau C xbar), P = (I - tau K C) Pbar, re-symmetrized.
UpdateResult update(const EstimatePair& predicted, const Vector& y,
                    const SensorSpec& spec, const Matrix& pi_k, int k);

/// Full quadratic form of the updated bound for an arbitrary gain:
/// (I - tau K C) Pbar (.)^T + K (R + phi C Pi C^T) K^T. Coincides with the
/// short form at the optimal gain; used as the second route in optimality
/// and dominance checks.
Matrix joseph_updated_cov(const Matrix& pbar, const Matrix& gain,
                          const SensorSpec& spec, const Matrix& pi_k, int k);

/// A raw pair as it arrived over the channel (before inflation).
struct ReceivedPair {
  int from = 0;
  EstimatePair pair;
};

/// Covariance-intersection combination of already-inflated pairs:
/// P = (sum_m w_m P_m^{-1})^{-1}, x = P sum_m w_m P_m^{-1} x_m.
/// The implicit per-term weight matrices P w_m P_m^{-1} always sum to the
/// identity. Throws (with `label` context) when a term is not PD.
EstimatePair ci_combine(const std::vector<EstimatePair>& pairs,
                        const std::vector<double>& weights,
                        const std::string& label);

/// Fusion phase of one sensor: inflates each received pair with its link
/// bounds and combines over the in-neighborhood with the graph weights.
/// `received` must cover exactly the in-neighbor set of node i.
EstimatePair fuse(const std::vector<ReceivedPair>& received,
                  const ChannelBounds& channel, const SensorGraph& graph,
                  int i);

/// Distributed robust Kalman filter over a sensor network with corrupted
/// channels. Each tick runs prediction, measurement update and CI fusion
/// for every sensor against the same tick's data, and advances the shared
/// second-moment bound.
///
/// Sensors transmit the update-phase pair {x_upd, P_upd}, not the fused
/// pair: the consistency guarantee of the fusion weights is stated for the
/// update pair, and fusing re-fused estimates would double-count neighbor
/// information. Keep this in mind when wiring a custom transport.
class DrkfFilter {
 public:
  DrkfFilter(const SystemModel& model, const NoiseBounds& bounds,
             const SensorGraph& graph, const ChannelBounds& channel,
             std::vector<EstimatePair> initial, Matrix pi0);

  /// Advances to tick k+1: prediction and measurement update for every
  /// sensor. Returns the per-sensor pairs to transmit.
  const std::vector<EstimatePair>& predict_and_update(
      const std::vector<Vector>& measurements);

  /// Completes the tick: received[i] holds the raw pairs delivered to
  /// sensor i (covering its in-neighborhood).
  void fuse_received(const std::vector<std::vector<ReceivedPair>>& received);

  /// Delivery map for one tick: (to, from, sent pair, k) -> received pair.
  using ChannelFn = std::function<EstimatePair(int, int, const EstimatePair&,
                                               int)>;

  /// One full tick through a channel function.
  void step(const std::vector<Vector>& measurements, const ChannelFn& channel);

  int current_step() const { return k_; }
  int sensor_count() const { return static_cast<int>(states_.size()); }
  const SensorState& sensor_state(int i) const { return states_.at(i); }
  MomentTrace& moment_trace() { return pi_; }

  const SystemModel& model() const { return *model_; }
  const NoiseBounds& bounds() const { return *bounds_; }
  const SensorGraph& graph() const { return *graph_; }
  const ChannelBounds& channel_bounds() const { return *channel_; }

  /// Overrides the fused pair of sensor i for the current tick. Used by the
  /// sliding-window variant, which shares prediction/update but fuses
  /// differently.
  void commit_fused(int i, EstimatePair pair);
  bool awaiting_fusion() const { return awaiting_fusion_; }
  void finish_tick() { awaiting_fusion_ = false; }

 private:
  const SystemModel* model_;
  const NoiseBounds* bounds_;
  const SensorGraph* graph_;
  const ChannelBounds* channel_;
  MomentTrace pi_;
  std::vector<SensorState> states_;
  std::vector<EstimatePair> transmissions_;
  int k_ = 0;
  bool awaiting_fusion_ = false;
};

}  // namespace drkf
