#pragma once

#include <vector>

#include "drkf/model.hpp"
#include "drkf/moment.hpp"
#include "drkf/types.hpp"

namespace drkf {

/// All sensors of a network viewed as one centralized sensor: stacked
/// measurement map, block-diagonal noise bound, per-block fading statistics.
class StackedSensor {
 public:
  explicit StackedSensor(const SystemModel& model);

  int m_total() const { return m_total_; }
  int block_count() const { return static_cast<int>(offsets_.size()); }
  int offset(int i) const { return offsets_.at(i); }

  Matrix C(int k) const;      // stacked rows
  Matrix R(int k) const;      // block diagonal
  Matrix C_faded(int k) const;  // rows pre-scaled by each block's tau

  /// Block-diagonal fading inflation: phi_i C_i Pi C_i^T per block.
  Matrix fading_inflation(int k, const Matrix& pi_k) const;

  Vector stack(const std::vector<Vector>& per_sensor) const;

 private:
  const SystemModel* model_;
  std::vector<int> offsets_;
  int m_total_ = 0;
};

/// Textbook centralized Kalman filter on the stacked measurements: nominal
/// dynamics, exact Q, fading and multiplicative noise ignored. Serves as the
/// reduction oracle and as the non-robust comparison curve.
EstimatePair ckf_step(const EstimatePair& prev, const Vector& y_stacked,
                      const SystemModel& model, const MatrixFn& Q,
                      const StackedSensor& stacked, int k);

/// Centralized robust Kalman filter: the single-node specialization of the
/// distributed predict/update with all sensor blocks stacked, clean channel
/// and no fusion. Per-block tau and phi enter the innovation matrix as
/// block-diagonal contributions.
EstimatePair crkf_step(const EstimatePair& prev, const Vector& y_stacked,
                       const SystemModel& model, const NoiseBounds& bounds,
                       const StackedSensor& stacked, MomentTrace& pi, int k);

}  // namespace drkf
