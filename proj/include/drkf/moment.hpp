#pragma once

#include <deque>

#include "drkf/model.hpp"
#include "drkf/types.hpp"

namespace drkf {

/// Deterministic upper bound on the second moment of the state,
/// Pi_{k+1} = A_k Pi_k A_k^T + mu_k F_k Pi_k F_k^T + Q_k with Pi_0 = P0,
/// computed incrementally and cached.
///
/// Extension is single-writer; completed prefixes are immutable and may be
/// read concurrently.
class MomentTrace {
 public:
  MomentTrace(const SystemModel& model, const NoiseBounds& bounds,
              double entry_cap = 1e30);

  /// Starts the recursion from an explicit initial bound instead of
  /// bounds.P0() (scenario studies vary the two independently).
  MomentTrace(const SystemModel& model, const NoiseBounds& bounds,
              Matrix initial, double entry_cap);

  /// Pi at step k, extending the cache as needed. Unmitigated growth on
  /// unstable dynamics is legitimate, so the overflow cap is large and
  /// configurable; exceeding it aborts with the offending step index.
  const Matrix& at(int k);

  /// Pi at an already-computed step (read-only access path).
  const Matrix& computed(int k) const { return pi_.at(k); }
  int computed_through() const { return static_cast<int>(pi_.size()) - 1; }

  void ensure(int k) { (void)at(k); }

 private:
  const SystemModel* model_;
  const NoiseBounds* bounds_;
  double cap_;
  std::deque<Matrix> pi_;  // stable references under growth
};

/// Eagerly propagates the bound through step `horizon` and returns the trace.
MomentTrace propagate_pi(const SystemModel& model, const NoiseBounds& bounds,
                         int horizon);

/// State-transition product: transition(j, k) = A_{j-1} A_{j-2} ... A_k,
/// with transition(k, k) = I. Requires j >= k. Products are recomputed on
/// demand; the spans used by the filters and checkers are short.
Matrix transition(const SystemModel& model, int j, int k);

}  // namespace drkf
