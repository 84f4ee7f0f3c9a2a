#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "drkf/types.hpp"

namespace drkf {

// Time-varying quantities are pure functions of the step index k (closures
// over scenario parameters), not stored arrays, so long horizons and large
// networks cost no memory.
using MatrixFn = std::function<Matrix(int)>;
using ScalarFn = std::function<double(int)>;

MatrixFn constant_matrix(Matrix m);
ScalarFn constant_scalar(double v);

/// One sensor of the network: measurement map C, noise bound R, fading mean
/// tau in (0,1] and fading variance bound phi >= 0, all per step.
struct SensorSpec {
  int id = 0;  // 1-based label used in reports and CSV output
  int m = 0;   // measurement dimension
  MatrixFn C;
  MatrixFn R;
  ScalarFn tau;
  ScalarFn phi;
};

struct SystemModelOptions {
  double condition_cap = 1e12;  // invertibility cap for the F matrices
};

/// Linear system x_{k+1} = (A_k + F_k eps_k) x_k + w_k observed through
/// y_{k,i} = gamma_{k,i} C_{k,i} x_k + v_{k,i}.
///
/// All dimension checks happen here at construction, never inside the
/// filter loop.
class SystemModel {
 public:
  SystemModel(int n, int horizon, MatrixFn A, MatrixFn F,
              std::vector<SensorSpec> sensors, SystemModelOptions opts = {});

  int n() const { return n_; }
  int horizon() const { return horizon_; }
  int sensor_count() const { return static_cast<int>(sensors_.size()); }

  Matrix A(int k) const { return A_(k); }
  Matrix F(int k) const { return F_(k); }

  const SensorSpec& sensor(int i) const { return sensors_.at(i); }  // 0-based
  const std::vector<SensorSpec>& sensors() const { return sensors_; }

 private:
  int n_;
  int horizon_;
  MatrixFn A_;
  MatrixFn F_;
  std::vector<SensorSpec> sensors_;
};

struct NoiseBoundsOptions {
  double q_floor = 1e-12;  // required lower bound on inf_k lambda_min(Q_k)
};

/// Moment bounds of Assumption-style knowledge: process noise bound Q_k,
/// multiplicative noise variance bound mu_k, initial second-moment bound P0
/// and per-sensor initial error bounds P0i.
class NoiseBounds {
 public:
  NoiseBounds(MatrixFn Q, ScalarFn mu, Matrix P0, std::vector<Matrix> P0i,
              int horizon, NoiseBoundsOptions opts = {});

  Matrix Q(int k) const { return Q_(k); }
  double mu(int k) const { return mu_(k); }
  const Matrix& P0() const { return P0_; }
  const Matrix& P0i(int i) const { return P0i_.at(i); }
  int sensor_count() const { return static_cast<int>(P0i_.size()); }

 private:
  MatrixFn Q_;
  ScalarFn mu_;
  Matrix P0_;
  std::vector<Matrix> P0i_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool valid() const { return violations.empty(); }
};

/// Weighted digraph of the sensor network. weight(i, j) > 0 means node i
/// receives from node j; every node must listen to itself.
class SensorGraph {
 public:
  explicit SensorGraph(Matrix weights);

  int size() const { return static_cast<int>(weights_.rows()); }
  double weight(int i, int j) const { return weights_(i, j); }
  const Matrix& weights() const { return weights_; }

  /// In-neighbors of node i (indices j with weight(i, j) > 0), self included
  /// whenever the diagonal is positive.
  const std::vector<int>& neighbors(int i) const { return neighbors_.at(i); }

 private:
  Matrix weights_;
  std::vector<std::vector<int>> neighbors_;
};

/// Checks a_{i,i} > 0, a_{i,j} >= 0 and unit row sums. Violations are report
/// entries, not failures.
ValidationReport validate_graph(const SensorGraph& g);

/// True iff every ordered node pair is joined by a directed path of
/// positive-weight links (reachability closure).
bool is_strongly_connected(const SensorGraph& g);

/// Metropolis weights on an undirected topology: off-diagonal weight
/// 1/max(d_i, d_j) per edge and the diagonal absorbs the remainder. The
/// degree d_i counts the node itself (neighbor sets include self), which
/// keeps every row stochastic. Multi-edges and self-edges are rejected.
SensorGraph metropolis_weights(
    const std::vector<std::pair<int, int>>& undirected_edges, int node_count);

}  // namespace drkf
