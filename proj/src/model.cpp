#include "drkf/model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace drkf {
namespace {

std::string dim_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

MatrixFn constant_matrix(Matrix m) {
  return [m = std::move(m)](int) { return m; };
}

ScalarFn constant_scalar(double v) {
  return [v](int) { return v; };
}

SystemModel::SystemModel(int n, int horizon, MatrixFn A, MatrixFn F,
                         std::vector<SensorSpec> sensors,
                         SystemModelOptions opts)
    : n_(n),
      horizon_(horizon),
      A_(std::move(A)),
      F_(std::move(F)),
      sensors_(std::move(sensors)) {
  if (n <= 0) throw std::invalid_argument("SystemModel: n must be positive");
  if (horizon < 0) throw std::invalid_argument("SystemModel: negative horizon");
  if (!A_ || !F_) throw std::invalid_argument("SystemModel: missing A or F");

  for (int k = 0; k <= horizon_; ++k) {
    const Matrix a = A_(k);
    if (a.rows() != n_ || a.cols() != n_) {
      throw std::invalid_argument("SystemModel: A(" + std::to_string(k) +
                                  ") is " + dim_str(a) + ", expected " +
                                  std::to_string(n_) + "x" +
                                  std::to_string(n_));
    }
    const Matrix f = F_(k);
    if (f.rows() != n_ || f.cols() != n_) {
      throw std::invalid_argument("SystemModel: F(" + std::to_string(k) +
                                  ") is " + dim_str(f));
    }
    Eigen::JacobiSVD<Matrix> svd(f);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > opts.condition_cap) {
      throw std::invalid_argument(
          "SystemModel: F(" + std::to_string(k) +
          ") is singular or ill-conditioned beyond the configured cap");
    }
  }

  for (std::size_t s = 0; s < sensors_.size(); ++s) {
    SensorSpec& spec = sensors_[s];
    if (!spec.C || !spec.R || !spec.tau || !spec.phi) {
      throw std::invalid_argument("SensorSpec " + std::to_string(s + 1) +
                                  ": missing C, R, tau or phi");
    }
    if (spec.id == 0) spec.id = static_cast<int>(s) + 1;
    const std::string name = "sensor " + std::to_string(spec.id);
    spec.m = static_cast<int>(spec.C(0).rows());
    for (int k = 0; k <= horizon_; ++k) {
      const Matrix c = spec.C(k);
      if (c.rows() != spec.m || c.cols() != n_) {
        throw std::invalid_argument(name + ": C(" + std::to_string(k) +
                                    ") is " + dim_str(c));
      }
      const Matrix r = spec.R(k);
      if (r.rows() != spec.m || r.cols() != spec.m || !is_psd(r)) {
        throw std::invalid_argument(name + ": R(" + std::to_string(k) +
                                    ") is not a " + std::to_string(spec.m) +
                                    "x" + std::to_string(spec.m) +
                                    " PSD matrix");
      }
      const double tau = spec.tau(k);
      if (!(tau > 0.0 && tau <= 1.0)) {
        throw std::invalid_argument(name + ": tau(" + std::to_string(k) +
                                    ") outside (0, 1]");
      }
      if (spec.phi(k) < 0.0) {
        throw std::invalid_argument(name + ": phi(" + std::to_string(k) +
                                    ") negative");
      }
    }
  }
}

NoiseBounds::NoiseBounds(MatrixFn Q, ScalarFn mu, Matrix P0,
                         std::vector<Matrix> P0i, int horizon,
                         NoiseBoundsOptions opts)
    : Q_(std::move(Q)), mu_(std::move(mu)), P0_(std::move(P0)),
      P0i_(std::move(P0i)) {
  if (!Q_ || !mu_) throw std::invalid_argument("NoiseBounds: missing Q or mu");
  const int n = static_cast<int>(P0_.rows());
  if (P0_.cols() != n || !is_psd(P0_)) {
    throw std::invalid_argument("NoiseBounds: P0 is not symmetric PSD");
  }
  for (std::size_t i = 0; i < P0i_.size(); ++i) {
    if (P0i_[i].rows() != n || P0i_[i].cols() != n || !is_psd(P0i_[i])) {
      throw std::invalid_argument("NoiseBounds: P0i[" + std::to_string(i + 1) +
                                  "] is not symmetric PSD");
    }
  }
  for (int k = 0; k <= horizon; ++k) {
    const Matrix q = Q_(k);
    if (q.rows() != n || q.cols() != n || !is_symmetric(q)) {
      throw std::invalid_argument("NoiseBounds: Q(" + std::to_string(k) +
                                  ") has wrong shape or is asymmetric");
    }
    if (min_eigenvalue(symmetrized(q)) < opts.q_floor) {
      throw std::invalid_argument(
          "NoiseBounds: Q(" + std::to_string(k) +
          ") falls below the configured positive-definiteness floor");
    }
    if (mu_(k) < 0.0) {
      throw std::invalid_argument("NoiseBounds: mu(" + std::to_string(k) +
                                  ") negative");
    }
  }
}

SensorGraph::SensorGraph(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols()) {
    throw std::invalid_argument("SensorGraph: weight matrix must be square");
  }
  const int n = size();
  neighbors_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (weights_(i, j) > 0.0) neighbors_[i].push_back(j);
    }
  }
}

ValidationReport validate_graph(const SensorGraph& g) {
  ValidationReport report;
  const int n = g.size();
  constexpr double kRowSumTol = 1e-12;
  for (int i = 0; i < n; ++i) {
    if (!(g.weight(i, i) > 0.0)) {
      report.violations.push_back("zero or negative diagonal at node " +
                                  std::to_string(i + 1));
    }
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = g.weight(i, j);
      if (w < 0.0) {
        std::ostringstream os;
        os << "negative weight at (" << i + 1 << ", " << j + 1 << "): " << w;
        report.violations.push_back(os.str());
      }
      row_sum += w;
    }
    if (std::abs(row_sum - 1.0) > kRowSumTol) {
      std::ostringstream os;
      os << "row " << i + 1 << " sums to " << row_sum;
      report.violations.push_back(os.str());
    }
  }
  return report;
}

bool is_strongly_connected(const SensorGraph& g) {
  const int n = g.size();
  // Boolean reachability closure over links with positive weight.
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    reach[i][i] = true;
    for (int j = 0; j < n; ++j) {
      if (g.weight(i, j) > 0.0) reach[i][j] = true;
    }
  }
  for (int m = 0; m < n; ++m) {
    for (int i = 0; i < n; ++i) {
      if (!reach[i][m]) continue;
      for (int j = 0; j < n; ++j) {
        if (reach[m][j]) reach[i][j] = true;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!reach[i][j]) return false;
    }
  }
  return true;
}

SensorGraph metropolis_weights(
    const std::vector<std::pair<int, int>>& undirected_edges, int node_count) {
  if (node_count <= 0) {
    throw std::invalid_argument("metropolis_weights: empty node set");
  }
  std::set<std::pair<int, int>> seen;
  std::vector<std::vector<int>> adjacency(node_count);
  for (auto [a, b] : undirected_edges) {
    if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
      throw std::invalid_argument("metropolis_weights: edge endpoint out of range");
    }
    if (a == b) {
      throw std::invalid_argument("metropolis_weights: explicit self-edge");
    }
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second) {
      throw std::invalid_argument("metropolis_weights: multi-edge (" +
                                  std::to_string(a + 1) + ", " +
                                  std::to_string(b + 1) + ")");
    }
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }

  // d_i counts the node itself.
  std::vector<int> degree(node_count);
  for (int i = 0; i < node_count; ++i) {
    degree[i] = static_cast<int>(adjacency[i].size()) + 1;
  }

  Matrix w = Matrix::Zero(node_count, node_count);
  for (int i = 0; i < node_count; ++i) {
    double off = 0.0;
    for (int j : adjacency[i]) {
      w(i, j) = 1.0 / std::max(degree[i], degree[j]);
      off += w(i, j);
    }
    w(i, i) = 1.0 - off;
  }
  return SensorGraph(std::move(w));
}

}  // namespace drkf
