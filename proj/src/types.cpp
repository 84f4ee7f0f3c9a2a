#include "drkf/types.hpp"

#include <stdexcept>

namespace drkf {

double min_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool is_psd(const Matrix& m, double tol) {
  if (!is_symmetric(m, 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff()))) {
    return false;
  }
  return min_eigenvalue(symmetrized(m)) >= -tol;
}

bool loewner_leq(const Matrix& a, const Matrix& b, double tol) {
  return min_eigenvalue(symmetrized(b - a)) >= -tol;
}

Matrix sanitize_psd(const Matrix& m, const std::string& context) {
  Matrix s = symmetrized(m);
  const double lmin = min_eigenvalue(s);
  if (lmin < -kPsdTolerance) {
    throw std::runtime_error(context + ": matrix is not PSD (min eigenvalue " +
                             std::to_string(lmin) + ")");
  }
  if (lmin < 0.0) {
    s.diagonal().array() += -lmin;
  }
  return s;
}

}  // namespace drkf
