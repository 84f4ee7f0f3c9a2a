#pragma once

#include <Eigen/Dense>

#include <string>

namespace drkf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Single global tolerance on the smallest eigenvalue of matrices required to
// be PSD, applied after forced symmetrization P <- (P + P^T)/2.
inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-10;

/// A state estimate together with the bound matrix certifying it.
/// The bound is an upper bound on the conditional error covariance,
/// not the covariance itself.
struct EstimatePair {
  Vector x;
  Matrix P;
};

inline Matrix symmetrized(const Matrix& m) {
  return 0.5 * (m + m.transpose());
}

/// Smallest / largest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& sym);
double max_eigenvalue(const Matrix& sym);

bool is_symmetric(const Matrix& m, double tol = kSymmetryTolerance);
bool is_psd(const Matrix& m, double tol = kPsdTolerance);

/// Loewner order: a <= b iff b - a is PSD (within tol on the smallest
/// eigenvalue of the difference).
bool loewner_leq(const Matrix& a, const Matrix& b, double tol = kPsdTolerance);

/// Symmetrize and clamp eigenvalues in [-kPsdTolerance, 0) up to zero.
/// Throws std::runtime_error (mentioning `context`) when the smallest
/// eigenvalue is below -kPsdTolerance.
Matrix sanitize_psd(const Matrix& m, const std::string& context);

}  // namespace drkf
