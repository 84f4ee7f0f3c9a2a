#include "drkf/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "drkf/rng.hpp"

namespace drkf {
namespace {

std::string link_name(int to, int from) {
  return "link (" + std::to_string(to + 1) + " <- " + std::to_string(from + 1) +
         ")";
}

constexpr double kEnvelopeTol = 1e-12;

}  // namespace

ChannelBounds ChannelBounds::uniform(int n, Matrix upsilon, Matrix d) {
  ChannelBounds b(n);
  if (upsilon.rows() != n || upsilon.cols() != n || !is_psd(upsilon)) {
    throw std::invalid_argument("ChannelBounds: Upsilon is not n x n PSD");
  }
  if (d.rows() != n || d.cols() != n || !is_psd(d)) {
    throw std::invalid_argument("ChannelBounds: D is not n x n PSD");
  }
  b.default_upsilon_ = std::move(upsilon);
  b.default_d_ = std::move(d);
  return b;
}

ChannelBounds ChannelBounds::zero(int n) {
  return uniform(n, Matrix::Zero(n, n), Matrix::Zero(n, n));
}

void ChannelBounds::set_link(int to, int from, Matrix upsilon, Matrix d) {
  if (upsilon.rows() != n_ || upsilon.cols() != n_ || !is_psd(upsilon) ||
      d.rows() != n_ || d.cols() != n_ || !is_psd(d)) {
    throw std::invalid_argument("ChannelBounds: per-link bounds must be PSD");
  }
  upsilon_[{to, from}] = std::move(upsilon);
  d_[{to, from}] = std::move(d);
}

const Matrix& ChannelBounds::upsilon(int to, int from) const {
  auto it = upsilon_.find({to, from});
  if (it != upsilon_.end()) return it->second;
  return to == from ? zero_ : default_upsilon_;
}

const Matrix& ChannelBounds::d(int to, int from) const {
  auto it = d_.find({to, from});
  if (it != d_.end()) return it->second;
  return to == from ? zero_ : default_d_;
}

LinkNoiseSampler::LinkNoiseSampler(const ChannelBounds& bounds,
                                   ChannelMode mode, LinkNoiseSpec spec,
                                   std::uint64_t seed)
    : bounds_(&bounds), mode_(mode), spec_(spec), seed_(seed) {}

Vector LinkNoiseSampler::sample_vector_noise(int to, int from, int k) {
  const int n = bounds_->n();
  RngStream rng(derive_seed(
      seed_, {tag_value(StreamTag::kChannelVector), static_cast<uint64_t>(k),
              static_cast<uint64_t>(to), static_cast<uint64_t>(from)}));
  const Matrix& upsilon = bounds_->upsilon(to, from);

  double halfwidth = spec_.vector_halfwidth;
  if (mode_ == ChannelMode::kBoundRespecting) {
    // |eps|^2 <= n * halfwidth^2 <= lambda_min(Upsilon) keeps eps eps^T
    // below Upsilon for any direction.
    halfwidth = std::sqrt(std::max(0.0, min_eigenvalue(upsilon)) / n);
  }

  Vector eps(n);
  auto draw = [&] {
    for (int a = 0; a < n; ++a) eps(a) = rng.uniform(-halfwidth, halfwidth);
  };
  draw();
  if (mode_ == ChannelMode::kPaperLiteral || halfwidth == 0.0) {
    if (halfwidth == 0.0) eps.setZero();
    return eps;
  }

  // eps eps^T <= Upsilon is equivalent to eps^T Upsilon^{-1} eps <= 1 for a
  // rank-one left side. Resample stray violations, then scale.
  Eigen::LDLT<Matrix> ldlt(upsilon);
  auto quad = [&](const Vector& e) {
    return e.dot(ldlt.solve(e));
  };
  for (int attempt = 0; attempt < kMaxResample; ++attempt) {
    if (quad(eps) <= 1.0 + kEnvelopeTol) return eps;
    draw();
  }
  const double q = quad(eps);
  if (q > 1.0) {
    eps /= std::sqrt(q);
    ++clip_events_;
  }
  return eps;
}

Matrix LinkNoiseSampler::sample_matrix_noise(int to, int from, int k) {
  const int n = bounds_->n();
  RngStream rng(derive_seed(
      seed_, {tag_value(StreamTag::kChannelMatrix), static_cast<uint64_t>(k),
              static_cast<uint64_t>(to), static_cast<uint64_t>(from)}));
  const Matrix& d_bound = bounds_->d(to, from);

  double halfwidth = spec_.matrix_halfwidth;
  if (mode_ == ChannelMode::kBoundRespecting) {
    // Gershgorin: symmetric entries within min-diagonal/n keep the spectral
    // envelope -D <= noise <= D for diagonally dominant bounds.
    halfwidth = d_bound.diagonal().minCoeff() / n;
  }

  Matrix noise(n, n);
  auto draw = [&] {
    for (int r = 0; r < n; ++r) {
      for (int c = r; c < n; ++c) {
        noise(r, c) = rng.uniform(-halfwidth, halfwidth);
        noise(c, r) = noise(r, c);
      }
    }
  };
  draw();
  if (mode_ == ChannelMode::kPaperLiteral || halfwidth == 0.0) {
    if (halfwidth == 0.0) noise.setZero();
    return noise;
  }

  auto envelope_ok = [&](const Matrix& m) {
    return min_eigenvalue(symmetrized(d_bound - m)) >= -kEnvelopeTol &&
           min_eigenvalue(symmetrized(d_bound + m)) >= -kEnvelopeTol;
  };
  for (int attempt = 0; attempt < kMaxResample; ++attempt) {
    if (envelope_ok(noise)) return noise;
    draw();
  }
  // Deterministic scaling into the envelope: shrink until both one-sided
  // checks pass.
  double scale = 1.0;
  for (int halvings = 0; halvings < 60 && !envelope_ok(scale * noise);
       ++halvings) {
    scale *= 0.5;
  }
  noise *= scale;
  ++clip_events_;
  return noise;
}

EstimatePair corrupt(const EstimatePair& sent, int to, int from,
                     LinkNoiseSampler& sampler, int k) {
  EstimatePair out;
  out.x = sent.x + sampler.sample_vector_noise(to, from, k);
  out.P = sent.P + sampler.sample_matrix_noise(to, from, k);
  return out;
}

EstimatePair inflate(const EstimatePair& received, int to, int from,
                     const ChannelBounds& bounds) {
  EstimatePair out;
  out.x = received.x;
  out.P = symmetrized(received.P + bounds.d(to, from) +
                      bounds.upsilon(to, from));
  if (min_eigenvalue(out.P) <= 0.0) {
    throw std::runtime_error("inflate: bound matrix on " +
                             link_name(to, from) +
                             " is not positive definite after inflation");
  }
  return out;
}

}  // namespace drkf
