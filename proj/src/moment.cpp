#include "drkf/moment.hpp"

#include <stdexcept>
#include <string>

namespace drkf {

MomentTrace::MomentTrace(const SystemModel& model, const NoiseBounds& bounds,
                         double entry_cap)
    : MomentTrace(model, bounds, bounds.P0(), entry_cap) {}

MomentTrace::MomentTrace(const SystemModel& model, const NoiseBounds& bounds,
                         Matrix initial, double entry_cap)
    : model_(&model), bounds_(&bounds), cap_(entry_cap) {
  if (initial.rows() != model.n() || initial.cols() != model.n()) {
    throw std::invalid_argument("MomentTrace: initial bound has wrong shape");
  }
  pi_.push_back(sanitize_psd(initial, "MomentTrace: initial"));
}

const Matrix& MomentTrace::at(int k) {
  if (k < 0) throw std::invalid_argument("MomentTrace: negative step");
  while (computed_through() < k) {
    const int j = computed_through();
    const Matrix& pi = pi_.back();
    const Matrix a = model_->A(j);
    const Matrix f = model_->F(j);
    Matrix next = a * pi * a.transpose() +
                  bounds_->mu(j) * f * pi * f.transpose() + bounds_->Q(j);
    next = symmetrized(next);
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > cap_) {
      throw std::runtime_error(
          "MomentTrace: bound exceeded the magnitude cap at step " +
          std::to_string(j + 1));
    }
    pi_.push_back(std::move(next));
  }
  return pi_[k];
}

MomentTrace propagate_pi(const SystemModel& model, const NoiseBounds& bounds,
                         int horizon) {
  MomentTrace trace(model, bounds);
  trace.ensure(horizon);
  return trace;
}

Matrix transition(const SystemModel& model, int j, int k) {
  if (j < k) {
    throw std::invalid_argument("transition: requires j >= k, got j=" +
                                std::to_string(j) + " k=" + std::to_string(k));
  }
  Matrix phi = Matrix::Identity(model.n(), model.n());
  // Left-multiplications in time order: Phi_{j,k} = A_{j-1} Phi_{j-1,k}.
  for (int t = k; t < j; ++t) {
    phi = model.A(t) * phi;
  }
  return phi;
}

}  // namespace drkf
