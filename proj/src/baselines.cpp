#include "drkf/baselines.hpp"

#include <stdexcept>

namespace drkf {

StackedSensor::StackedSensor(const SystemModel& model) : model_(&model) {
  offsets_.reserve(model.sensor_count());
  for (int i = 0; i < model.sensor_count(); ++i) {
    offsets_.push_back(m_total_);
    m_total_ += model.sensor(i).m;
  }
  if (m_total_ == 0) {
    throw std::invalid_argument("StackedSensor: no measurements to stack");
  }
}

Matrix StackedSensor::C(int k) const {
  Matrix c(m_total_, model_->n());
  for (int i = 0; i < model_->sensor_count(); ++i) {
    const SensorSpec& s = model_->sensor(i);
    c.middleRows(offsets_[i], s.m) = s.C(k);
  }
  return c;
}

Matrix StackedSensor::R(int k) const {
  Matrix r = Matrix::Zero(m_total_, m_total_);
  for (int i = 0; i < model_->sensor_count(); ++i) {
    const SensorSpec& s = model_->sensor(i);
    r.block(offsets_[i], offsets_[i], s.m, s.m) = s.R(k);
  }
  return r;
}

Matrix StackedSensor::C_faded(int k) const {
  Matrix c(m_total_, model_->n());
  for (int i = 0; i < model_->sensor_count(); ++i) {
    const SensorSpec& s = model_->sensor(i);
    c.middleRows(offsets_[i], s.m) = s.tau(k) * s.C(k);
  }
  return c;
}

Matrix StackedSensor::fading_inflation(int k, const Matrix& pi_k) const {
  Matrix out = Matrix::Zero(m_total_, m_total_);
  for (int i = 0; i < model_->sensor_count(); ++i) {
    const SensorSpec& s = model_->sensor(i);
    const Matrix ci = s.C(k);
    out.block(offsets_[i], offsets_[i], s.m, s.m) =
        s.phi(k) * ci * pi_k * ci.transpose();
  }
  return out;
}

Vector StackedSensor::stack(const std::vector<Vector>& per_sensor) const {
  if (static_cast<int>(per_sensor.size()) != block_count()) {
    throw std::invalid_argument("StackedSensor: wrong number of blocks");
  }
  Vector y(m_total_);
  for (int i = 0; i < block_count(); ++i) {
    y.segment(offsets_[i], per_sensor[i].size()) = per_sensor[i];
  }
  return y;
}

EstimatePair ckf_step(const EstimatePair& prev, const Vector& y_stacked,
                      const SystemModel& model, const MatrixFn& Q,
                      const StackedSensor& stacked, int k) {
  if (k < 1) throw std::invalid_argument("ckf_step: requires k >= 1");
  const Matrix a = model.A(k - 1);
  const Vector xbar = a * prev.x;
  // Nominal dynamics and exact Q; the gap to the robust filters is the
  // ignored fading and multiplicative terms.
  const Matrix pbar =
      symmetrized(a * prev.P * a.transpose() + Q(k - 1));
  const Matrix c = stacked.C(k);
  const Matrix s = symmetrized(c * pbar * c.transpose() + stacked.R(k));
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("ckf_step: innovation covariance is singular");
  }
  const Matrix gain = llt.solve(c * pbar).transpose();
  EstimatePair out;
  out.x = xbar + gain * (y_stacked - c * xbar);
  const Matrix n = Matrix::Identity(model.n(), model.n()) - gain * c;
  out.P = sanitize_psd(n * pbar, "ckf_step: update");
  return out;
}

EstimatePair crkf_step(const EstimatePair& prev, const Vector& y_stacked,
                       const SystemModel& model, const NoiseBounds& bounds,
                       const StackedSensor& stacked, MomentTrace& pi, int k) {
  if (k < 1) throw std::invalid_argument("crkf_step: requires k >= 1");
  const Matrix a = model.A(k - 1);
  const Matrix f = model.F(k - 1);
  EstimatePair out;
  out.x = a * prev.x;
  Matrix pbar = sanitize_psd(
      a * prev.P * a.transpose() +
          bounds.mu(k - 1) * f * pi.at(k - 1) * f.transpose() +
          bounds.Q(k - 1),
      "crkf_step: prediction");

  const Matrix cbar = stacked.C_faded(k);
  const Matrix xi = symmetrized(cbar * pbar * cbar.transpose() +
                                stacked.R(k) +
                                stacked.fading_inflation(k, pi.at(k)));
  Eigen::LLT<Matrix> llt(xi);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("crkf_step: innovation matrix is singular");
  }
  const Matrix gain = llt.solve(cbar * pbar).transpose();
  out.x = out.x + gain * (y_stacked - cbar * out.x);
  const Matrix n = Matrix::Identity(model.n(), model.n()) - gain * cbar;
  out.P = sanitize_psd(n * pbar, "crkf_step: update");
  return out;
}

}  // namespace drkf
