#include "drkf/filter.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace drkf {
namespace {

std::string sensor_name(int id) { return "sensor " + std::to_string(id); }

}  // namespace

EstimatePair predict(const EstimatePair& prev, const SystemModel& model,
                     const NoiseBounds& bounds, MomentTrace& pi, int k) {
  if (k < 1) throw std::invalid_argument("predict: requires k >= 1");
  const Matrix a = model.A(k - 1);
  const Matrix f = model.F(k - 1);
  const Matrix& pi_prev = pi.at(k - 1);
  EstimatePair out;
  out.x = a * prev.x;
  out.P = sanitize_psd(a * prev.P * a.transpose() +
                           bounds.mu(k - 1) * f * pi_prev * f.transpose() +
                           bounds.Q(k - 1),
                       "predict");
  return out;
}

Matrix optimal_gain(const Matrix& pbar, const SensorSpec& spec,
                    const Matrix& pi_k, int k) {
  const Matrix c = spec.C(k);
  const Matrix r = spec.R(k);
  const double tau = spec.tau(k);
  const double phi = spec.phi(k);

  const Matrix cp = c * pbar;  // m x n
  const Matrix xi = symmetrized(tau * tau * cp * c.transpose() + r +
                                phi * c * pi_k * c.transpose());

  // Xi >= R > 0 analytically; a user-supplied near-singular R must still
  // fail loudly, hence the explicit conditioning check on fallback.
  Eigen::LLT<Matrix> llt(xi);
  if (llt.info() == Eigen::Success) {
    return tau * llt.solve(cp).transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(xi, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmin <= 0.0 || lmax / lmin > 1e14) {
    throw std::runtime_error(
        "optimal_gain: innovation matrix is numerically singular "
        "(eigenvalue range " +
        std::to_string(lmin) + " .. " + std::to_string(lmax) + ")");
  }
  Eigen::LDLT<Matrix> ldlt(xi);
  return tau * ldlt.solve(cp).transpose();
}

UpdateResult update(const EstimatePair& predicted, const Vector& y,
                    const SensorSpec& spec, const Matrix& pi_k, int k) {
  const Matrix c = spec.C(k);
  const double tau = spec.tau(k);
  UpdateResult out;
  out.gain = optimal_gain(predicted.P, spec, pi_k, k);
  out.pair.x = predicted.x + out.gain * (y - tau * c * predicted.x);
  // Short form as run online; it equals the full quadratic form at the
  // optimal gain but can lose symmetry, so re-symmetrize.
  const Matrix n = Matrix::Identity(c.cols(), c.cols()) - tau * out.gain * c;
  out.pair.P = sanitize_psd(n * predicted.P, "update");
  return out;
}

Matrix joseph_updated_cov(const Matrix& pbar, const Matrix& gain,
                          const SensorSpec& spec, const Matrix& pi_k, int k) {
  const Matrix c = spec.C(k);
  const Matrix r = spec.R(k);
  const double tau = spec.tau(k);
  const double phi = spec.phi(k);
  const Matrix n = Matrix::Identity(pbar.rows(), pbar.rows()) - tau * gain * c;
  return symmetrized(n * pbar * n.transpose() +
                     gain * (r + phi * c * pi_k * c.transpose()) *
                         gain.transpose());
}

EstimatePair ci_combine(const std::vector<EstimatePair>& pairs,
                        const std::vector<double>& weights,
                        const std::string& label) {
  if (pairs.empty() || pairs.size() != weights.size()) {
    throw std::invalid_argument("ci_combine: " + label +
                                ": mismatched pairs and weights");
  }
  const auto n = pairs.front().P.rows();
  Matrix info = Matrix::Zero(n, n);
  Vector info_state = Vector::Zero(n);
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    if (weights[m] == 0.0) continue;
    Eigen::LLT<Matrix> llt(symmetrized(pairs[m].P));
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("ci_combine: " + label + ": term " +
                               std::to_string(m) +
                               " is not positive definite");
    }
    const Matrix inv = llt.solve(Matrix::Identity(n, n));
    info += weights[m] * inv;
    info_state += weights[m] * (inv * pairs[m].x);
  }
  Eigen::LLT<Matrix> llt(symmetrized(info));
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("ci_combine: " + label +
                             ": combined information matrix is singular");
  }
  EstimatePair out;
  out.P = sanitize_psd(llt.solve(Matrix::Identity(n, n)), "ci_combine");
  out.x = out.P * info_state;
  return out;
}

EstimatePair fuse(const std::vector<ReceivedPair>& received,
                  const ChannelBounds& channel, const SensorGraph& graph,
                  int i) {
  const std::vector<int>& nbrs = graph.neighbors(i);
  if (received.size() != nbrs.size()) {
    throw std::invalid_argument(
        "fuse: node " + std::to_string(i + 1) + " expected " +
        std::to_string(nbrs.size()) + " received pairs, got " +
        std::to_string(received.size()));
  }
  std::vector<EstimatePair> inflated;
  std::vector<double> weights;
  inflated.reserve(received.size());
  weights.reserve(received.size());
  std::vector<bool> covered(graph.size(), false);
  for (const ReceivedPair& rp : received) {
    if (graph.weight(i, rp.from) <= 0.0 || covered.at(rp.from)) {
      throw std::invalid_argument(
          "fuse: received pairs for node " + std::to_string(i + 1) +
          " do not cover its neighborhood exactly (offending sender " +
          std::to_string(rp.from + 1) + ")");
    }
    covered[rp.from] = true;
    inflated.push_back(inflate(rp.pair, i, rp.from, channel));
    weights.push_back(graph.weight(i, rp.from));
  }
  return ci_combine(inflated, weights, "node " + std::to_string(i + 1));
}

DrkfFilter::DrkfFilter(const SystemModel& model, const NoiseBounds& bounds,
                       const SensorGraph& graph, const ChannelBounds& channel,
                       std::vector<EstimatePair> initial, Matrix pi0)
    : model_(&model),
      bounds_(&bounds),
      graph_(&graph),
      channel_(&channel),
      pi_(model, bounds, std::move(pi0), 1e30),
      transmissions_(model.sensor_count()) {
  const int N = model.sensor_count();
  if (graph.size() != N) {
    throw std::invalid_argument("DrkfFilter: graph size != sensor count");
  }
  if (static_cast<int>(initial.size()) != N) {
    throw std::invalid_argument("DrkfFilter: need one initial pair per sensor");
  }
  states_.resize(N);
  for (int i = 0; i < N; ++i) {
    states_[i].id = i + 1;
    states_[i].fused.x = initial[i].x;
    states_[i].fused.P = sanitize_psd(initial[i].P, "DrkfFilter: P0i");
  }
}

const std::vector<EstimatePair>& DrkfFilter::predict_and_update(
    const std::vector<Vector>& measurements) {
  if (awaiting_fusion_) {
    throw std::logic_error("DrkfFilter: fusion of the previous tick pending");
  }
  const int N = sensor_count();
  if (static_cast<int>(measurements.size()) != N) {
    throw std::invalid_argument("DrkfFilter: need one measurement per sensor");
  }
  const int k = k_ + 1;
  pi_.ensure(k);
  for (int i = 0; i < N; ++i) {
    try {
      SensorState& st = states_[i];
      st.predicted = predict(st.fused, *model_, *bounds_, pi_, k);
      UpdateResult ur = update(st.predicted, measurements[i],
                               model_->sensor(i), pi_.at(k), k);
      st.updated = std::move(ur.pair);
      st.gain = std::move(ur.gain);
      transmissions_[i] = st.updated;
    } catch (const std::exception& e) {
      throw std::runtime_error(sensor_name(i + 1) + " at step " +
                               std::to_string(k) + ": " + e.what());
    }
  }
  k_ = k;
  awaiting_fusion_ = true;
  return transmissions_;
}

void DrkfFilter::fuse_received(
    const std::vector<std::vector<ReceivedPair>>& received) {
  if (!awaiting_fusion_) {
    throw std::logic_error("DrkfFilter: call predict_and_update first");
  }
  const int N = sensor_count();
  if (static_cast<int>(received.size()) != N) {
    throw std::invalid_argument("DrkfFilter: need received pairs per sensor");
  }
  for (int i = 0; i < N; ++i) {
    try {
      states_[i].fused = fuse(received[i], *channel_, *graph_, i);
    } catch (const std::exception& e) {
      throw std::runtime_error(sensor_name(i + 1) + " at step " +
                               std::to_string(k_) + ": " + e.what());
    }
  }
  awaiting_fusion_ = false;
}

void DrkfFilter::step(const std::vector<Vector>& measurements,
                      const ChannelFn& channel) {
  const std::vector<EstimatePair>& sent = predict_and_update(measurements);
  const int N = sensor_count();
  std::vector<std::vector<ReceivedPair>> received(N);
  for (int i = 0; i < N; ++i) {
    for (int j : graph_->neighbors(i)) {
      // A node's own pair never crosses a channel.
      received[i].push_back({j, j == i ? sent[j] : channel(i, j, sent[j], k_)});
    }
  }
  fuse_received(received);
}

void DrkfFilter::commit_fused(int i, EstimatePair pair) {
  states_.at(i).fused = std::move(pair);
}

}  // namespace drkf
