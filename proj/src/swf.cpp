#include "drkf/swf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace drkf {

WindowBuffer::WindowBuffer(int capacity, std::vector<int> neighbors)
    : capacity_(capacity) {
  if (capacity < 1) {
    throw std::invalid_argument("WindowBuffer: capacity must be >= 1");
  }
  for (int j : neighbors) slots_[j];
}

void WindowBuffer::push(int from, int time, EstimatePair inflated) {
  auto it = slots_.find(from);
  if (it == slots_.end()) {
    throw std::invalid_argument("WindowBuffer: unknown neighbor " +
                                std::to_string(from + 1));
  }
  std::deque<WindowEntry>& q = it->second;
  if (!q.empty() && q.back().time + 1 != time) {
    throw std::logic_error("WindowBuffer: entries must stay contiguous");
  }
  q.push_back({time, std::move(inflated)});
  while (static_cast<int>(q.size()) > capacity_) q.pop_front();
}

int WindowBuffer::available(int from) const {
  auto it = slots_.find(from);
  return it == slots_.end() ? 0 : static_cast<int>(it->second.size());
}

const WindowEntry& WindowBuffer::entry(int from, int age) const {
  const std::deque<WindowEntry>& q = slots_.at(from);
  if (age < 0 || age >= static_cast<int>(q.size())) {
    throw std::out_of_range("WindowBuffer: no entry of age " +
                            std::to_string(age));
  }
  return q[q.size() - 1 - static_cast<std::size_t>(age)];
}

EstimatePair window_predict(const EstimatePair& inflated, int entry_time,
                            int target_time, const SystemModel& model,
                            const NoiseBounds& bounds, MomentTrace& pi) {
  if (entry_time > target_time) {
    throw std::invalid_argument("window_predict: entry is in the future");
  }
  EstimatePair out = inflated;
  for (int t = entry_time; t < target_time; ++t) {
    const Matrix a = model.A(t);
    const Matrix f = model.F(t);
    out.x = a * out.x;
    out.P = symmetrized(a * out.P * a.transpose() + bounds.Q(t) +
                        bounds.mu(t) * f * pi.at(t) * f.transpose());
  }
  return out;
}

std::vector<double> project_to_simplex(std::vector<double> v) {
  // Sort-based projection; ties and all-negative inputs handled by the
  // running-threshold form.
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double threshold = 0.0;
  int support = 0;
  for (std::size_t m = 0; m < u.size(); ++m) {
    cumulative += u[m];
    const double candidate = (cumulative - 1.0) / static_cast<double>(m + 1);
    if (u[m] - candidate > 0.0) {
      threshold = candidate;
      support = static_cast<int>(m + 1);
    }
  }
  if (support == 0) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    return v;
  }
  for (double& x : v) x = std::max(0.0, x - threshold);
  return v;
}

namespace {

struct AffineMatrixForm {
  std::vector<Matrix> omega;  // candidate information matrices
  Matrix base;                // baseline information matrix (subtracted)

  Matrix eval(const std::vector<double>& a) const {
    Matrix j = -base;
    for (std::size_t m = 0; m < omega.size(); ++m) j += a[m] * omega[m];
    return symmetrized(j);
  }
};

Matrix pd_inverse(const Matrix& m, const std::string& context) {
  Eigen::LLT<Matrix> llt(symmetrized(m));
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(context + ": matrix is not positive definite");
  }
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

struct EigPair {
  double value;
  Vector vector;
};

EigPair min_eig_pair(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

}  // namespace

WeightOptResult optimize_weights(const std::vector<Matrix>& candidate_bounds,
                                 const std::vector<Matrix>& baseline_bounds,
                                 const std::vector<double>& baseline_weights,
                                 const WeightOptions& opts) {
  if (candidate_bounds.empty()) {
    throw std::invalid_argument("optimize_weights: no candidates");
  }
  if (baseline_bounds.size() != baseline_weights.size()) {
    throw std::invalid_argument(
        "optimize_weights: baseline bounds/weights mismatch");
  }
  const auto n = candidate_bounds.front().rows();

  AffineMatrixForm form;
  form.omega.reserve(candidate_bounds.size());
  for (std::size_t m = 0; m < candidate_bounds.size(); ++m) {
    form.omega.push_back(pd_inverse(
        candidate_bounds[m],
        "optimize_weights: candidate " + std::to_string(m)));
  }
  form.base = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < baseline_bounds.size(); ++j) {
    form.base += baseline_weights[j] *
                 pd_inverse(baseline_bounds[j],
                            "optimize_weights: baseline " + std::to_string(j));
  }

  WeightOptResult result;
  result.epsilon = opts.epsilon_scale * max_eigenvalue(symmetrized(form.base));
  const double eps = result.epsilon;
  const std::size_t dims = form.omega.size();

  // Phase 1 - feasibility: maximize the smallest eigenvalue of J(a) over the
  // simplex (concave), stopping as soon as it clears eps.
  std::vector<double> a(dims, 1.0 / static_cast<double>(dims));
  EigPair cur = min_eig_pair(form.eval(a));
  double step = 1.0;
  int iter = 0;
  while (cur.value <= eps && iter < opts.max_iterations) {
    ++iter;
    std::vector<double> grad(dims);
    for (std::size_t m = 0; m < dims; ++m) {
      grad[m] = cur.vector.dot(form.omega[m] * cur.vector);
    }
    bool advanced = false;
    double t = step;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> trial(dims);
      for (std::size_t m = 0; m < dims; ++m) trial[m] = a[m] + t * grad[m];
      trial = project_to_simplex(std::move(trial));
      const EigPair trial_eig = min_eig_pair(form.eval(trial));
      if (trial_eig.value > cur.value + 1e-18) {
        a = std::move(trial);
        cur = trial_eig;
        step = t * 2.0;
        advanced = true;
        break;
      }
      t *= 0.5;
    }
    if (!advanced) break;  // stationary: the maximum is (numerically) reached
  }
  if (cur.value <= eps) {
    result.status = WeightStatus::kInfeasible;
    return result;
  }

  // Phase 2 - minimize Tr(J^{-1}) over the feasible part of the simplex.
  auto objective = [&](const std::vector<double>& w, double* lmin) -> double {
    const Matrix j = form.eval(w);
    const double l = min_eigenvalue(j);
    if (lmin) *lmin = l;
    if (l < eps * (1.0 - 1e-9)) return std::numeric_limits<double>::infinity();
    return pd_inverse(j, "optimize_weights: J").trace();
  };

  double lmin = cur.value;
  double f = objective(a, &lmin);
  step = 1.0;
  bool converged = false;
  for (iter = 0; iter < opts.max_iterations; ++iter) {
    const Matrix jinv = pd_inverse(form.eval(a), "optimize_weights: J");
    std::vector<double> grad(dims);
    for (std::size_t m = 0; m < dims; ++m) {
      grad[m] = -(jinv * form.omega[m] * jinv).trace();
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    if (gnorm == 0.0) {
      converged = true;
      break;
    }

    bool advanced = false;
    double t = step / std::max(1.0, gnorm);
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> trial(dims);
      for (std::size_t m = 0; m < dims; ++m) trial[m] = a[m] - t * grad[m];
      trial = project_to_simplex(std::move(trial));
      double move = 0.0;
      for (std::size_t m = 0; m < dims; ++m) {
        move += (trial[m] - a[m]) * (trial[m] - a[m]);
      }
      if (move <= 1e-30) break;  // projection pinned us to the current point
      double directional = 0.0;
      for (std::size_t m = 0; m < dims; ++m) {
        directional += grad[m] * (trial[m] - a[m]);
      }
      const double f_trial = objective(trial, nullptr);
      if (f_trial <= f + opts.armijo_c * directional) {
        const double delta = std::abs(f - f_trial);
        a = std::move(trial);
        f = f_trial;
        step = std::min(t * std::max(1.0, gnorm) * 2.0, 1e6);
        advanced = true;
        if (delta <= opts.rel_tol * std::max(1.0, std::abs(f))) {
          converged = true;
        }
        break;
      }
      t *= 0.5;
    }
    if (!advanced) {
      converged = true;  // no feasible descent direction: stationary point
      break;
    }
    if (converged) break;
  }

  result.weights = a;
  result.objective = f;
  result.status =
      converged ? WeightStatus::kOptimized : WeightStatus::kIterationLimit;
  return result;
}

WindowWeights fallback_window_weights(
    const std::vector<WindowCandidate>& candidates, const SensorGraph& graph,
    int i) {
  WindowWeights w;
  w.source = WindowWeights::Source::kFallback;
  w.a.reserve(candidates.size());
  for (const WindowCandidate& cand : candidates) {
    w.a.push_back(cand.age == 0 ? graph.weight(i, cand.from) : 0.0);
  }
  return w;
}

EstimatePair swf_fuse(const std::vector<WindowCandidate>& candidates,
                      const std::vector<double>& weights) {
  if (candidates.size() != weights.size()) {
    throw std::invalid_argument("swf_fuse: candidates/weights mismatch");
  }
  std::vector<EstimatePair> pairs;
  pairs.reserve(candidates.size());
  for (const WindowCandidate& cand : candidates) {
    if (min_eigenvalue(symmetrized(cand.pair.P)) <= 0.0) {
      throw std::runtime_error(
          "swf_fuse: candidate from sensor " + std::to_string(cand.from + 1) +
          " at age " + std::to_string(cand.age) + " is not positive definite");
    }
    pairs.push_back(cand.pair);
  }
  return ci_combine(pairs, weights, "window fusion");
}

SwfFilter::SwfFilter(const SystemModel& model, const NoiseBounds& bounds,
                     const SensorGraph& graph, const ChannelBounds& channel,
                     std::vector<EstimatePair> initial, Matrix pi0,
                     SwfOptions opts)
    : core_(model, bounds, graph, channel, std::move(initial), std::move(pi0)),
      L_(opts.window),
      wopts_(opts.weights) {
  if (L_ < 1) throw std::invalid_argument("SwfFilter: window must be >= 1");
  const int N = core_.sensor_count();
  if (opts.interval.empty()) {
    delta_.assign(N, 1);
  } else if (opts.interval.size() == 1) {
    delta_.assign(N, opts.interval.front());
  } else if (static_cast<int>(opts.interval.size()) == N) {
    delta_ = opts.interval;
  } else {
    throw std::invalid_argument("SwfFilter: interval list size mismatch");
  }
  for (int d : delta_) {
    if (d < 1) throw std::invalid_argument("SwfFilter: interval must be >= 1");
  }
  buffers_.reserve(N);
  for (int i = 0; i < N; ++i) {
    buffers_.emplace_back(L_, graph.neighbors(i));
  }
}

const std::vector<EstimatePair>& SwfFilter::predict_and_update(
    const std::vector<Vector>& measurements) {
  return core_.predict_and_update(measurements);
}

void SwfFilter::fuse_sensor(int i, const std::vector<ReceivedPair>& received) {
  const SensorGraph& graph = core_.graph();
  const std::vector<int>& nbrs = graph.neighbors(i);
  if (received.size() != nbrs.size()) {
    throw std::invalid_argument("SwfFilter: node " + std::to_string(i + 1) +
                                " received pairs do not cover its neighbors");
  }
  const int k = core_.current_step();

  // Retain the inflated receptions; the window is built from this history.
  std::vector<double> base_weights;
  std::vector<EstimatePair> base_pairs;
  for (const ReceivedPair& rp : received) {
    EstimatePair inflated_pair = inflate(rp.pair, i, rp.from,
                                         core_.channel_bounds());
    buffers_[i].push(rp.from, k, inflated_pair);
    base_pairs.push_back(std::move(inflated_pair));
    base_weights.push_back(graph.weight(i, rp.from));
  }

  const bool scheduled = (k % delta_[i] == 0);
  if (scheduled) {
    std::vector<WindowCandidate> candidates;
    std::vector<Matrix> candidate_bounds;
    std::vector<Matrix> baseline_bounds;
    for (const EstimatePair& p : base_pairs) baseline_bounds.push_back(p.P);
    for (int j : nbrs) {
      const int avail = std::min(buffers_[i].available(j), L_);
      for (int age = 0; age < avail; ++age) {
        const WindowEntry& e = buffers_[i].entry(j, age);
        WindowCandidate cand;
        cand.from = j;
        cand.age = age;
        cand.pair = window_predict(e.pair, e.time, k, core_.model(),
                                   core_.bounds(), core_.moment_trace());
        candidate_bounds.push_back(cand.pair.P);
        candidates.push_back(std::move(cand));
      }
    }
    const WeightOptResult opt = optimize_weights(candidate_bounds,
                                                 baseline_bounds, base_weights,
                                                 wopts_);
    if (opt.status == WeightStatus::kOptimized) {
      core_.commit_fused(i, swf_fuse(candidates, opt.weights));
      ++counters_.optimized;
      return;
    }
    if (opt.status == WeightStatus::kInfeasible) {
      ++counters_.infeasible;
    } else {
      ++counters_.iteration_limit;
    }
    const WindowWeights fallback =
        fallback_window_weights(candidates, graph, i);
    core_.commit_fused(i, swf_fuse(candidates, fallback.a));
    return;
  }
  ++counters_.off_schedule;
  core_.commit_fused(i, ci_combine(base_pairs, base_weights,
                                   "node " + std::to_string(i + 1)));
}

void SwfFilter::fuse_received(
    const std::vector<std::vector<ReceivedPair>>& received) {
  if (!core_.awaiting_fusion()) {
    throw std::logic_error("SwfFilter: call predict_and_update first");
  }
  if (static_cast<int>(received.size()) != core_.sensor_count()) {
    throw std::invalid_argument("SwfFilter: need received pairs per sensor");
  }
  for (int i = 0; i < core_.sensor_count(); ++i) {
    fuse_sensor(i, received[i]);
  }
  core_.finish_tick();
}

void SwfFilter::step(const std::vector<Vector>& measurements,
                     const DrkfFilter::ChannelFn& channel) {
  const std::vector<EstimatePair>& sent = predict_and_update(measurements);
  const int N = sensor_count();
  std::vector<std::vector<ReceivedPair>> received(N);
  for (int i = 0; i < N; ++i) {
    for (int j : core_.graph().neighbors(i)) {
      received[i].push_back(
          {j, j == i ? sent[j] : channel(i, j, sent[j], current_step())});
    }
  }
  fuse_received(received);
}

}  // namespace drkf
