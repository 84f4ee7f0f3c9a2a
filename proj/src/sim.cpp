#include "drkf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "drkf/rng.hpp"

namespace drkf {
namespace {

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  Vector vals = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * vals.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Vector with covariance exactly `cov` under the given shape.
Vector sample_with_covariance(const Matrix& cov, const DistributionSpec& dist,
                              RngStream& rng) {
  const auto n = cov.rows();
  if (dist.kind == DistributionSpec::Kind::kZero) return Vector::Zero(n);
  Vector z(n);
  if (dist.kind == DistributionSpec::Kind::kNormal) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  } else {
    const double half = std::sqrt(3.0);  // unit-variance uniform
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.uniform(-half, half);
  }
  return psd_sqrt(cov) * z;
}

double sample_scalar_with_variance(double var, const DistributionSpec& dist,
                                   RngStream& rng) {
  if (var <= 0.0 || dist.kind == DistributionSpec::Kind::kZero) return 0.0;
  if (dist.kind == DistributionSpec::Kind::kNormal) {
    return std::sqrt(var) * rng.normal();
  }
  const double half = std::sqrt(3.0 * var);
  return rng.uniform(-half, half);
}

double sample_fading(double tau, double phi, RngStream& rng) {
  // Symmetric uniform around tau with variance exactly phi; the support is
  // validated against [0, 1] up front.
  if (phi == 0.0) return tau;
  const double half = std::sqrt(3.0 * phi);
  return rng.uniform(tau - half, tau + half);
}

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  out += buf;
}

struct PerRunTotals {
  std::vector<double> sq;  // squared error, [k * E + e]
  std::vector<double> tr;  // trace of the bound
  long swf_optimized = 0;
  long swf_infeasible = 0;
  long swf_iteration_limit = 0;
  long clip_events = 0;
};

std::vector<EstimatePair> initial_pairs(const Scenario& sc) {
  std::vector<EstimatePair> init(sc.model.sensor_count());
  for (int i = 0; i < sc.model.sensor_count(); ++i) {
    init[i] = {sc.xhat0, sc.bounds.P0i(i)};
  }
  return init;
}

PerRunTotals execute_run(const Scenario& sc, int run_index) {
  const std::uint64_t run_seed =
      derive_seed(sc.seed, {tag_value(StreamTag::kRunSeed),
                            static_cast<std::uint64_t>(run_index)});
  const std::vector<Vector> truth = simulate_truth(sc, run_seed);
  const std::vector<std::vector<Vector>> meas =
      simulate_measurements(truth, sc, run_seed);

  const int K = sc.horizon;
  const bool centralized =
      sc.filter == FilterKind::kCkf || sc.filter == FilterKind::kCrkf;
  const int E = centralized ? 1 : sc.model.sensor_count();

  PerRunTotals totals;
  totals.sq.assign(static_cast<std::size_t>(K + 1) * E, 0.0);
  totals.tr.assign(static_cast<std::size_t>(K + 1) * E, 0.0);
  auto record = [&](int k, int e, const Vector& xhat, const Matrix& p) {
    totals.sq[static_cast<std::size_t>(k) * E + e] =
        (xhat - truth[k]).squaredNorm();
    totals.tr[static_cast<std::size_t>(k) * E + e] = p.trace();
  };

  if (centralized) {
    StackedSensor stacked(sc.model);
    EstimatePair state{sc.xhat0, sc.bounds.P0i(0)};
    MomentTrace pi(sc.model, sc.bounds, sc.pi0, 1e30);
    record(0, 0, state.x, state.P);
    MatrixFn q = [&sc](int k) { return sc.bounds.Q(k); };
    for (int k = 1; k <= K; ++k) {
      const Vector y = stacked.stack(meas[k - 1]);
      state = sc.filter == FilterKind::kCkf
                  ? ckf_step(state, y, sc.model, q, stacked, k)
                  : crkf_step(state, y, sc.model, sc.bounds, stacked, pi, k);
      if (!state.x.allFinite()) {
        throw std::runtime_error("centralized filter diverged at step " +
                                 std::to_string(k));
      }
      record(k, 0, state.x, state.P);
    }
    return totals;
  }

  LinkNoiseSampler sampler(sc.channel.bounds, sc.channel.mode,
                           sc.channel.noise, run_seed);
  auto channel_fn = [&sampler](int to, int from, const EstimatePair& sent,
                               int k) {
    return corrupt(sent, to, from, sampler, k);
  };

  if (sc.filter == FilterKind::kDrkf) {
    DrkfFilter filter(sc.model, sc.bounds, sc.graph, sc.channel.bounds,
                      initial_pairs(sc), sc.pi0);
    for (int i = 0; i < E; ++i) {
      record(0, i, filter.sensor_state(i).fused.x,
             filter.sensor_state(i).fused.P);
    }
    for (int k = 1; k <= K; ++k) {
      filter.step(meas[k - 1], channel_fn);
      for (int i = 0; i < E; ++i) {
        record(k, i, filter.sensor_state(i).fused.x,
               filter.sensor_state(i).fused.P);
      }
    }
  } else {
    SwfFilter filter(sc.model, sc.bounds, sc.graph, sc.channel.bounds,
                     initial_pairs(sc), sc.pi0, sc.swf);
    for (int i = 0; i < E; ++i) {
      record(0, i, filter.sensor_state(i).fused.x,
             filter.sensor_state(i).fused.P);
    }
    for (int k = 1; k <= K; ++k) {
      filter.step(meas[k - 1], channel_fn);
      for (int i = 0; i < E; ++i) {
        record(k, i, filter.sensor_state(i).fused.x,
               filter.sensor_state(i).fused.P);
      }
    }
    totals.swf_optimized = filter.counters().optimized;
    totals.swf_infeasible = filter.counters().infeasible;
    totals.swf_iteration_limit = filter.counters().iteration_limit;
  }
  totals.clip_events = sampler.clip_events();
  return totals;
}

}  // namespace

std::string filter_kind_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::kDrkf: return "drkf";
    case FilterKind::kDrkfSwf: return "drkf-swf";
    case FilterKind::kCkf: return "ckf";
    case FilterKind::kCrkf: return "crkf";
  }
  return "unknown";
}

FilterKind parse_filter_kind(const std::string& name) {
  if (name == "drkf") return FilterKind::kDrkf;
  if (name == "drkf-swf" || name == "swf") return FilterKind::kDrkfSwf;
  if (name == "ckf") return FilterKind::kCkf;
  if (name == "crkf") return FilterKind::kCrkf;
  throw std::invalid_argument("unknown filter: " + name);
}

DistributionSpec parse_distribution(const std::string& name) {
  if (name == "normal") return {DistributionSpec::Kind::kNormal};
  if (name == "uniform") return {DistributionSpec::Kind::kUniform};
  if (name == "zero") return {DistributionSpec::Kind::kZero};
  throw std::invalid_argument("unknown distribution: " + name);
}

std::string distribution_name(const DistributionSpec& d) {
  switch (d.kind) {
    case DistributionSpec::Kind::kNormal: return "normal";
    case DistributionSpec::Kind::kUniform: return "uniform";
    case DistributionSpec::Kind::kZero: return "zero";
  }
  return "unknown";
}

void validate_scenario(const Scenario& sc) {
  const int N = sc.model.sensor_count();
  if (N == 0) throw std::invalid_argument("scenario: no sensors");
  if (sc.graph.size() != N) {
    throw std::invalid_argument("scenario: graph size != sensor count");
  }
  const ValidationReport graph_report = validate_graph(sc.graph);
  if (!graph_report.valid()) {
    std::string msg = "scenario: invalid graph:";
    for (const std::string& v : graph_report.violations) msg += "\n  " + v;
    throw std::invalid_argument(msg);
  }
  if (sc.bounds.sensor_count() != N) {
    throw std::invalid_argument("scenario: P0i count != sensor count");
  }
  if (sc.horizon < 1 || sc.horizon > sc.model.horizon()) {
    throw std::invalid_argument("scenario: horizon outside the model range");
  }
  if (sc.runs < 1) throw std::invalid_argument("scenario: runs must be >= 1");
  if (sc.xhat0.size() != sc.model.n()) {
    throw std::invalid_argument("scenario: xhat0 has wrong dimension");
  }
  if (sc.pi0.rows() != sc.model.n() || sc.pi0.cols() != sc.model.n() ||
      !is_psd(sc.pi0)) {
    throw std::invalid_argument("scenario: pi0 is not n x n PSD");
  }
  if (sc.channel.bounds.n() != sc.model.n()) {
    throw std::invalid_argument("scenario: channel bound dimension mismatch");
  }
  for (int i = 0; i < N; ++i) {
    const SensorSpec& s = sc.model.sensor(i);
    for (int k = 1; k <= sc.horizon; ++k) {
      const double half = std::sqrt(3.0 * s.phi(k));
      const double tau = s.tau(k);
      if (tau - half < -1e-12 || tau + half > 1.0 + 1e-12) {
        throw std::invalid_argument(
            "scenario: fading interval of sensor " + std::to_string(s.id) +
            " escapes [0, 1] at step " + std::to_string(k));
      }
    }
  }
  if (sc.filter == FilterKind::kDrkfSwf) {
    if (sc.swf.window < 1) {
      throw std::invalid_argument("scenario: window must be >= 1");
    }
    const std::size_t intervals = sc.swf.interval.size();
    if (intervals > 1 && intervals != static_cast<std::size_t>(N)) {
      throw std::invalid_argument(
          "scenario: interval list must be empty, a single value, or one "
          "per sensor");
    }
    for (int d : sc.swf.interval) {
      if (d < 1) {
        throw std::invalid_argument("scenario: intervals must be >= 1");
      }
    }
  }
}

std::vector<Vector> simulate_truth(const Scenario& sc,
                                   std::uint64_t run_seed) {
  const int n = sc.model.n();
  std::vector<Vector> x;
  x.reserve(sc.horizon + 1);
  RngStream init_rng(derive_seed(run_seed,
                                 {tag_value(StreamTag::kInitialState)}));
  x.push_back(sample_with_covariance(sc.bounds.P0(), sc.x0_dist, init_rng));
  for (int k = 0; k < sc.horizon; ++k) {
    RngStream w_rng(derive_seed(run_seed, {tag_value(StreamTag::kProcessNoise),
                                           static_cast<std::uint64_t>(k)}));
    RngStream e_rng(derive_seed(
        run_seed, {tag_value(StreamTag::kMultiplicativeNoise),
                   static_cast<std::uint64_t>(k)}));
    const Vector w = sample_with_covariance(sc.bounds.Q(k), sc.w_dist, w_rng);
    const double eps =
        sample_scalar_with_variance(sc.bounds.mu(k), sc.eps_dist, e_rng);
    Vector next = (sc.model.A(k) + eps * sc.model.F(k)) * x.back() + w;
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > 1e100) {
      throw std::runtime_error("simulate_truth: state overflow at step " +
                               std::to_string(k + 1));
    }
    x.push_back(std::move(next));
  }
  return x;
}

std::vector<std::vector<Vector>> simulate_measurements(
    const std::vector<Vector>& truth, const Scenario& sc,
    std::uint64_t run_seed) {
  if (static_cast<int>(truth.size()) != sc.horizon + 1) {
    throw std::invalid_argument("simulate_measurements: truth length");
  }
  const int N = sc.model.sensor_count();
  std::vector<std::vector<Vector>> y(sc.horizon);
  for (int k = 1; k <= sc.horizon; ++k) {
    y[k - 1].resize(N);
    for (int i = 0; i < N; ++i) {
      const SensorSpec& s = sc.model.sensor(i);
      RngStream g_rng(derive_seed(
          run_seed, {tag_value(StreamTag::kFading),
                     static_cast<std::uint64_t>(k),
                     static_cast<std::uint64_t>(i)}));
      RngStream v_rng(derive_seed(
          run_seed, {tag_value(StreamTag::kMeasurementNoise),
                     static_cast<std::uint64_t>(k),
                     static_cast<std::uint64_t>(i)}));
      const double tau = s.tau(k);
      const double phi = s.phi(k);
      const double half = std::sqrt(3.0 * phi);
      if (tau - half < -1e-12 || tau + half > 1.0 + 1e-12) {
        throw std::invalid_argument(
            "simulate_measurements: fading interval of sensor " +
            std::to_string(s.id) + " escapes [0, 1] at step " +
            std::to_string(k));
      }
      const double gamma = sample_fading(tau, phi, g_rng);
      const Vector v = sample_with_covariance(s.R(k), sc.v_dist, v_rng);
      y[k - 1][i] = gamma * (s.C(k) * truth[k]) + v;
    }
  }
  return y;
}

RunStatistics run_monte_carlo(const Scenario& sc) {
  validate_scenario(sc);
  const int K = sc.horizon;
  const bool centralized =
      sc.filter == FilterKind::kCkf || sc.filter == FilterKind::kCrkf;
  const int E = centralized ? 1 : sc.model.sensor_count();

  std::vector<PerRunTotals> per_run(sc.runs);
  std::vector<std::string> failures(sc.runs);

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers =
      static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(sc.runs)));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int r = w; r < sc.runs; r += workers) {
        try {
          per_run[r] = execute_run(sc, r);
        } catch (const std::exception& e) {
          failures[r] = e.what();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (int r = 0; r < sc.runs; ++r) {
    if (!failures[r].empty()) {
      throw std::runtime_error("run " + std::to_string(r) + " failed: " +
                               failures[r]);
    }
  }

  RunStatistics stats;
  stats.horizon = K;
  stats.estimator_labels.resize(E);
  for (int e = 0; e < E; ++e) {
    stats.estimator_labels[e] = centralized ? 0 : e + 1;
  }
  stats.mse.assign(K + 1, std::vector<double>(E, 0.0));
  stats.trp.assign(K + 1, std::vector<double>(E, 0.0));
  // Deterministic reduction in run-index order.
  for (int r = 0; r < sc.runs; ++r) {
    const PerRunTotals& t = per_run[r];
    for (int k = 0; k <= K; ++k) {
      for (int e = 0; e < E; ++e) {
        stats.mse[k][e] += t.sq[static_cast<std::size_t>(k) * E + e];
        stats.trp[k][e] += t.tr[static_cast<std::size_t>(k) * E + e];
      }
    }
    stats.swf_optimized += t.swf_optimized;
    stats.swf_infeasible += t.swf_infeasible;
    stats.swf_iteration_limit += t.swf_iteration_limit;
    stats.channel_clip_events += t.clip_events;
  }
  const double inv_runs = 1.0 / static_cast<double>(sc.runs);
  stats.mse_network.assign(K + 1, 0.0);
  stats.trp_network.assign(K + 1, 0.0);
  for (int k = 0; k <= K; ++k) {
    for (int e = 0; e < E; ++e) {
      stats.mse[k][e] *= inv_runs;
      stats.trp[k][e] *= inv_runs;
      stats.mse_network[k] += stats.mse[k][e];
      stats.trp_network[k] += stats.trp[k][e];
    }
    stats.mse_network[k] /= E;
    stats.trp_network[k] /= E;
  }

  stats.tail_window_start =
      sc.tail_window_start >= 0 ? sc.tail_window_start : K / 2 + 1;
  stats.tail_window_start = std::min(stats.tail_window_start, K);
  for (int k = stats.tail_window_start; k <= K; ++k) {
    stats.mse_max = std::max(stats.mse_max, stats.mse_network[k]);
    stats.p_max = std::max(stats.p_max, stats.trp_network[k]);
  }
  return stats;
}

std::string RunStatistics::to_csv() const {
  std::string out = "k,sensor,MSE,TrP\n";
  const int E = static_cast<int>(estimator_labels.size());
  for (int k = 0; k <= horizon; ++k) {
    for (int e = 0; e < E; ++e) {
      out += std::to_string(k);
      out += ',';
      out += std::to_string(estimator_labels[e]);
      out += ',';
      append_number(out, mse[k][e]);
      out += ',';
      append_number(out, trp[k][e]);
      out += '\n';
    }
  }
  return out;
}

std::string RunStatistics::summary() const {
  std::string out = "MSE_max=";
  append_number(out, mse_max);
  out += " P_max=";
  append_number(out, p_max);
  out += " (k in [" + std::to_string(tail_window_start) + ", " +
         std::to_string(horizon) + "])";
  return out;
}

std::vector<CsvRow> parse_statistics_csv(const std::string& csv) {
  std::vector<CsvRow> rows;
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line) || line != "k,sensor,MSE,TrP") {
    throw std::invalid_argument("parse_statistics_csv: bad header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    CsvRow row;
    char* end = nullptr;
    const char* p = line.c_str();
    row.k = static_cast<int>(std::strtol(p, &end, 10));
    if (*end != ',') throw std::invalid_argument("bad CSV row: " + line);
    p = end + 1;
    row.sensor = static_cast<int>(std::strtol(p, &end, 10));
    if (*end != ',') throw std::invalid_argument("bad CSV row: " + line);
    p = end + 1;
    row.mse = std::strtod(p, &end);
    if (*end != ',') throw std::invalid_argument("bad CSV row: " + line);
    p = end + 1;
    row.trp = std::strtod(p, &end);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace drkf
