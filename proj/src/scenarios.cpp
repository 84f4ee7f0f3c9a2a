#include <set>
#include <stdexcept>

#include "drkf/rng.hpp"
#include "drkf/sim.hpp"

namespace drkf {
namespace {

constexpr int kExample1Horizon = 100;  // t_k in [0, 10], step 0.1

double t_of(int k) { return 0.1 * k; }

struct SensorCombo {
  double tau;
  double phi;
  double r;
  bool sees_first;  // which coordinate the row picks out
};

// The four sensing profiles of the small scenario; the large one draws each
// node's profile from the same set.
constexpr SensorCombo kCombos[4] = {
    {0.85, 0.8e-3, 0.07, false},
    {0.15, 0.8e-3, 0.08, false},
    {0.20, 0.8e-3, 0.09, false},
    {0.85, 0.8e-3, 0.09, true},
};

SensorSpec make_sensor(int id, const SensorCombo& combo, double r_override,
                       int n) {
  Matrix c = Matrix::Zero(1, n);
  c(0, combo.sees_first ? 0 : 1) = 1.0;
  SensorSpec spec;
  spec.id = id;
  spec.C = constant_matrix(std::move(c));
  spec.R = constant_matrix(Matrix::Constant(1, 1, r_override > 0.0
                                                     ? r_override
                                                     : combo.r));
  spec.tau = constant_scalar(combo.tau);
  spec.phi = constant_scalar(combo.phi);
  return spec;
}

std::vector<Matrix> uniform_p0i(int count, const Matrix& p) {
  return std::vector<Matrix>(count, p);
}

}  // namespace

Scenario example1_scenario(int table_case) {
  if (table_case < 1 || table_case > 5) {
    throw std::invalid_argument("example1: case must be in 1..5");
  }
  const int n = 2;
  MatrixFn A = [](int k) {
    Matrix a(2, 2);
    a << 0.8 * (1.0 + 0.01 * t_of(k)), 0.01, 0.1, 0.98;
    return a;
  };
  MatrixFn F = constant_matrix(Matrix::Identity(n, n));
  ScalarFn mu = [](int k) { return 0.1 / (t_of(k) + 2.0); };

  std::vector<SensorSpec> sensors;
  for (int i = 0; i < 4; ++i) {
    sensors.push_back(make_sensor(i + 1, kCombos[i], 0.0, n));
  }
  SystemModel model(n, kExample1Horizon, A, F, std::move(sensors));

  const double p0i_scale = table_case == 2 ? 500.0 : 100.0;
  NoiseBounds bounds(constant_matrix(0.1 * Matrix::Identity(n, n)), mu,
                     Matrix::Identity(n, n),
                     uniform_p0i(4, p0i_scale * Matrix::Identity(n, n)),
                     kExample1Horizon);

  Matrix weights(4, 4);
  weights << 0.3, 0.7, 0.0, 0.0,  //
      0.0, 0.4, 0.6, 0.0,         //
      0.0, 0.0, 0.3, 0.7,         //
      0.3, 0.4, 0.0, 0.3;
  SensorGraph graph(std::move(weights));

  const double d_scale = table_case == 4 ? 5.0 : 1.0;
  const double upsilon_scale = table_case == 5 ? 5.0 : 1.0;
  ChannelConfig channel{
      ChannelBounds::uniform(n, upsilon_scale * Matrix::Identity(n, n),
                             d_scale * Matrix::Identity(n, n)),
      ChannelMode::kPaperLiteral,
      // The physical channel noise stays entrywise uniform on [-1, 1]; the
      // case studies only vary what the filters assume about it.
      LinkNoiseSpec{1.0, 1.0}};

  Scenario sc{
      .name = table_case == 1 ? "example1"
                              : "example1-case" + std::to_string(table_case),
      .model = std::move(model),
      .bounds = std::move(bounds),
      .graph = std::move(graph),
      .channel = std::move(channel),
      .filter = FilterKind::kDrkf,
      .swf = SwfOptions{.window = 2, .interval = {5}, .weights = {}},
      .horizon = kExample1Horizon,
      .runs = 100,
      .seed = 1,
      .xhat0 = Vector::Ones(n),
      .pi0 = (table_case == 3 ? 5.0 : 1.0) * Matrix::Identity(n, n),
      .tail_window_start = 51,
  };
  return sc;
}

Scenario example2_scenario() {
  const int n = 2;
  const int node_count = 50;
  const int horizon = kExample1Horizon;

  Matrix a(2, 2);
  a << 1.05, -0.1, 0.1, 0.98;
  MatrixFn A = constant_matrix(a);
  MatrixFn F = constant_matrix(Matrix::Identity(n, n));

  // The 50-node topology is a fixed seeded random connected graph: a random
  // tree plus extra edges for comparable density to a typical deployment.
  RngStream topo(derive_seed(0x50C1A1, {tag_value(StreamTag::kTopology)}));
  std::vector<std::pair<int, int>> edges;
  std::set<std::pair<int, int>> seen;
  auto add_edge = [&](int u, int v) {
    auto key = std::minmax(u, v);
    if (u == v || !seen.insert(key).second) return false;
    edges.emplace_back(u, v);
    return true;
  };
  for (int v = 1; v < node_count; ++v) {
    const int parent =
        static_cast<int>(topo.uniform01() * v) % v;  // attach to the tree
    add_edge(parent, v);
  }
  int extra = 36;
  while (extra > 0) {
    const int u = static_cast<int>(topo.uniform01() * node_count) % node_count;
    const int v = static_cast<int>(topo.uniform01() * node_count) % node_count;
    if (add_edge(u, v)) --extra;
  }
  SensorGraph graph = metropolis_weights(edges, node_count);

  RngStream combo_rng(derive_seed(0x50C1A2, {tag_value(StreamTag::kTopology)}));
  std::vector<SensorSpec> sensors;
  sensors.reserve(node_count);
  for (int i = 0; i < node_count; ++i) {
    const int c = static_cast<int>(combo_rng.uniform01() * 4) % 4;
    sensors.push_back(make_sensor(i + 1, kCombos[c], 1.0, n));
  }
  SystemModel model(n, horizon, A, F, std::move(sensors));

  NoiseBounds bounds(constant_matrix(0.1 * Matrix::Identity(n, n)),
                     constant_scalar(0.0), Matrix::Identity(n, n),
                     uniform_p0i(node_count, 100.0 * Matrix::Identity(n, n)),
                     horizon);

  ChannelConfig channel{
      ChannelBounds::uniform(n, Matrix::Identity(n, n),
                             Matrix::Identity(n, n)),
      ChannelMode::kPaperLiteral, LinkNoiseSpec{1.0, 1.0}};

  Scenario sc{
      .name = "example2",
      .model = std::move(model),
      .bounds = std::move(bounds),
      .graph = std::move(graph),
      .channel = std::move(channel),
      .filter = FilterKind::kDrkf,
      .swf = SwfOptions{.window = 2, .interval = {5}, .weights = {}},
      .horizon = horizon,
      .runs = 100,
      .seed = 1,
      .xhat0 = Vector::Ones(n),
      .pi0 = Matrix::Identity(n, n),
      .tail_window_start = 51,
  };
  return sc;
}

std::vector<std::string> builtin_scenario_names() {
  return {"example1",       "example1-case2", "example1-case3",
          "example1-case4", "example1-case5", "example2"};
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "example1") return example1_scenario(1);
  for (int c = 2; c <= 5; ++c) {
    if (name == "example1-case" + std::to_string(c)) {
      return example1_scenario(c);
    }
  }
  if (name == "example2") return example2_scenario();
  throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace drkf
