#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <drkf/model.hpp>
#include <drkf/rng.hpp>

using namespace drkf;

namespace {

Matrix example1_adjacency() {
  Matrix w(4, 4);
  w << 0.3, 0.7, 0.0, 0.0,  //
      0.0, 0.4, 0.6, 0.0,   //
      0.0, 0.0, 0.3, 0.7,   //
      0.3, 0.4, 0.0, 0.3;
  return w;
}

// Brute-force reachability oracle: depth-first search per ordered pair.
bool reachable_dfs(const Matrix& w, int from, int to) {
  std::vector<bool> seen(w.rows(), false);
  std::vector<int> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (u == to) return true;
    for (int v = 0; v < w.rows(); ++v) {
      // u can reach v when v receives from u.
      if (!seen[v] && w(v, u) > 0.0) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return false;
}

bool strongly_connected_oracle(const Matrix& w) {
  for (int i = 0; i < w.rows(); ++i) {
    for (int j = 0; j < w.cols(); ++j) {
      if (!reachable_dfs(w, i, j)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("validate_graph accepts the self-loop-only graph") {
  SensorGraph g(Matrix::Identity(3, 3));
  CHECK(validate_graph(g).valid());
}

TEST_CASE("validate_graph accepts the four-node preset adjacency") {
  SensorGraph g(example1_adjacency());
  CHECK(validate_graph(g).valid());
  CHECK(g.neighbors(0) == std::vector<int>{0, 1});
  CHECK(g.neighbors(3) == std::vector<int>{0, 1, 3});
}

TEST_CASE("validate_graph reports a zeroed diagonal and the broken row sum") {
  Matrix w = example1_adjacency();
  w(0, 0) = 0.0;
  const ValidationReport report = validate_graph(SensorGraph(w));
  REQUIRE(report.violations.size() == 2);
  CHECK(report.violations[0].find("diagonal at node 1") != std::string::npos);
  CHECK(report.violations[1].find("row 1 sums to 0.7") != std::string::npos);
}

TEST_CASE("strong connectivity of the preset graph and trivial non-examples") {
  CHECK(is_strongly_connected(SensorGraph(example1_adjacency())));

  CHECK_FALSE(is_strongly_connected(SensorGraph(Matrix::Identity(2, 2))));

  Matrix chain(3, 3);  // directed chain 1 -> 2 -> 3 with self-loops
  chain << 1.0, 0.0, 0.0,  //
      0.5, 0.5, 0.0,       //
      0.0, 0.5, 0.5;
  CHECK_FALSE(is_strongly_connected(SensorGraph(chain)));
}

TEST_CASE("strong connectivity agrees with a brute-force path search") {
  RngStream rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 7);
    Matrix w = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      w(i, i) = 1.0;
      for (int j = 0; j < n; ++j) {
        if (i != j && rng.uniform01() < 0.3) w(i, j) = 1.0;
      }
      w.row(i) /= w.row(i).sum();
    }
    SensorGraph g(w);
    CHECK(is_strongly_connected(g) == strongly_connected_oracle(w));
  }
}

TEST_CASE("metropolis weights on a symmetric pair") {
  SensorGraph g = metropolis_weights({{0, 1}}, 2);
  CHECK(g.weight(0, 1) == doctest::Approx(0.5));
  CHECK(g.weight(1, 0) == doctest::Approx(0.5));
  CHECK(g.weight(0, 0) == doctest::Approx(0.5));
  CHECK(g.weight(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("metropolis weights on the three-node path") {
  SensorGraph g = metropolis_weights({{0, 1}, {1, 2}}, 3);
  CHECK(g.weight(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(g.weight(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(g.weight(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(validate_graph(g).valid());
}

TEST_CASE("metropolis weights on a star") {
  // Center 0 with three leaves: center degree 4 counting itself.
  SensorGraph g = metropolis_weights({{0, 1}, {0, 2}, {0, 3}}, 4);
  CHECK(g.weight(1, 0) == doctest::Approx(0.25));
  CHECK(g.weight(1, 1) == doctest::Approx(0.75));
  CHECK(validate_graph(g).valid());
}

TEST_CASE("metropolis rejects multi-edges") {
  CHECK_THROWS_AS(metropolis_weights({{0, 1}, {1, 0}}, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(metropolis_weights({{1, 1}}, 2), std::invalid_argument);
}

TEST_CASE("generated metropolis graphs are row-stochastic with positive diag") {
  RngStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 10);
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (rng.uniform01() < 0.4) edges.emplace_back(a, b);
      }
    }
    SensorGraph g = metropolis_weights(edges, n);
    for (int i = 0; i < n; ++i) {
      CHECK(g.weights().row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(g.weight(i, i) > 0.0);
    }
  }
}

TEST_CASE("time-varying maps are pure") {
  MatrixFn a = [](int k) {
    Matrix m(2, 2);
    m << 0.8 * (1.0 + 0.001 * k), 0.01, 0.1, 0.98;
    return m;
  };
  for (int k : {0, 13, 100}) {
    CHECK(a(k) == a(k));
  }
}

TEST_CASE("model construction rejects bad shapes and parameters") {
  auto sensor = [](Matrix c, double tau) {
    SensorSpec s;
    s.C = constant_matrix(std::move(c));
    s.R = constant_matrix(Matrix::Identity(1, 1));
    s.tau = constant_scalar(tau);
    s.phi = constant_scalar(0.0);
    return s;
  };

  CHECK_NOTHROW(SystemModel(2, 10, constant_matrix(Matrix::Identity(2, 2)),
                            constant_matrix(Matrix::Identity(2, 2)),
                            {sensor(Matrix::Ones(1, 2), 0.5)}));
  // A has the wrong shape.
  CHECK_THROWS_AS(SystemModel(2, 10, constant_matrix(Matrix::Identity(3, 3)),
                              constant_matrix(Matrix::Identity(2, 2)),
                              {sensor(Matrix::Ones(1, 2), 0.5)}),
                  std::invalid_argument);
  // F singular.
  CHECK_THROWS_AS(SystemModel(2, 10, constant_matrix(Matrix::Identity(2, 2)),
                              constant_matrix(Matrix::Zero(2, 2)),
                              {sensor(Matrix::Ones(1, 2), 0.5)}),
                  std::invalid_argument);
  // tau outside (0, 1].
  CHECK_THROWS_AS(SystemModel(2, 10, constant_matrix(Matrix::Identity(2, 2)),
                              constant_matrix(Matrix::Identity(2, 2)),
                              {sensor(Matrix::Ones(1, 2), 1.5)}),
                  std::invalid_argument);
  // C with the wrong column count.
  CHECK_THROWS_AS(SystemModel(2, 10, constant_matrix(Matrix::Identity(2, 2)),
                              constant_matrix(Matrix::Identity(2, 2)),
                              {sensor(Matrix::Ones(1, 3), 0.5)}),
                  std::invalid_argument);
}

TEST_CASE("noise bounds validate PSD-ness and the Q floor") {
  CHECK_NOTHROW(NoiseBounds(constant_matrix(0.1 * Matrix::Identity(2, 2)),
                            constant_scalar(0.0), Matrix::Identity(2, 2),
                            {Matrix::Identity(2, 2)}, 10));
  // Q indefinite.
  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(NoiseBounds(constant_matrix(bad), constant_scalar(0.0),
                              Matrix::Identity(2, 2),
                              {Matrix::Identity(2, 2)}, 10),
                  std::invalid_argument);
  // Negative mu.
  CHECK_THROWS_AS(NoiseBounds(constant_matrix(Matrix::Identity(2, 2)),
                              constant_scalar(-0.1), Matrix::Identity(2, 2),
                              {Matrix::Identity(2, 2)}, 10),
                  std::invalid_argument);
}
