#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <drkf/moment.hpp>
#include <drkf/rng.hpp>

using namespace drkf;

namespace {

SensorSpec dummy_sensor(int n) {
  SensorSpec s;
  s.C = constant_matrix(Matrix::Ones(1, n));
  s.R = constant_matrix(Matrix::Identity(1, 1));
  s.tau = constant_scalar(1.0);
  s.phi = constant_scalar(0.0);
  return s;
}

SystemModel identity_model(int n, int horizon) {
  return SystemModel(n, horizon, constant_matrix(Matrix::Identity(n, n)),
                     constant_matrix(Matrix::Identity(n, n)),
                     {dummy_sensor(n)});
}

MatrixFn example1_A() {
  return [](int k) {
    Matrix a(2, 2);
    a << 0.8 * (1.0 + 0.001 * k), 0.01, 0.1, 0.98;
    return a;
  };
}

NoiseBounds zero_bounds(int n, int horizon) {
  return NoiseBounds(constant_matrix(Matrix::Zero(n, n)), constant_scalar(0.0),
                     Matrix::Identity(n, n), {Matrix::Identity(n, n)}, horizon,
                     NoiseBoundsOptions{.q_floor = 0.0});
}

}  // namespace

TEST_CASE("identity dynamics with no noise keep the bound fixed") {
  SystemModel model = identity_model(2, 20);
  NoiseBounds bounds = zero_bounds(2, 20);
  MomentTrace trace = propagate_pi(model, bounds, 20);
  for (int k = 0; k <= 20; ++k) {
    CHECK((trace.computed(k) - Matrix::Identity(2, 2)).norm() == 0.0);
  }
}

TEST_CASE("one step of the preset dynamics against a scalar-by-scalar oracle") {
  SystemModel model(2, 5, example1_A(),
                    constant_matrix(Matrix::Identity(2, 2)),
                    {dummy_sensor(2)});
  NoiseBounds bounds(constant_matrix(0.1 * Matrix::Identity(2, 2)),
                     [](int k) { return 0.1 / (0.1 * k + 2.0); },
                     Matrix::Identity(2, 2), {Matrix::Identity(2, 2)}, 5);
  MomentTrace trace = propagate_pi(model, bounds, 1);

  // Independent oracle: plain double arithmetic on the 2x2 entries of
  // A0 * I * A0^T + mu0 * I + Q with A0 = [[0.8, 0.01], [0.1, 0.98]].
  const double a11 = 0.8, a12 = 0.01, a21 = 0.1, a22 = 0.98;
  const double mu0 = 0.05, q = 0.1;
  const std::array<double, 4> expected = {
      a11 * a11 + a12 * a12 + mu0 + q,  //
      a11 * a21 + a12 * a22,            //
      a21 * a11 + a22 * a12,            //
      a21 * a21 + a22 * a22 + mu0 + q,
  };
  const Matrix& pi1 = trace.computed(1);
  CHECK(pi1(0, 0) == doctest::Approx(expected[0]).epsilon(1e-14));
  CHECK(pi1(0, 1) == doctest::Approx(expected[1]).epsilon(1e-14));
  CHECK(pi1(1, 0) == doctest::Approx(expected[2]).epsilon(1e-14));
  CHECK(pi1(1, 1) == doctest::Approx(expected[3]).epsilon(1e-14));
  // Frozen reference values for the same step.
  CHECK(pi1(0, 0) == doctest::Approx(0.7901).epsilon(1e-12));
  CHECK(pi1(0, 1) == doctest::Approx(0.0898).epsilon(1e-12));
  CHECK(pi1(1, 1) == doctest::Approx(1.1204).epsilon(1e-12));
}

TEST_CASE("scalar geometric growth: Pi_3 = 85 for A=2, Q=1, P0=1") {
  SystemModel model(1, 5, constant_matrix(2.0 * Matrix::Identity(1, 1)),
                    constant_matrix(Matrix::Identity(1, 1)),
                    {dummy_sensor(1)});
  NoiseBounds bounds(constant_matrix(Matrix::Identity(1, 1)),
                     constant_scalar(0.0), Matrix::Identity(1, 1),
                     {Matrix::Identity(1, 1)}, 5);
  MomentTrace trace = propagate_pi(model, bounds, 3);
  CHECK(trace.computed(3)(0, 0) == doctest::Approx(85.0));
}

TEST_CASE("the magnitude cap aborts with the offending step") {
  SystemModel model(1, 400, constant_matrix(2.0 * Matrix::Identity(1, 1)),
                    constant_matrix(Matrix::Identity(1, 1)),
                    {dummy_sensor(1)});
  NoiseBounds bounds(constant_matrix(Matrix::Identity(1, 1)),
                     constant_scalar(0.0), Matrix::Identity(1, 1),
                     {Matrix::Identity(1, 1)}, 400);
  MomentTrace trace(model, bounds, /*entry_cap=*/1e6);
  CHECK_THROWS_WITH_AS(trace.ensure(400),
                       doctest::Contains("magnitude cap at step"),
                       std::runtime_error);
}

TEST_CASE("transition basics") {
  SystemModel model(2, 10, example1_A(),
                    constant_matrix(Matrix::Identity(2, 2)),
                    {dummy_sensor(2)});
  CHECK((transition(model, 4, 4) - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK_THROWS_AS(transition(model, 2, 3), std::invalid_argument);

  // Constant dynamics: the product over three steps is the cube.
  Matrix a(2, 2);
  a << 0.5, 0.2, 0.0, 0.9;
  SystemModel const_model(2, 10, constant_matrix(a),
                          constant_matrix(Matrix::Identity(2, 2)),
                          {dummy_sensor(2)});
  CHECK((transition(const_model, 3, 0) - a * a * a).norm() < 1e-15);

  // Time-varying: the two-step product is the ordered product of the maps,
  // and equals repeated single-step calls.
  const Matrix direct = transition(model, 2, 0);
  const Matrix expected = model.A(1) * model.A(0);
  CHECK((direct - expected).norm() < 1e-15);
  const Matrix chained = transition(model, 2, 1) * transition(model, 1, 0);
  CHECK((direct - chained).norm() < 1e-15);
}

TEST_CASE("transition satisfies the semigroup property on random models") {
  RngStream rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform01() * 3);
    const std::uint64_t model_seed = rng.next();
    MatrixFn a = [n, model_seed](int k) {
      RngStream local(derive_seed(model_seed, {static_cast<uint64_t>(k)}));
      Matrix m(n, n);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) m(r, c) = local.uniform(-1.0, 1.0);
      }
      return m;
    };
    SystemModel model(n, 12, a, constant_matrix(Matrix::Identity(n, n)),
                      {dummy_sensor(n)});
    const int k = static_cast<int>(rng.uniform01() * 4);
    const int m = k + static_cast<int>(rng.uniform01() * 4);
    const int j = m + static_cast<int>(rng.uniform01() * 4);
    const Matrix whole = transition(model, j, k);
    const Matrix split = transition(model, j, m) * transition(model, m, k);
    CHECK((whole - split).norm() <=
          1e-9 * std::max(1.0, whole.norm()));
  }
}

TEST_CASE("with mu = 0 the recursion matches a textbook predictor bound") {
  RngStream rng(123);
  const int n = 3;
  Matrix a(n, n), q(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) a(r, c) = rng.uniform(-0.6, 0.6);
  }
  q = Matrix::Identity(n, n) * 0.2;
  SystemModel model(n, 15, constant_matrix(a),
                    constant_matrix(Matrix::Identity(n, n)),
                    {dummy_sensor(n)});
  NoiseBounds bounds(constant_matrix(q), constant_scalar(0.0),
                     Matrix::Identity(n, n), {Matrix::Identity(n, n)}, 15);
  MomentTrace trace = propagate_pi(model, bounds, 15);

  Matrix p = Matrix::Identity(n, n);  // textbook P_{k+1} = A P A^T + Q
  for (int k = 1; k <= 15; ++k) {
    p = a * p * a.transpose() + q;
    CHECK((trace.computed(k) - p).norm() <= 1e-12 * std::max(1.0, p.norm()));
  }
}

TEST_CASE("scalar Monte Carlo second moment stays within the bound") {
  // x_{k+1} = (a + eps) x_k + w with eps ~ N(0, mu), w ~ N(0, q).
  const double a = 0.9, mu = 0.05, q = 0.3;
  const int K = 12;
  const int runs = 20000;
  std::vector<double> second(K + 1, 0.0);
  RngStream rng(5150);
  for (int r = 0; r < runs; ++r) {
    double x = rng.normal();
    second[0] += x * x;
    for (int k = 0; k < K; ++k) {
      x = (a + std::sqrt(mu) * rng.normal()) * x + std::sqrt(q) * rng.normal();
      second[k + 1] += x * x;
    }
  }
  double pi = 1.0;
  for (int k = 0; k <= K; ++k) {
    const double sample = second[k] / runs;
    // Var of x^2 for centered x is about 2 pi^2; allow 3 sigma.
    const double slack = 3.0 * pi * std::sqrt(3.0 / runs) * 3.0;
    CHECK(sample <= pi + slack);
    pi = (a * a + mu) * pi + q;
  }
}
