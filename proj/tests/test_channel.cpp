#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <drkf/channel.hpp>
#include <drkf/rng.hpp>

using namespace drkf;

TEST_CASE("a zero-bound channel in bound-respecting mode is noiseless") {
  ChannelBounds bounds = ChannelBounds::zero(2);
  LinkNoiseSampler sampler(bounds, ChannelMode::kBoundRespecting, {}, 42);
  EstimatePair sent{Vector::Ones(2), Matrix::Identity(2, 2)};
  const EstimatePair received = corrupt(sent, 0, 1, sampler, 3);
  CHECK((received.x - sent.x).norm() == 0.0);
  CHECK((received.P - sent.P).norm() == 0.0);
}

TEST_CASE("paper-literal sampling stays within its configured half-widths") {
  ChannelBounds bounds =
      ChannelBounds::uniform(2, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  LinkNoiseSampler sampler(bounds, ChannelMode::kPaperLiteral,
                           LinkNoiseSpec{1.0, 1.0}, 11);
  for (int k = 1; k <= 300; ++k) {
    const Vector eps = sampler.sample_vector_noise(0, 1, k);
    CHECK(eps.cwiseAbs().maxCoeff() <= 1.0);
    const Matrix d = sampler.sample_matrix_noise(0, 1, k);
    CHECK(d.cwiseAbs().maxCoeff() <= 1.0);
    // Only the upper triangle is sampled and mirrored.
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("corruption leaves a symmetric difference on the bound matrix") {
  ChannelBounds bounds =
      ChannelBounds::uniform(3, Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  LinkNoiseSampler sampler(bounds, ChannelMode::kPaperLiteral, {}, 99);
  Matrix p(3, 3);
  p << 2.0, 0.3, 0.1, 0.3, 1.5, 0.0, 0.1, 0.0, 1.0;
  EstimatePair sent{Vector::Zero(3), p};
  const EstimatePair received = corrupt(sent, 1, 2, sampler, 5);
  const Matrix diff = received.P - sent.P;
  CHECK((diff - diff.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bound-respecting samples satisfy the envelopes") {
  Matrix upsilon(2, 2);
  upsilon << 2.0, 0.4, 0.4, 1.0;
  Matrix d_bound(2, 2);
  d_bound << 1.5, 0.2, 0.2, 1.2;
  ChannelBounds bounds = ChannelBounds::uniform(2, upsilon, d_bound);
  LinkNoiseSampler sampler(bounds, ChannelMode::kBoundRespecting, {}, 1234);
  for (int k = 1; k <= 500; ++k) {
    const Vector eps = sampler.sample_vector_noise(0, 1, k);
    CHECK(max_eigenvalue(symmetrized(eps * eps.transpose() - upsilon)) <=
          1e-12);
    const Matrix noise = sampler.sample_matrix_noise(0, 1, k);
    CHECK(min_eigenvalue(symmetrized(d_bound - noise)) >= -1e-12);
    CHECK(min_eigenvalue(symmetrized(d_bound + noise)) >= -1e-12);
  }
}

TEST_CASE("unit bounds shrink entries by 1/sqrt(n) in bound-respecting mode") {
  ChannelBounds bounds =
      ChannelBounds::uniform(2, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  LinkNoiseSampler sampler(bounds, ChannelMode::kBoundRespecting, {}, 77);
  double max_entry = 0.0;
  for (int k = 1; k <= 400; ++k) {
    const Vector eps = sampler.sample_vector_noise(0, 1, k);
    max_entry = std::max(max_entry, eps.cwiseAbs().maxCoeff());
    CHECK(eps.squaredNorm() <= 1.0 + 1e-12);
  }
  CHECK(max_entry <= 1.0 / std::sqrt(2.0) + 1e-12);
  CHECK(sampler.clip_events() == 0);
}

TEST_CASE("identical seeds give identical corruption sequences per link") {
  ChannelBounds bounds =
      ChannelBounds::uniform(2, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  LinkNoiseSampler a(bounds, ChannelMode::kPaperLiteral, {}, 5);
  LinkNoiseSampler b(bounds, ChannelMode::kPaperLiteral, {}, 5);
  for (int k = 1; k <= 20; ++k) {
    CHECK((a.sample_vector_noise(1, 2, k) - b.sample_vector_noise(1, 2, k))
              .norm() == 0.0);
    CHECK((a.sample_matrix_noise(1, 2, k) - b.sample_matrix_noise(1, 2, k))
              .norm() == 0.0);
  }
  // Streams differ across links and steps.
  CHECK((a.sample_vector_noise(1, 2, 3) - a.sample_vector_noise(2, 1, 3))
            .norm() > 0.0);
  CHECK((a.sample_vector_noise(1, 2, 3) - a.sample_vector_noise(1, 2, 4))
            .norm() > 0.0);
}

TEST_CASE("inflation adds the link bounds and nothing else") {
  SUBCASE("zero bounds: identity map") {
    ChannelBounds bounds = ChannelBounds::zero(2);
    EstimatePair p{Vector::Ones(2), 2.0 * Matrix::Identity(2, 2)};
    const EstimatePair out = inflate(p, 0, 1, bounds);
    CHECK((out.P - p.P).norm() == 0.0);
    CHECK((out.x - p.x).norm() == 0.0);
  }
  SUBCASE("scalar: 2 + 1 + 1 = 4") {
    ChannelBounds bounds = ChannelBounds::uniform(1, Matrix::Identity(1, 1),
                                                  Matrix::Identity(1, 1));
    EstimatePair p{Vector::Zero(1), 2.0 * Matrix::Identity(1, 1)};
    CHECK(inflate(p, 0, 1, bounds).P(0, 0) == doctest::Approx(4.0));
  }
  SUBCASE("a non-PD result names the link") {
    ChannelBounds bounds = ChannelBounds::zero(2);
    EstimatePair p{Vector::Zero(2), -Matrix::Identity(2, 2)};
    CHECK_THROWS_WITH_AS(inflate(p, 2, 4, bounds),
                         doctest::Contains("link (3 <- 5)"),
                         std::runtime_error);
  }
}

TEST_CASE("worst-case matrix noise is healed by inflation") {
  // A received matrix corrupted by the extreme -D stays consistent after
  // adding D + Upsilon: the inflated bound dominates the transmitted one.
  RngStream rng(31337);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix base(2, 2);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) base(r, c) = rng.uniform(-1.0, 1.0);
    }
    Matrix p_sent = symmetrized(base * base.transpose()) +
                    0.1 * Matrix::Identity(2, 2);
    Matrix d_bound = Matrix::Identity(2, 2) * rng.uniform(0.1, 2.0);
    Matrix upsilon = Matrix::Identity(2, 2) * rng.uniform(0.1, 2.0);
    ChannelBounds bounds = ChannelBounds::uniform(2, upsilon, d_bound);
    EstimatePair received{Vector::Zero(2), p_sent - d_bound};
    const EstimatePair inflated = inflate(received, 0, 1, bounds);
    CHECK(loewner_leq(p_sent, inflated.P, 1e-12));
  }
}

TEST_CASE("corrupt-then-inflate keeps empirical consistency") {
  // True error e ~ N(0, S) with S below P; after corruption and inflation
  // the sample error covariance must stay below the inflated bound.
  const int n = 2;
  Matrix p(2, 2);
  p << 1.0, 0.2, 0.2, 0.8;
  Matrix s = 0.6 * p;
  ChannelBounds bounds =
      ChannelBounds::uniform(n, 0.5 * Matrix::Identity(n, n),
                             0.5 * Matrix::Identity(n, n));
  LinkNoiseSampler sampler(bounds, ChannelMode::kBoundRespecting, {}, 4242);

  const int runs = 40000;
  RngStream rng(808);
  Matrix sample_cov = Matrix::Zero(n, n);
  Matrix p_inflated = Matrix::Zero(n, n);
  Eigen::LLT<Matrix> llt(s);
  const Matrix sqrt_s = llt.matrixL();
  for (int r = 0; r < runs; ++r) {
    Vector e(n);
    for (int i = 0; i < n; ++i) e(i) = rng.normal();
    e = sqrt_s * e;
    EstimatePair sent{e, p};  // estimate = truth + e with truth = 0
    const EstimatePair received = corrupt(sent, 0, 1, sampler, 1 + r);
    const EstimatePair out = inflate(received, 0, 1, bounds);
    sample_cov += out.x * out.x.transpose();
    p_inflated += out.P;  // conditional bounds average across realizations
  }
  sample_cov /= runs;
  p_inflated /= runs;
  const double slack = 3.0 * std::sqrt(2.0 / runs) * p_inflated.norm() * 3.0;
  CHECK(min_eigenvalue(symmetrized(p_inflated - sample_cov)) >= -slack);
}
