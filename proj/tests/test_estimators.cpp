#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ddr/estimators.hpp"
#include "test_support.hpp"

using namespace ddr;
namespace dt = ddr::testing;

namespace {

ScoreSet fixed_scores(const Vector& pi, double eps = 1e-3) {
  ScoreSet s;
  s.pi_hat = truncate_scores(pi, eps);
  s.eps_n = eps;
  s.g_hat = [](const Vector&) { return 0.0; };
  return s;
}

}  // namespace

TEST_CASE("ols_fit recovers exact linear data") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  Matrix x(30, 3);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
  Vector beta_true(4);
  beta_true << 0.7, -1.2, 2.5, 0.4;
  Vector y = beta_true(0) + (x * beta_true.tail(3)).array();
  const OutcomeModel m = ols_fit(dt::make_nonprob(x, y));
  CHECK((m.beta - beta_true).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("ols_fit on constant outcomes gives an intercept-only model") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  Matrix x(12, 2);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
  const OutcomeModel m = ols_fit(dt::make_nonprob(x, Vector::Constant(12, 4.25)));
  CHECK(m.beta(0) == doctest::Approx(4.25).epsilon(1e-12));
  CHECK(std::abs(m.beta(1)) < 1e-12);
  CHECK(std::abs(m.beta(2)) < 1e-12);
}

TEST_CASE("ols_fit matches the high-precision normal-equations oracle") {
  // Frozen from an arbitrary-precision solve of the 5-point system:
  // beta = (0.86, 0.87, 0.3).
  Matrix x(5, 2);
  x << 0.0, 1.0, 1.0, 0.5, 2.0, 2.0, 3.0, 1.5, 4.0, 3.0;
  Vector y(5);
  y << 1.2, 1.9, 3.1, 3.9, 5.3;
  const OutcomeModel m = ols_fit(dt::make_nonprob(x, y));
  CHECK(m.beta(0) == doctest::Approx(0.86).epsilon(1e-12));
  CHECK(m.beta(1) == doctest::Approx(0.87).epsilon(1e-12));
  CHECK(m.beta(2) == doctest::Approx(0.30).epsilon(1e-12));
}

TEST_CASE("ols_fit honors a feature subset and rejects rank-deficient designs") {
  Matrix x(6, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;
  Vector y(6);
  y << 1, 2, 3, 4, 5, 6;
  const NonprobSample a = dt::make_nonprob(x, y);
  CHECK_THROWS_AS(ols_fit(a), RankError);  // x2 = 2 x1
  const OutcomeModel m = ols_fit(a, std::vector<std::string>{"x1"});
  CHECK(m.features == std::vector<Index>{0});
  CHECK(m.predict((Vector(2) << 7.0, 99.0).finished()) == doctest::Approx(7.0).epsilon(1e-10));
  CHECK_THROWS_AS(ols_fit(a, std::vector<std::string>{"nope"}), SchemaError);
}

TEST_CASE("estimate_naive is the sample mean") {
  Matrix x = Matrix::Ones(3, 1);
  Vector y(3);
  y << 1, 2, 3;
  CHECK(estimate_naive(dt::make_nonprob(x, y)) == doctest::Approx(2.0).epsilon(1e-15));
  y << 0, 0, 10;
  CHECK(estimate_naive(dt::make_nonprob(x, y)) == doctest::Approx(10.0 / 3).epsilon(1e-15));
}

TEST_CASE("estimate_reg is a Hajek-weighted prediction mean") {
  OutcomeModel constant;
  constant.beta = Vector::Constant(1, 3.7);
  ProbSample b = dt::make_prob(Matrix::Random(4, 2), (Vector(4) << 1, 5, 2, 9).finished());
  CHECK(estimate_reg(b, constant) == doctest::Approx(3.7).epsilon(1e-14));

  // two units, weights (1,3), predictions (0,4) -> (1*0 + 3*4)/4 = 3
  OutcomeModel slope;
  slope.beta = (Vector(2) << 0.0, 4.0).finished();
  slope.features = {0};
  Matrix xb(2, 1);
  xb << 0.0, 1.0;
  ProbSample b2 = dt::make_prob(xb, (Vector(2) << 1.0, 3.0).finished());
  CHECK(estimate_reg(b2, slope) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("estimate_ipw with equal scores is the sample mean") {
  Matrix x = Matrix::Random(5, 1);
  Vector y(5);
  y << 3, 1, 4, 1, 5;
  const NonprobSample a = dt::make_nonprob(x, y);
  CHECK(estimate_ipw(a, fixed_scores(Vector::Constant(5, 0.2))) ==
        doctest::Approx(y.mean()).epsilon(1e-14));
}

TEST_CASE("estimate_ipw direct arithmetic") {
  Matrix x = Matrix::Random(2, 1);
  Vector y(2);
  y << 1, 3;
  Vector pi(2);
  pi << 0.5, 0.25;
  CHECK(estimate_ipw(dt::make_nonprob(x, y), fixed_scores(pi)) ==
        doctest::Approx(14.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("estimate_ipw stays inside the outcome range") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.02, 0.98);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 2 + static_cast<Index>(rng() % 20);
    Matrix x = Matrix::Random(n, 1);
    Vector y(n), pi(n);
    for (Index i = 0; i < n; ++i) {
      y(i) = gauss(rng) * 10;
      pi(i) = unif(rng);
    }
    const double est = estimate_ipw(dt::make_nonprob(x, y), fixed_scores(pi));
    CHECK(est >= y.minCoeff() - 1e-12);
    CHECK(est <= y.maxCoeff() + 1e-12);
  }
}

namespace {

struct DrFixture {
  NonprobSample a;
  ProbSample b;
  ScoreSet scores;
  OutcomeModel model;

  static DrFixture random(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.05, 0.9);
    std::uniform_real_distribution<double> weight(1.0, 20.0);
    DrFixture f;
    Matrix xa(15, 2), xb(25, 2);
    Vector y(15), pi(15), d(25);
    for (Index i = 0; i < xa.size(); ++i) xa.data()[i] = gauss(rng);
    for (Index i = 0; i < xb.size(); ++i) xb.data()[i] = gauss(rng);
    for (Index i = 0; i < 15; ++i) {
      y(i) = 1.0 + xa(i, 0) - 0.5 * xa(i, 1) + 0.3 * gauss(rng);
      pi(i) = unif(rng);
    }
    for (Index i = 0; i < 25; ++i) d(i) = weight(rng);
    f.a = dt::make_nonprob(xa, y);
    f.b = dt::make_prob(xb, d);
    f.scores = fixed_scores(pi);
    f.model = ols_fit(f.a);
    return f;
  }
};

}  // namespace

TEST_CASE("estimate_dr reduces to ipw under a zero model") {
  const auto f = DrFixture::random(21);
  OutcomeModel zero;
  zero.beta = Vector::Zero(3);
  zero.features = {0, 1};
  CHECK(estimate_dr(f.a, f.b, f.scores, zero) == estimate_ipw(f.a, f.scores));
  CHECK(estimate_ddr(f.a, f.b, f.scores, zero) == estimate_dipw(f.a, f.scores));
}

TEST_CASE("estimate_dr reduces to reg under a perfectly interpolating model") {
  // noiseless linear outcome, so OLS interpolates S_A exactly
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  Matrix xa(10, 2), xb(12, 2);
  for (Index i = 0; i < xa.size(); ++i) xa.data()[i] = gauss(rng);
  for (Index i = 0; i < xb.size(); ++i) xb.data()[i] = gauss(rng);
  Vector y = 2.0 + (xa * (Vector(2) << 1.5, -0.7).finished()).array();
  const NonprobSample a = dt::make_nonprob(xa, y);
  const ProbSample b = dt::make_prob(xb, Vector::Constant(12, 3.0));
  const OutcomeModel m = ols_fit(a);
  Vector pi = Vector::Constant(10, 0.3);
  pi(3) = 0.7;
  const double dr = estimate_dr(a, b, fixed_scores(pi), m);
  CHECK(dr == doctest::Approx(estimate_reg(b, m)).epsilon(1e-12));
}

TEST_CASE("ipw with constant scores equals the naive mean") {
  const auto f = DrFixture::random(27);
  CHECK(estimate_ipw(f.a, fixed_scores(Vector::Constant(15, 0.42))) ==
        doctest::Approx(estimate_naive(f.a)).epsilon(1e-14));
}

TEST_CASE("all estimators are location equivariant") {
  const auto f = DrFixture::random(31);
  const double c = 11.5;
  NonprobSample shifted = f.a;
  shifted.y.array() += c;
  const OutcomeModel m_shifted = ols_fit(shifted);

  CHECK(estimate_naive(shifted) == doctest::Approx(estimate_naive(f.a) + c).epsilon(1e-12));
  CHECK(estimate_ipw(shifted, f.scores) ==
        doctest::Approx(estimate_ipw(f.a, f.scores) + c).epsilon(1e-12));
  CHECK(estimate_reg(f.b, m_shifted) ==
        doctest::Approx(estimate_reg(f.b, f.model) + c).epsilon(1e-11));
  CHECK(estimate_dr(shifted, f.b, f.scores, m_shifted) ==
        doctest::Approx(estimate_dr(f.a, f.b, f.scores, f.model) + c).epsilon(1e-11));
}

TEST_CASE("reg, dr and ddr are invariant to design-weight rescaling") {
  const auto f = DrFixture::random(37);
  ProbSample scaled = f.b;
  scaled.d *= 17.3;
  CHECK(estimate_reg(scaled, f.model) ==
        doctest::Approx(estimate_reg(f.b, f.model)).epsilon(1e-13));
  CHECK(estimate_dr(f.a, scaled, f.scores, f.model) ==
        doctest::Approx(estimate_dr(f.a, f.b, f.scores, f.model)).epsilon(1e-13));
  CHECK(estimate_ddr(f.a, scaled, f.scores, f.model) ==
        doctest::Approx(estimate_ddr(f.a, f.b, f.scores, f.model)).epsilon(1e-13));
}

TEST_CASE("dipw with a constant-score degenerate net equals the naive mean") {
  const auto f = DrFixture::random(41);
  ScoreSet degenerate = fixed_scores(Vector::Constant(15, 0.5));
  CHECK(estimate_dipw(f.a, degenerate) == doctest::Approx(estimate_naive(f.a)).epsilon(1e-14));
}
