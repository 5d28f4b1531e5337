#include <doctest.h>

#include <cmath>
#include <vector>

#include "curvctmc/curvature.hpp"
#include "curvctmc/error.hpp"
#include "curvctmc/random.hpp"
#include "oracles.hpp"

using namespace curvctmc;

namespace {

StateFunction random_function(RandomStream& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& e : v) e = rng.uniform(-1.0, 1.0);
  return StateFunction(v);
}

std::vector<double> random_law(RandomStream& rng, std::size_t n, std::size_t support) {
  std::vector<double> p(n, 0.0);
  for (std::size_t i = 0; i < support; ++i) {
    p[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n))] += rng.uniform(0.1, 1.0);
  }
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

BirthDeathRates random_chain(RandomStream& rng, std::size_t n) {
  std::vector<double> lambda(n + 1, 0.0), nu(n + 1, 0.0);
  for (std::size_t x = 0; x < n; ++x) lambda[x] = rng.uniform(0.1, 2.0);
  for (std::size_t x = 1; x <= n; ++x) nu[x] = rng.uniform(0.1, 2.0);
  return BirthDeathRates(lambda, nu);
}

}  // namespace

TEST_CASE("wasserstein criterion") {
  const auto e = wasserstein_criterion(BirthDeathRates::ehrenfest(10, 0.3, 0.9));
  CHECK(e.kind == CurvatureKind::Wasserstein);
  CHECK(e.value == doctest::Approx(1.2));
  CHECK(e.valid);
  CHECK(wasserstein_criterion(BirthDeathRates::mm1(1.0, 2.0, 50)).value == 0.0);
  // Bounded rates on a truncated window of the integers.
  RandomStream rng(1, 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> lambda(41), nu(41, 0.0);
    for (auto& v : lambda) v = rng.uniform(0.2, 1.5);
    for (std::size_t x = 1; x <= 40; ++x) nu[x] = rng.uniform(0.2, 1.5);
    CHECK(wasserstein_criterion(BirthDeathRates(lambda, nu, true)).value <= 1.5);
  }
}

TEST_CASE("gamma criterion") {
  const auto e = gamma_criterion(BirthDeathRates::ehrenfest(10, 0.3, 0.9));
  CHECK(e.value == doctest::Approx(0.3));
  CHECK(e.valid);
  const auto m = gamma_criterion(BirthDeathRates::mm1(1.0, 2.0, 50));
  CHECK(m.value == 0.0);
  CHECK(m.valid);
  const auto bad = gamma_criterion(BirthDeathRates({1.0, 2.0, 3.0, 0.0}, {0.0, 1.0, 1.0, 1.0}));
  CHECK_FALSE(bad.valid);
  CHECK(bad.value < 0.0);
}

TEST_CASE("gamma criterion accounts for the end states") {
  // Interior differences are all at least 0.99, but nu_1 = 0.01 and
  // lambda_{N-1} = 0.01; the Gamma_2 inequality fails at 0 and N for rho
  // near 1.
  const BirthDeathRates bd({4.0, 3.0, 2.0, 1.0, 0.01, 0.0}, {0.0, 0.01, 1.01, 2.01, 3.01, 4.01});
  const auto cert = gamma_criterion(bd);
  CHECK(cert.value == doctest::Approx(0.01));
  const GeneralRates q = bd.to_general();
  RandomStream rng(6, 0);
  double at_zero = 0.0, with_cert = 0.0;
  for (int i = 0; i < 200; ++i) {
    const StateFunction f = random_function(rng, 6);
    at_zero = std::min(at_zero, gamma2_gap(q, f, 0.99)[0]);
    with_cert = std::min(with_cert, gamma2_gap(q, f, cert.value).min());
  }
  CHECK(at_zero < -1e-3);
  CHECK(with_cert >= -1e-12);
}

TEST_CASE("gamma2 gap") {
  const auto q = BirthDeathRates::mm1(1.0, 2.0, 30).to_general();
  for (double v : gamma2_gap(q, StateFunction(31, 1.0), 0.0)) CHECK(v == 0.0);
  RandomStream rng(12, 0);
  for (int i = 0; i < 100; ++i) {
    const StateFunction gap = gamma2_gap(q, random_function(rng, 31), 0.0);
    for (std::size_t x = 1; x + 2 <= 30; ++x) CHECK(gap[x] >= -1e-12);
  }
  const auto eb = BirthDeathRates::ehrenfest(12, 0.4, 0.7);
  const auto eq = eb.to_general();
  for (int i = 0; i < 100; ++i) CHECK(gamma2_gap(eq, random_function(rng, 13), 0.4).min() >= -1e-12);
}

TEST_CASE("gamma2 matches the five-point decomposition") {
  RandomStream rng(13, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const BirthDeathRates bd = random_chain(rng, 9);
    const GeneralRates q = bd.to_general();
    const StateFunction f = random_function(rng, 10);
    // rho = 0 leaves 2 Gamma_2 f - 2 Gamma (Gamma f)^{1/2} after doubling.
    const StateFunction gap = gamma2_gap(q, f, 0.0);
    for (std::size_t x = 0; x <= 9; ++x) {
      CHECK(2.0 * gap[x] == doctest::Approx(oracle::gamma2_decomposition(bd, f.values(), x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("w1 distance") {
  const Metric d = Metric::unit(4);
  CHECK(w1_distance(std::vector<double>{1, 0, 0, 0}, std::vector<double>{0, 0, 0, 1}, d) == 3.0);
  CHECK(w1_distance(std::vector<double>{0.5, 0, 0.5}, std::vector<double>{0, 1, 0}, Metric::unit(3)) ==
        doctest::Approx(1.0));
  const std::vector<double> mu{0.2, 0.3, 0.1, 0.4};
  CHECK(w1_distance(mu, mu, d) == 0.0);
  CHECK_THROWS_AS(w1_distance(std::vector<double>{0.5, 0.4, 0, 0}, mu, d), Error);
  RandomStream rng(14, 0);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> w(6);
    for (auto& e : w) e = rng.uniform(0.3, 2.0);
    const Metric m = Metric::weighted(w);
    const auto a = random_law(rng, 7, 5), b = random_law(rng, 7, 5);
    CHECK(w1_distance(a, b, m) == doctest::Approx(oracle::w1_min_cost_flow(a, b, m)).epsilon(1e-12));
  }
}

TEST_CASE("kantorovich dual gap") {
  const Metric d = Metric::unit(6);
  const std::vector<double> mu{0.1, 0.1, 0.2, 0.2, 0.2, 0.2}, nu{0.3, 0.2, 0.2, 0.1, 0.1, 0.1};
  CHECK(std::abs(kantorovich_dual_gap(mu, nu, d, {StateFunction::identity(6)})) < 1e-12);
  CHECK(kantorovich_dual_gap(mu, mu, d, {StateFunction::identity(6)}) == 0.0);
  RandomStream rng(15, 0);
  const auto a = random_law(rng, 6, 4), b = random_law(rng, 6, 4);
  std::vector<StateFunction> fns;
  double previous = w1_distance(a, b, d);
  for (int i = 0; i < 200; ++i) {
    fns.push_back(random_function(rng, 6));
    const double gap = kantorovich_dual_gap(a, b, d, fns);
    CHECK(gap >= -1e-12);
    CHECK(gap <= previous + 1e-15);
    previous = gap;
  }
}

TEST_CASE("wasserstein curvature estimate") {
  const GeneralRates two = BirthDeathRates({0.7, 0.0}, {0.0, 1.1}).to_general();
  const auto est = wasserstein_curvature_estimate(two, Metric::unit(2), {0.3, 1.0, 2.5});
  CHECK(est.direction == EstimateDirection::Exact);
  for (double v : est.values) CHECK(v == doctest::Approx(1.8).epsilon(1e-9));

  const auto e = BirthDeathRates::ehrenfest(10, 0.5, 0.5);
  const auto ee = wasserstein_curvature_estimate(e.to_general(), Metric::unit(11), {0.1, 1.0});
  for (double v : ee.values) CHECK(v >= 1.0 - 1e-9);

  const auto z = wasserstein_curvature_estimate(GeneralRates::zero(4), Metric::unit(4), {1.0});
  CHECK(z.values[0] == doctest::Approx(0.0).epsilon(1e-15));

  const TransitionKernel k = transition_matrix(e.to_general(), 0.7);
  CHECK(wasserstein_contraction(k, Metric::unit(11), true) ==
        doctest::Approx(wasserstein_contraction(k, Metric::unit(11), false)).epsilon(1e-12));
  CHECK_THROWS_AS(wasserstein_curvature_estimate(two, Metric::unit(2), {}), Error);
}

TEST_CASE("gamma curvature estimate") {
  const std::vector<double> lambda{3.0, 2.5, 2.0, 1.2, 0.6, 0.0}, nu{0.0, 0.5, 1.0, 1.6, 2.5, 3.0};
  const BirthDeathRates bd(lambda, nu);
  const double rho = gamma_criterion(bd).value;
  RandomStream rng(16, 0);
  const auto single = gamma_curvature_estimate(bd.to_general(), {0.5, 1.0},
                                               {random_function(rng, 6)});
  CHECK(single.direction == EstimateDirection::FromAbove);
  for (double v : single.values) CHECK(v >= rho - 1e-9);

  const auto e = BirthDeathRates::ehrenfest(10, 0.5, 0.5);
  const auto fam = default_test_family(11);
  CHECK(fam.size() == 1 + 11 + 50);
  const auto est = gamma_curvature_estimate(e.to_general(), {1e-4, 1e-3, 1.0}, fam);
  for (double v : est.values) CHECK(v >= 0.5 - 1e-9);
  CHECK(std::abs(est.values[0] - est.values[1]) <= 0.1);
  CHECK_THROWS_AS(gamma_curvature_estimate(e.to_general(), {1.0}, {StateFunction(11, 1.0)}), Error);
}

TEST_CASE("criteria never exceed the estimates") {
  RandomStream rng(18, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const BirthDeathRates bd = random_chain(rng, 8);
    const GeneralRates q = bd.to_general();
    const std::vector<double> ts{0.1, 0.5, 1.0, 2.0};
    const auto w = wasserstein_criterion(bd);
    for (double v : wasserstein_curvature_estimate(q, Metric::unit(9), ts).values) {
      CHECK(w.value <= v + 1e-9);
    }
    const auto g = gamma_criterion(bd);
    if (g.valid) {
      for (double v : gamma_curvature_estimate(q, ts, default_test_family(9)).values) {
        CHECK(g.value <= v + 1e-9);
      }
    }
  }
}

TEST_CASE("covariance inequality") {
  const auto bd = BirthDeathRates::mm1(1.0, 2.0, 40);
  const auto q = bd.to_general();
  const auto cert = gamma_criterion(bd);
  RandomStream rng(19, 0);
  const StateFunction g = random_function(rng, 41);
  const auto constant = covariance_check(q, 3, StateFunction(41, 2.0), g, 1.0, cert);
  CHECK(constant.lhs == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(constant.rhs == 0.0);
  const auto at_zero = covariance_check(q, 3, g, g, 0.0, cert);
  CHECK(at_zero.lhs == doctest::Approx(0.0));
  CHECK(at_zero.rhs == 0.0);
  for (int i = 0; i < 50; ++i) {
    const StateFunction f = random_function(rng, 41);
    const auto c = covariance_check(q, 5, f, f, 1.0, cert);
    CHECK(c.lhs <= c.rhs + 1e-9);
  }
  CHECK_THROWS_AS(covariance_check(q, 3, g, g, 1.0, wasserstein_criterion(bd)), Error);
  CurvatureCertificate invalid = cert;
  invalid.valid = false;
  CHECK_THROWS_AS(covariance_check(q, 3, g, g, 1.0, invalid), Error);
}
