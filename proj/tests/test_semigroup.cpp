#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "curvctmc/curvature.hpp"
#include "curvctmc/error.hpp"
#include "curvctmc/random.hpp"
#include "curvctmc/semigroup.hpp"
#include "oracles.hpp"

using namespace curvctmc;

namespace {

GeneralRates two_state(double lambda, double nu) {
  return BirthDeathRates({lambda, 0.0}, {0.0, nu}).to_general();
}

BirthDeathRates random_chain(RandomStream& rng, std::size_t n) {
  std::vector<double> lambda(n + 1, 0.0), nu(n + 1, 0.0);
  for (std::size_t x = 0; x < n; ++x) lambda[x] = rng.uniform(0.1, 2.0);
  for (std::size_t x = 1; x <= n; ++x) nu[x] = rng.uniform(0.1, 2.0);
  return BirthDeathRates(lambda, nu);
}

StateFunction random_function(RandomStream& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& e : v) e = rng.uniform(-1.0, 1.0);
  return StateFunction(v);
}

}  // namespace

TEST_CASE("poisson weights") {
  UniformizationConfig cfg;
  for (double mean : {0.0, 0.3, 5.0, 80.0, 2000.0}) {
    const PoissonWeights w = poisson_weights(mean, cfg);
    double total = 0.0;
    for (double p : w.weights) total += p;
    CHECK(total + w.tail == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w.tail < cfg.tolerance);
  }
  const PoissonWeights w = poisson_weights(3.0, cfg);
  CHECK(w.weights[2] == doctest::Approx(std::exp(-3.0) * 4.5).epsilon(1e-12));
  UniformizationConfig tiny;
  tiny.max_terms = 10;
  CHECK_THROWS_AS(poisson_weights(100.0, tiny), Error);
  UniformizationConfig bad;
  bad.tolerance = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("trivial kernels") {
  const auto q = BirthDeathRates::ehrenfest(5, 1.0, 1.0).to_general();
  const TransitionKernel k0 = transition_matrix(q, 0.0);
  const TransitionKernel kz = transition_matrix(GeneralRates::zero(4), 3.0);
  for (std::size_t x = 0; x < 6; ++x) {
    for (std::size_t y = 0; y < 6; ++y) CHECK(k0(x, y) == (x == y ? 1.0 : 0.0));
  }
  for (std::size_t x = 0; x < 4; ++x) CHECK(kz(x, x) == 1.0);
  CHECK_THROWS_AS(transition_matrix(q, -1.0), Error);
}

TEST_CASE("two-state closed form") {
  const GeneralRates q = two_state(1.0, 1.0);
  const double t = std::log(2.0);
  const TransitionKernel k = transition_matrix(q, t);
  CHECK(k(0, 0) == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(expectation(q, 0, StateFunction::identity(2), t) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(expectation(q, 1, StateFunction::indicator(2, 1), 0.0) == 1.0);
  CHECK(expectation(q, 1, StateFunction(2, 4.0), 2.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(expectation(q, 2, StateFunction(2, 4.0), 2.0), Error);
}

TEST_CASE("semigroup applied to functions") {
  const auto q = BirthDeathRates::mm1(1.0, 1.5, 40).to_general();
  const StateFunction c(41, 2.5);
  for (double v : apply_semigroup(q, c, 1.7)) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
  RandomStream rng(2, 0);
  const StateFunction f = random_function(rng, 41);
  const StateFunction same = apply_semigroup(q, f, 0.0);
  for (std::size_t x = 0; x < 41; ++x) CHECK(same[x] == f[x]);

  const double h = 1e-5;
  const StateFunction ph = apply_semigroup(q, f, h);
  const StateFunction lf = generator_apply(q, f);
  for (std::size_t x = 0; x < 41; ++x) CHECK(std::abs((ph[x] - f[x]) / h - lf[x]) < 1e-3);

  const StateFunction pf = apply_semigroup(q, f, 2.0);
  CHECK(pf.sup_norm() <= f.sup_norm() + 1e-12);
  const TransitionKernel k = transition_matrix(q, 2.0);
  const StateFunction kf = k.apply(f);
  for (std::size_t x = 0; x < 41; ++x) {
    CHECK(kf[x] == doctest::Approx(pf[x]).epsilon(1e-10));
    const auto row = kernel_row(q, x, 2.0);
    for (std::size_t y = 0; y < 41; ++y) CHECK(std::abs(row[y] - k(x, y)) < 1e-12);
  }
}

TEST_CASE("kernels are stochastic and match the dense exponential") {
  RandomStream rng(4, 0);
  for (int trial = 0; trial < 8; ++trial) {
    const BirthDeathRates bd = random_chain(rng, 12);
    const GeneralRates q = bd.to_general();
    for (double t : {0.1, 1.0, 5.0}) {
      const TransitionKernel k = transition_matrix(q, t);
      const auto ref = oracle::expm_kernel(q, t);
      CHECK(k.truncation_error() <= 1e-12);
      for (std::size_t x = 0; x < 13; ++x) {
        double total = 0.0;
        for (std::size_t y = 0; y < 13; ++y) {
          CHECK(k(x, y) >= 0.0);
          CHECK(std::abs(k(x, y) - ref[x * 13 + y]) < 1e-10);
          total += k(x, y);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("semigroup law and stationarity") {
  RandomStream rng(8, 0);
  for (int trial = 0; trial < 6; ++trial) {
    const BirthDeathRates bd = random_chain(rng, 15);
    const GeneralRates q = bd.to_general();
    const double s = rng.uniform(0.05, 2.0), t = rng.uniform(0.05, 2.0);
    const TransitionKernel ps = transition_matrix(q, s);
    const TransitionKernel pt = transition_matrix(q, t);
    const TransitionKernel pst = transition_matrix(q, s + t);
    const TransitionKernel prod = ps.then(pt);
    CHECK(prod.time() == doctest::Approx(s + t));
    double worst = 0.0;
    for (std::size_t x = 0; x < 16; ++x) {
      for (std::size_t y = 0; y < 16; ++y) worst = std::max(worst, std::abs(prod(x, y) - pst(x, y)));
    }
    CHECK(worst <= 1e-9);
    const auto pi = stationary_distribution(bd);
    const auto moved = pt.push_forward(pi);
    for (std::size_t y = 0; y < 16; ++y) CHECK(std::abs(moved[y] - pi[y]) < 1e-10);
  }
}

TEST_CASE("kernel rows do not depend on the worker count") {
  const auto q = BirthDeathRates::ehrenfest(60, 0.4, 0.7).to_general();
  UniformizationConfig one, many;
  one.workers = 1;
  many.workers = 7;
  const TransitionKernel a = transition_matrix(q, 1.3, one);
  const TransitionKernel b = transition_matrix(q, 1.3, many);
  for (std::size_t x = 0; x < 61; ++x) {
    for (std::size_t y = 0; y < 61; ++y) CHECK(a(x, y) == b(x, y));
  }
}

TEST_CASE("contraction properties under the curvature criteria") {
  RandomStream rng(21, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const BirthDeathRates bd = random_chain(rng, 10);
    const GeneralRates q = bd.to_general();
    const Metric d = Metric::unit(11);
    const double k = wasserstein_criterion(bd).value;
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
      const TransitionKernel pt = transition_matrix(q, t);
      for (std::size_t x = 0; x + 1 < 11; ++x) {
        CHECK(w1_distance(pt.row(x), pt.row(x + 1), d) <= std::exp(-k * t) * (1 + 1e-9));
      }
    }
  }
  // Chain with decreasing births and increasing deaths.
  std::vector<double> lambda{3.0, 2.5, 2.0, 1.2, 0.6, 0.0}, nu{0.0, 0.5, 1.0, 1.6, 2.5, 3.0};
  const BirthDeathRates bd(lambda, nu);
  const double rho = gamma_criterion(bd).value;
  REQUIRE(rho >= 0.0);
  const GeneralRates q = bd.to_general();
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    const TransitionKernel pt = transition_matrix(q, t);
    for (int i = 0; i < 10; ++i) {
      const StateFunction f = random_function(rng, 6);
      const StateFunction lhs = gamma(q, pt.apply(f));
      const StateFunction gf = gamma(q, f);
      std::vector<double> root(6);
      for (std::size_t x = 0; x < 6; ++x) root[x] = std::sqrt(gf[x]);
      const StateFunction rhs = pt.apply(StateFunction(root));
      for (std::size_t x = 0; x < 6; ++x) {
        CHECK(std::sqrt(lhs[x]) <= std::exp(-rho * t) * rhs[x] * (1 + 1e-9));
      }
    }
  }
}

TEST_CASE("truncation tail mass") {
  const auto zero = GeneralRates(StateSpace(10, true), std::vector<std::vector<GeneralRates::Transition>>(11));
  CHECK(truncation_tail_mass(zero, 2, 1.0, 2).mass == 0.0);
  const auto q = BirthDeathRates::mm1(1.0, 2.0, 200).to_general();
  const TailMassReport r = truncation_tail_mass(q, 0, 1.0, 2);
  CHECK(r.mass < 1e-12);
  CHECK_FALSE(r.invalid_start);
  const TailMassReport top = truncation_tail_mass(q, 200, 1.0, 2);
  CHECK(top.invalid_start);
  CHECK(top.mass >= transition_matrix(q, 1.0)(200, 200));
}

TEST_CASE("kernel csv export") {
  std::ostringstream out;
  transition_matrix(two_state(1.0, 1.0), std::log(2.0)).write_csv(out);
  const std::string text = out.str();
  CHECK(text.rfind("0.625", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
