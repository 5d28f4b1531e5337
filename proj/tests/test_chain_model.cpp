#include <doctest.h>

#include <cmath>
#include <vector>

#include "curvctmc/chain_model.hpp"
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

GeneralRates random_general(RandomStream& rng, std::size_t n) {
  std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (x != y && rng.uniform() < 0.6) q[x][y] = rng.uniform(0.0, 2.0);
    }
  }
  return GeneralRates::from_dense(q);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Config;
}

}  // namespace

TEST_CASE("state space and functions validate their input") {
  CHECK_THROWS_AS(StateSpace(0), Error);
  CHECK(StateSpace(3).size() == 4);
  CHECK_THROWS_AS(StateFunction({1.0, NAN}), Error);
  CHECK_THROWS_AS(StateFunction({1.0, INFINITY}), Error);
  const StateFunction id = StateFunction::identity(4);
  CHECK(id[3] == 3.0);
  CHECK(id.sup_norm() == 3.0);
  CHECK(StateFunction::indicator(4, 2)[2] == 1.0);
}

TEST_CASE("metrics") {
  const Metric unit = Metric::unit(5);
  CHECK(unit.distance(1, 4) == 3.0);
  CHECK(unit.distance(4, 1) == 3.0);
  const Metric w = Metric::weighted({1.0, 2.0, 0.5});
  CHECK(w.distance(0, 3) == doctest::Approx(3.5));
  CHECK(w.distance(2, 1) == doctest::Approx(2.0));
  CHECK_THROWS_AS(Metric::weighted({1.0, 0.0}), Error);
  CHECK_THROWS_AS(Metric::weighted({1.0, -1.0}), Error);
}

TEST_CASE("rate validation") {
  CHECK(code_of([] { BirthDeathRates({1.0, 0.0}, {0.5, 1.0}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { BirthDeathRates({1.0, 1.0}, {0.0, 1.0}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { BirthDeathRates({1.0, 0.0, 0.0}, {0.0, 1.0, 1.0}); }) == ErrorCode::Reducible);
  CHECK(code_of([] { BirthDeathRates({1.0, 1.0, 0.0}, {0.0, 0.0, 1.0}); }) == ErrorCode::Reducible);
  CHECK_THROWS_AS(GeneralRates(StateSpace(1), {{{0, 1.0}}, {}}), Error);
  CHECK_THROWS_AS(GeneralRates(StateSpace(1), {{{1, -1.0}}, {}}), Error);
  CHECK_THROWS_AS(GeneralRates(StateSpace(1), {{{1, 1.0}, {1, 2.0}}, {}}), Error);
  // All-zero rates are a valid general chain.
  CHECK(GeneralRates::zero(3).max_total_rate() == 0.0);
}

TEST_CASE("presets") {
  const auto e = BirthDeathRates::ehrenfest(10, 0.5, 0.5);
  CHECK(e.lambda()[0] == 5.0);
  CHECK(e.lambda()[10] == 0.0);
  CHECK(e.nu()[10] == 5.0);
  const auto q = BirthDeathRates::mm1(1.0, 2.0, 20);
  CHECK(q.truncated());
  CHECK(q.lambda()[20] == 1.0);
  CHECK(q.birth(20) == 0.0);
  CHECK(q.death(0) == 0.0);
  CHECK(q.to_general().rate(20, 21 - 1) == 0.0);
}

TEST_CASE("generator") {
  const auto q = BirthDeathRates::mm1(1.0, 2.0, 10).to_general();
  const StateFunction c(11, 3.0);
  for (double v : generator_apply(q, c)) CHECK(v == 0.0);
  const StateFunction lf = generator_apply(q, StateFunction::identity(11));
  CHECK(lf[0] == doctest::Approx(1.0));
  for (std::size_t x = 1; x < 10; ++x) CHECK(lf[x] == doctest::Approx(-1.0));

  RandomStream rng(7, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const GeneralRates g = random_general(rng, 5);
    const StateFunction f = random_function(rng, 5);
    const auto dense = oracle::dense_generator(g);
    const StateFunction got = generator_apply(g, f);
    for (std::size_t x = 0; x < 5; ++x) {
      double expect = 0.0;
      for (std::size_t y = 0; y < 5; ++y) expect += dense[x * 5 + y] * f[y];
      CHECK(got[x] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(generator_apply(q, StateFunction::identity(3)), Error);
}

TEST_CASE("carre du champ") {
  const auto bd = BirthDeathRates::ehrenfest(6, 0.3, 0.8);
  const auto q = bd.to_general();
  const StateFunction g = gamma(q, StateFunction::identity(7));
  for (std::size_t x = 0; x <= 6; ++x) CHECK(g[x] == doctest::Approx(0.5 * (bd.birth(x) + bd.death(x))));

  RandomStream rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const GeneralRates r = random_general(rng, 6);
    const StateFunction f = random_function(rng, 6);
    const StateFunction h = random_function(rng, 6);
    std::vector<double> fh(6);
    for (std::size_t x = 0; x < 6; ++x) fh[x] = f[x] * h[x];
    const StateFunction lfh = generator_apply(r, StateFunction(fh));
    const StateFunction lf = generator_apply(r, f);
    const StateFunction lh = generator_apply(r, h);
    const StateFunction c = carre_du_champ(r, f, h);
    const StateFunction c2 = carre_du_champ(r, h, f);
    const StateFunction gf = gamma(r, f);
    const StateFunction gh = gamma(r, h);
    for (std::size_t x = 0; x < 6; ++x) {
      CHECK(c[x] == doctest::Approx(0.5 * (lfh[x] - f[x] * lh[x] - h[x] * lf[x])).epsilon(1e-12));
      CHECK(c[x] == doctest::Approx(c2[x]));
      CHECK(gf[x] >= 0.0);
      CHECK(c[x] * c[x] <= gf[x] * gh[x] * (1 + 1e-12) + 1e-15);
    }
  }
}

TEST_CASE("gamma2") {
  const auto q = BirthDeathRates::mm1(1.0, 2.0, 12).to_general();
  for (double v : gamma2(q, StateFunction(13, 1.5))) CHECK(v == 0.0);
  const StateFunction g2 = gamma2(q, StateFunction::identity(13));
  for (std::size_t x = 2; x <= 10; ++x) CHECK(std::abs(g2[x]) < 1e-12);

  // Recompute from the definition with dense matrices.
  RandomStream rng(3, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const GeneralRates r = random_general(rng, 5);
    const StateFunction f = random_function(rng, 5);
    const auto dense = oracle::dense_generator(r);
    auto apply = [&](const std::vector<double>& v) {
      std::vector<double> out(5, 0.0);
      for (std::size_t x = 0; x < 5; ++x) {
        for (std::size_t y = 0; y < 5; ++y) out[x] += dense[x * 5 + y] * v[y];
      }
      return out;
    };
    auto gam = [&](const std::vector<double>& a, const std::vector<double>& b) {
      std::vector<double> ab(5);
      for (std::size_t x = 0; x < 5; ++x) ab[x] = a[x] * b[x];
      const auto lab = apply(ab), la = apply(a), lb = apply(b);
      std::vector<double> out(5);
      for (std::size_t x = 0; x < 5; ++x) out[x] = 0.5 * (lab[x] - a[x] * lb[x] - b[x] * la[x]);
      return out;
    };
    const auto fv = f.vector();
    const auto lgf = apply(gam(fv, fv));
    const auto gflf = gam(fv, apply(fv));
    const StateFunction got = gamma2(r, f);
    for (std::size_t x = 0; x < 5; ++x) {
      CHECK(got[x] == doctest::Approx(0.5 * (lgf[x] - 2.0 * gflf[x])).epsilon(1e-10));
    }
  }
}

TEST_CASE("lipschitz seminorm") {
  const Metric d = Metric::unit(8);
  CHECK(lipschitz_seminorm(StateFunction::identity(8), d) == 1.0);
  CHECK(lipschitz_seminorm(StateFunction(8, 2.0), d) == 0.0);
  RandomStream rng(5, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(7);
    for (auto& e : w) e = rng.uniform(0.2, 3.0);
    const Metric m = Metric::weighted(w);
    const StateFunction f = random_function(rng, 8);
    const StateFunction h = random_function(rng, 8);
    CHECK(lipschitz_seminorm(f, m) == doctest::Approx(oracle::lipschitz_all_pairs(f.values(), m)));
    std::vector<double> sum(8), scaled(8);
    for (std::size_t x = 0; x < 8; ++x) {
      sum[x] = f[x] + h[x];
      scaled[x] = -2.5 * f[x];
    }
    CHECK(lipschitz_seminorm(StateFunction(sum), m) <=
          lipschitz_seminorm(f, m) + lipschitz_seminorm(h, m) + 1e-12);
    CHECK(lipschitz_seminorm(StateFunction(scaled), m) ==
          doctest::Approx(2.5 * lipschitz_seminorm(f, m)));
  }
}

TEST_CASE("angle bracket and jump bounds") {
  const auto mm1 = BirthDeathRates::mm1(1.0, 2.0, 30).to_general();
  CHECK(angle_bracket_bound(mm1, Metric::unit(31)) == doctest::Approx(3.0));
  CHECK(angle_bracket_bound(mm1, Metric::weighted(std::vector<double>(30, 2.0))) ==
        doctest::Approx(12.0));
  const auto e = BirthDeathRates::ehrenfest(10, 0.5, 0.5).to_general();
  CHECK(angle_bracket_bound(e, Metric::unit(11)) == doctest::Approx(5.0));
  CHECK(jump_bound(e, Metric::unit(11)) == 1.0);
  std::vector<double> w(10, 1.0);
  w[4] = 3.0;
  CHECK(jump_bound(e, Metric::weighted(w)) == 3.0);
  std::vector<std::vector<double>> q(5, std::vector<double>(5, 0.0));
  q[0][4] = 1.0;
  q[4][0] = 1.0;
  CHECK(jump_bound(GeneralRates::from_dense(q), Metric::unit(5)) == 4.0);
}

TEST_CASE("stationary distribution") {
  const auto pi = stationary_distribution(BirthDeathRates::mm1(1.0, 2.0, 2));
  CHECK(pi[0] == doctest::Approx(4.0 / 7.0));
  CHECK(pi[1] == doctest::Approx(2.0 / 7.0));
  CHECK(pi[2] == doctest::Approx(1.0 / 7.0));

  const auto e = stationary_distribution(BirthDeathRates::ehrenfest(12, 0.3, 0.9));
  const auto b = oracle::binomial_pmf(12, 0.25);
  for (std::size_t x = 0; x <= 12; ++x) CHECK(e[x] == doctest::Approx(b[x]).epsilon(1e-12));

  RandomStream rng(9, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform() * 10);
    std::vector<double> lambda(n + 1, 0.0), nu(n + 1, 0.0);
    for (std::size_t x = 0; x < n; ++x) lambda[x] = rng.uniform(0.1, 3.0);
    for (std::size_t x = 1; x <= n; ++x) nu[x] = rng.uniform(0.1, 3.0);
    const BirthDeathRates bd(lambda, nu);
    const auto p = stationary_distribution(bd);
    const auto solved = oracle::stationary_by_solve(bd.to_general());
    const auto dense = oracle::dense_generator(bd.to_general());
    for (std::size_t y = 0; y <= n; ++y) {
      CHECK(p[y] == doctest::Approx(solved[y]).epsilon(1e-10));
      double flow = 0.0;
      for (std::size_t x = 0; x <= n; ++x) flow += p[x] * dense[x * (n + 1) + y];
      CHECK(std::abs(flow) < 1e-12);
      if (y < n) CHECK(std::abs(p[y] * lambda[y] - p[y + 1] * nu[y + 1]) < 1e-12);
    }
  }
}

TEST_CASE("m/m/1 forward gradient commutes with the generator in the interior") {
  const auto q = BirthDeathRates::mm1(1.3, 0.7, 40).to_general();
  RandomStream rng(17, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const StateFunction u = random_function(rng, 41);
    const StateFunction lu = generator_apply(q, u);
    std::vector<double> du(41, 0.0);
    for (std::size_t x = 0; x < 40; ++x) du[x] = u[x + 1] - u[x];
    const StateFunction ldu = generator_apply(q, StateFunction(du));
    for (std::size_t x = 1; x + 2 <= 40; ++x) {
      CHECK(std::abs((lu[x + 1] - lu[x]) - ldu[x]) < 1e-12);
    }
  }
}
