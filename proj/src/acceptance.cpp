#include "curvctmc/acceptance.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "curvctmc/bounds.hpp"
#include "curvctmc/chain_model.hpp"
#include "curvctmc/curvature.hpp"
#include "curvctmc/error.hpp"
#include "curvctmc/random.hpp"
#include "curvctmc/semigroup.hpp"
#include "oracles.hpp"

namespace curvctmc {

namespace {

constexpr std::size_t kMaxViolations = 8;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Recorder {
 public:
  explicit Recorder(CriterionReport& report) : report_(report) {}

  template <class Describe>
  void check(bool ok, Describe&& describe) {
    ++report_.checks;
    if (ok) return;
    ++report_.failures;
    if (report_.violations.size() < kMaxViolations) report_.violations.push_back(describe());
  }

  void tail(const std::string& label, const TailEstimate& est, const std::string& bound) {
    for (std::size_t i = 0; i < est.y.size(); ++i) {
      if (est.status[i] == CheckStatus::Untested) {
        ++report_.checks;
        ++report_.untested;
        continue;
      }
      check(est.status[i] == CheckStatus::Pass, [&] {
        return "(" + label + ", y=" + num(est.y[i]) + ", " + bound + "): upper " +
               num(est.upper[i]) + " > bound " + num(est.analytic_bound[i]);
      });
    }
    report_.tails.emplace_back(label, est);
  }

 private:
  CriterionReport& report_;
};

UniformizationConfig uniformization(const AcceptanceConfig& cfg) {
  UniformizationConfig u;
  u.workers = cfg.workers;
  return u;
}

MonteCarloConfig monte_carlo(const AcceptanceConfig& cfg) {
  MonteCarloConfig mc;
  mc.n_paths = cfg.n_paths;
  mc.seed = cfg.seed;
  mc.confidence = cfg.confidence;
  mc.workers = cfg.workers;
  mc.uniformization = uniformization(cfg);
  return mc;
}

StateFunction random_values(RandomStream& rng, std::size_t size) {
  std::vector<double> v(size);
  for (auto& e : v) e = rng.uniform(-1.0, 1.0);
  return StateFunction(std::move(v));
}

/// Random walk with increments in [-1, 1], so Lipschitz for the unit metric.
StateFunction random_lipschitz(RandomStream& rng, std::size_t size) {
  std::vector<double> v(size);
  for (std::size_t x = 1; x < size; ++x) v[x] = v[x - 1] + rng.uniform(-1.0, 1.0);
  return StateFunction(std::move(v));
}

std::size_t random_size(RandomStream& rng, std::size_t lo, std::size_t hi) {
  return lo + std::min(hi - lo, static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1)));
}

BirthDeathRates random_chain(RandomStream& rng) {
  const std::size_t n = random_size(rng, 2, 30);
  std::vector<double> lambda(n + 1, 0.0), nu(n + 1, 0.0);
  for (std::size_t x = 0; x < n; ++x) lambda[x] = rng.uniform(0.1, 2.0);
  for (std::size_t x = 1; x <= n; ++x) nu[x] = rng.uniform(0.1, 2.0);
  return BirthDeathRates(std::move(lambda), std::move(nu));
}

/// Decreasing births and increasing deaths with steps of at least a random
/// rho in [0, 0.3].
BirthDeathRates monotone_chain(RandomStream& rng) {
  const std::size_t n = random_size(rng, 3, 30);
  const double rho = rng.uniform(0.0, 0.3);
  std::vector<double> lambda(n + 1, 0.0), nu(n + 1, 0.0);
  lambda[n - 1] = rng.uniform(0.1, 0.6);
  for (std::size_t x = n - 1; x-- > 0;) lambda[x] = lambda[x + 1] + rho + rng.uniform(0.0, 0.2);
  nu[1] = rng.uniform(0.1, 0.6);
  for (std::size_t x = 2; x <= n; ++x) nu[x] = nu[x - 1] + rho + rng.uniform(0.0, 0.2);
  return BirthDeathRates(std::move(lambda), std::move(nu));
}

std::string chain_label(const BirthDeathRates& bd, std::size_t index) {
  return "chain " + std::to_string(index) + " N=" + std::to_string(bd.max_state());
}

// Stream indices used by the generated fixtures, kept apart from the path
// streams of the Monte Carlo criteria.
constexpr std::uint64_t kFixtureStreams = std::uint64_t{1} << 40;

RandomStream fixture_stream(const AcceptanceConfig& cfg, int criterion, std::uint64_t index) {
  return RandomStream(cfg.seed, kFixtureStreams + static_cast<std::uint64_t>(criterion) * 100'000 + index);
}

const double kTimes[] = {0.1, 0.5, 1.0, 2.0};

void contraction(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  double worst = 0.0;
  for (std::size_t c = 0; c < 20; ++c) {
    RandomStream rng = fixture_stream(cfg, 1, c);
    const BirthDeathRates bd = random_chain(rng);
    const double k = wasserstein_criterion(bd).value;
    const GeneralRates rates = bd.to_general();
    const Metric d = Metric::unit(rates.size());
    std::vector<StateFunction> fns;
    for (int i = 0; i < 10; ++i) fns.push_back(random_lipschitz(rng, rates.size()));
    for (double t : kTimes) {
      const TransitionKernel kernel = transition_matrix(rates, t, uniformization(cfg));
      for (const auto& f : fns) {
        const double lhs = lipschitz_seminorm(kernel.apply(f), d);
        const double rhs = std::exp(-k * t) * lipschitz_seminorm(f, d);
        worst = std::max(worst, lhs / rhs);
        rec.check(lhs <= rhs * (1.0 + 1e-9), [&] {
          return "(" + chain_label(bd, c) + ", t=" + num(t) + "): " + num(lhs) + " > " + num(rhs);
        });
      }
    }
  }
  r.detail = "max ||P_t f||_Lip / (exp(-Kt) ||f||_Lip) = " + num(worst);
}

void commutation(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  double worst = 0.0;
  for (std::size_t c = 0; c < 20; ++c) {
    RandomStream rng = fixture_stream(cfg, 2, c);
    const BirthDeathRates bd = monotone_chain(rng);
    const CurvatureCertificate cert = gamma_criterion(bd);
    const GeneralRates rates = bd.to_general();
    std::vector<StateFunction> fns;
    for (int i = 0; i < 10; ++i) fns.push_back(random_values(rng, rates.size()));
    for (double t : kTimes) {
      const TransitionKernel kernel = transition_matrix(rates, t, uniformization(cfg));
      for (const auto& f : fns) {
        const StateFunction moved = gamma(rates, kernel.apply(f));
        const StateFunction g = gamma(rates, f);
        std::vector<double> root(g.size());
        for (std::size_t x = 0; x < g.size(); ++x) root[x] = std::sqrt(g[x]);
        const StateFunction averaged = kernel.apply(StateFunction(std::move(root)));
        for (std::size_t x = 0; x < rates.size(); ++x) {
          const double lhs = std::sqrt(moved[x]);
          const double rhs = std::exp(-cert.value * t) * averaged[x];
          if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
          rec.check(lhs <= rhs * (1.0 + 1e-9), [&] {
            return "(" + chain_label(bd, c) + ", t=" + num(t) + ", x=" + std::to_string(x) +
                   "): " + num(lhs) + " > " + num(rhs);
          });
        }
      }
    }
  }
  r.detail = "max (Gamma P_t f)^1/2 / (exp(-rho t) P_t (Gamma f)^1/2) = " + num(worst);
}

void gamma2_inequality(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < 20; ++c) {
    RandomStream rng = fixture_stream(cfg, 2, c);
    const BirthDeathRates bd = monotone_chain(rng);
    const double rho = gamma_criterion(bd).value;
    const GeneralRates rates = bd.to_general();
    for (int i = 0; i < 100; ++i) {
      const double gap = gamma2_gap(rates, random_values(rng, rates.size()), rho).min();
      worst = std::min(worst, gap);
      rec.check(gap >= -1e-12, [&] { return "(" + chain_label(bd, c) + "): gap " + num(gap); });
    }
  }
  r.detail = "min gap = " + num(worst);
}

void w1_oracle(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  constexpr std::size_t kSize = 8;
  double worst = 0.0;
  auto random_law = [](RandomStream& rng) {
    std::vector<double> p(kSize, 0.0);
    const std::size_t support = random_size(rng, 1, 5);
    for (std::size_t i = 0; i < support; ++i) {
      p[random_size(rng, 0, kSize - 1)] += rng.uniform(0.05, 1.0);
    }
    double total = 0.0;
    for (double v : p) total += v;
    for (double& v : p) v /= total;
    return p;
  };
  for (std::size_t i = 0; i < 200; ++i) {
    RandomStream rng = fixture_stream(cfg, 4, i);
    std::vector<double> w(kSize - 1);
    for (auto& e : w) e = rng.uniform(0.5, 2.0);
    const Metric d = Metric::weighted(w);
    const auto mu = random_law(rng);
    const auto nu = random_law(rng);
    const double fast = w1_distance(mu, nu, d);
    const double exact = oracle::w1_min_cost_flow(mu, nu, d);
    worst = std::max(worst, std::abs(fast - exact));
    rec.check(std::abs(fast - exact) <= 1e-9, [&] {
      return "(pair " + std::to_string(i) + "): " + num(fast) + " vs " + num(exact);
    });
  }
  r.detail = "max |cdf formula - coupling optimum| = " + num(worst);
}

void covariance(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  struct Case {
    std::string label;
    BirthDeathRates bd;
    std::vector<std::size_t> starts;
  };
  const std::vector<Case> cases{
      {"mm1 N=60", BirthDeathRates::mm1(1.0, 2.0, 60), {0, 5, 15, 30}},
      {"ehrenfest n=20", BirthDeathRates::ehrenfest(20, 0.5, 0.5), {0, 5, 10, 15, 20}},
  };
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& cs = cases[ci];
    const CurvatureCertificate cert = gamma_criterion(cs.bd);
    const GeneralRates rates = cs.bd.to_general();
    RandomStream rng = fixture_stream(cfg, 5, ci);
    for (int i = 0; i < 50; ++i) {
      const StateFunction g1 = random_values(rng, rates.size());
      const StateFunction g2 = random_values(rng, rates.size());
      for (double t : {0.5, 1.0}) {
        for (std::size_t x0 : cs.starts) {
          const CovarianceCheck cc = covariance_check(rates, x0, g1, g2, t, cert, uniformization(cfg));
          worst = std::max(worst, cc.lhs - cc.rhs);
          rec.check(cc.lhs <= cc.rhs + 1e-9, [&] {
            return "(" + cs.label + ", x0=" + std::to_string(x0) + ", t=" + num(t) + "): cov " +
                   num(cc.lhs) + " > " + num(cc.rhs);
          });
        }
      }
    }
  }
  r.detail = "max lhs - rhs = " + num(worst);
}

void ehrenfest_monte_carlo(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  const BirthDeathRates bd = BirthDeathRates::ehrenfest(50, 0.5, 0.5);
  const GeneralRates rates = bd.to_general();
  const Metric d = Metric::unit(rates.size());
  const ChainParams params = chain_params(rates, d);
  DeviationBoundSpec spec;
  spec.t = 1.0;
  spec.lip = 1.0;
  spec.jump = params.jump_bound;
  spec.angle_bracket = params.angle_bracket;
  spec.K = wasserstein_criterion(bd).value;
  const std::vector<double> ys{2.0, 4.0, 6.0, 8.0};
  TailEstimate est = monte_carlo_tail(rates, 25, StateFunction::identity(rates.size()), 1.0, ys,
                                      monte_carlo(cfg));
  std::vector<double> bound;
  for (double y : ys) {
    bound.push_back(cfg.bound_scale * std::min(bound_thm31(y, spec), bound_cor49(y, spec)));
  }
  compare_with_bound(est, bound);
  rec.tail("ehrenfest n=50 x0=25 t=1", est, "thm31/cor49");
  r.detail = "K=" + num(*spec.K) + " V2=" + num(*spec.angle_bracket) + " p_hat(y=2)=" +
             num(est.p_hat[0]) + " bound(y=2)=" + num(bound[0]);
}

void stationary_exact(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  const BirthDeathRates bd = BirthDeathRates::ehrenfest(30, 0.5, 0.5);
  const auto pi = stationary_distribution(bd);
  const auto binom = oracle::binomial_pmf(30, 0.5);
  double law_gap = 0.0, mean = 0.0;
  for (std::size_t x = 0; x < pi.size(); ++x) {
    law_gap = std::max(law_gap, std::abs(pi[x] - binom[x]));
    mean += static_cast<double>(x) * pi[x];
  }
  rec.check(law_gap <= 1e-12, [&] { return "(ehrenfest n=30): stationary law off by " + num(law_gap); });
  DeviationBoundSpec spec;
  spec.t = kStationaryTime;
  spec.lip = 1.0;
  spec.K = wasserstein_criterion(bd).value;
  spec.angle_bracket = angle_bracket_bound(bd.to_general(), Metric::unit(bd.size()));
  double tightest = 0.0;
  for (int y = 1; y <= 8; ++y) {
    double tail = 0.0;
    for (std::size_t x = 0; x < pi.size(); ++x) {
      if (static_cast<double>(x) - mean >= static_cast<double>(y) - 1e-12) tail += pi[x];
    }
    const double bound = cfg.bound_scale * bound_cor49(y, spec);
    tightest = std::max(tightest, tail / bound);
    rec.check(tail <= bound, [&] {
      return "(ehrenfest n=30 stationary, y=" + std::to_string(y) + ", cor49): tail " + num(tail) +
             " > bound " + num(bound);
    });
  }
  r.detail = "max tail / bound = " + num(tightest);
}

void ou_gaussian(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  const double lambda = 0.5, nu = 0.5;
  double worst_identity = 0.0;
  for (double t : {0.5, 1.0, kStationaryTime}) {
    const double var = ou_variance(lambda, nu, t);
    for (int k = 1; k <= 20; ++k) {
      const double y = 0.1 * k;
      const double exact = ou_exact_tail(0.0, lambda, nu, t, 1.0, y);
      const double limit = bound_cor411(y, t, nu, 1.0);
      const double bound = cfg.bound_scale * limit;
      rec.check(exact <= bound, [&] {
        return "(ou t=" + num(t) + ", y=" + num(y) + ", cor411): tail " + num(exact) + " > " +
               num(bound);
      });
      const double chernoff = std::exp(-y * y / (2.0 * var));
      const double rel = std::abs(limit - chernoff) / chernoff;
      worst_identity = std::max(worst_identity, rel);
      rec.check(rel <= 1e-12, [&] {
        return "(ou t=" + num(t) + ", y=" + num(y) + "): cor411 " + num(limit) +
               " != exp(-y^2/(2 sigma^2)) " + num(chernoff);
      });
    }
  }
  r.detail = "max relative gap to exp(-y^2/(2 sigma^2)) = " + num(worst_identity);
}

void fluid_limit(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  const double nu = 0.5, t = 1.0, n = 1e4;
  double worst_exponent = 0.0, worst_value = 0.0;
  for (int k = 0; k <= 15; ++k) {
    const double y = 0.5 + 0.1 * k;
    const double pre = log_bound_ehrenfest_prelimit(y, n, t, nu, 1.0);
    const double lim = std::log(bound_cor411(y, t, nu, 1.0));
    const double rel = std::abs(pre - lim) / std::abs(lim);
    worst_exponent = std::max(worst_exponent, rel);
    worst_value = std::max(worst_value, std::abs(std::exp(pre) - std::exp(lim)) / std::exp(lim));
    rec.check(rel <= 0.05, [&] {
      return "(ehrenfest n=1e4, y=" + num(y) + ", prelimit vs cor411): exponent gap " + num(rel);
    });
  }
  const std::vector<double> ys{0.5, 1.0, 1.5};
  RescaledTail rescaled = ehrenfest_rescaled_tail(400, 0.5, nu, 0.0, t, ys, monte_carlo(cfg));
  std::vector<double> bound;
  for (double y : ys) bound.push_back(cfg.bound_scale * bound_cor411(y, t, nu, 1.0));
  compare_with_bound(rescaled.tail, bound, 0.01);
  rec.tail("ehrenfest n=400 rescaled t=1", rescaled.tail, "cor411");
  r.detail = "max relative exponent gap = " + num(worst_exponent) +
             ", max relative value gap = " + num(worst_value);
}

void mm1_multitime(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  const double lambda = 1.0, nu = 1.2;
  const std::vector<double> times{1.0, 2.0, 3.0};
  const MultiLipschitzFn f = MultiLipschitzFn::coordinate_average(times.size());
  rec.check(verify_lipschitz(f, 200, 2000, cfg.seed), [] {
    return std::string("(coordinate average): declared Lipschitz constant violated");
  });
  const std::vector<double> ys{1.0, 2.0, 3.0};
  TailEstimate est =
      mm1_multisample_tail(lambda, nu, 200, 0, times, f, ys, monte_carlo(cfg));
  std::vector<double> bound;
  for (double y : ys) {
    bound.push_back(cfg.bound_scale *
                    bound_cor412(y, times.size(), times.back(), lambda, nu, f.lipschitz()));
  }
  compare_with_bound(est, bound);
  rec.tail("mm1 N=200 times=(1,2,3)", est, "cor412");
  r.detail = "mean " + num(est.mean) + ", bound(y=1)=" + num(bound[0]) +
             ", tail mass " + num(est.truncation_tail_mass);
}

void thm34_optimizer(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  struct Case {
    std::string label;
    BirthDeathRates bd;
  };
  const std::vector<Case> cases{{"mm1 N=100", BirthDeathRates::mm1(1.0, 2.0, 100)},
                                {"ehrenfest n=20", BirthDeathRates::ehrenfest(20, 0.5, 0.5)}};
  double worst_gap = -std::numeric_limits<double>::infinity(), worst_slope = 0.0;
  for (const auto& cs : cases) {
    const GeneralRates rates = cs.bd.to_general();
    const Metric d = Metric::unit(rates.size());
    const StateFunction f = StateFunction::identity(rates.size());
    const double rho = gamma_criterion(cs.bd).value;
    for (double t : {0.5, 1.0}) {
      const PsiFunction psi(rates, f, t, rho, d);
      const double lam = 1e-6;
      const double slope_rel = std::abs(psi(lam) / lam - psi.slope_at_zero()) / psi.slope_at_zero();
      worst_slope = std::max(worst_slope, slope_rel);
      rec.check(slope_rel <= 1e-6, [&] {
        return "(" + cs.label + ", t=" + num(t) + "): psi slope off by " + num(slope_rel);
      });
      DeviationBoundSpec spec;
      spec.t = t;
      spec.lip = psi.lipschitz();
      spec.jump = jump_bound(rates, d);
      spec.rho = rho;
      spec.gamma_inf = psi.gamma_sup();
      for (double y : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double direct = optimize_thm34(y, psi).value;
        const double closed_form = cfg.bound_scale * bound_cor36(y, spec);
        worst_gap = std::max(worst_gap, direct - closed_form);
        rec.check(direct <= closed_form + 1e-9, [&] {
          return "(" + cs.label + ", t=" + num(t) + ", y=" + num(y) + ", thm34 vs cor36): " +
                 num(direct) + " > " + num(closed_form);
        });
      }
    }
  }
  r.detail = "max thm34 - cor36 = " + num(worst_gap) + ", max slope error = " + num(worst_slope);
}

void integration_by_parts(CriterionReport& r, const AcceptanceConfig& cfg) {
  Recorder rec(r);
  constexpr std::size_t kTop = 300, kMaxX = 50, kSupport = 30;
  const BirthDeathRates bd = BirthDeathRates::mm1(1.0, 1.0, kTop);
  const GeneralRates rates = bd.to_general();
  const TransitionKernel kernel = transition_matrix(rates, 1.0, uniformization(cfg));
  double worst = 0.0, worst_commutation = 0.0;
  std::size_t worst_x = 0, settled_from = 0;
  std::vector<double> per_x(kMaxX + 1, 0.0);
  for (std::uint64_t i = 0; i < 20; ++i) {
    RandomStream rng = fixture_stream(cfg, 12, i);
    std::vector<double> u(rates.size(), 0.0);
    for (std::size_t y = 0; y <= kSupport; ++y) u[y] = rng.uniform(-1.0, 1.0);
    for (std::size_t x = 0; x <= kMaxX; ++x) {
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t y = 0; y < rates.size(); ++y) {
        lhs += u[y] * kernel(x + 1, y);
        if (y + 1 < rates.size()) rhs += u[y + 1] * kernel(x, y);
      }
      const double gap = std::abs(lhs - rhs);
      per_x[x] = std::max(per_x[x], gap);
      if (gap > worst) {
        worst = gap;
        worst_x = x;
      }
      rec.check(gap <= 1e-6, [&] {
        return "(mm1 N=300, t=1, u " + std::to_string(i) + ", x=" + std::to_string(x) +
               "): sides differ by " + num(gap);
      });
    }
    // d+(L u) = L(d+ u) at interior states.
    std::vector<double> w(rates.size());
    for (auto& e : w) e = rng.uniform(-1.0, 1.0);
    const StateFunction lw = generator_apply(rates, StateFunction(w));
    std::vector<double> dw(rates.size(), 0.0);
    for (std::size_t x = 0; x + 1 < rates.size(); ++x) dw[x] = w[x + 1] - w[x];
    const StateFunction ldw = generator_apply(rates, StateFunction(dw));
    for (std::size_t x = 1; x + 2 < rates.size(); ++x) {
      const double gap = std::abs((lw[x + 1] - lw[x]) - ldw[x]);
      worst_commutation = std::max(worst_commutation, gap);
      rec.check(gap <= 1e-12, [&] {
        return "(mm1 N=300, x=" + std::to_string(x) + "): d+L - Ld+ = " + num(gap);
      });
    }
  }
  for (std::size_t x = kMaxX + 1; x-- > 0;) {
    if (per_x[x] > 1e-6) {
      settled_from = x + 1;
      break;
    }
  }
  r.detail = "max side gap " + num(worst) + " at x=" + std::to_string(worst_x) +
             ", within 1e-6 from x=" + std::to_string(settled_from) +
             ", max interior commutation gap " + num(worst_commutation);
}

struct CriterionInfo {
  const char* title;
  double time_limit;
  void (*run)(CriterionReport&, const AcceptanceConfig&);
};

const CriterionInfo kCriteria[kCriterionCount] = {
    {"semigroup contraction", 30.0, contraction},
    {"gamma commutation", 30.0, commutation},
    {"gamma_2 inequality", 10.0, gamma2_inequality},
    {"w1 oracle equivalence", 10.0, w1_oracle},
    {"covariance inequality", 30.0, covariance},
    {"monte carlo vs thm31/cor49", 120.0, ehrenfest_monte_carlo},
    {"stationary exact check", 5.0, stationary_exact},
    {"ou gaussian bound", 1.0, ou_gaussian},
    {"fluid-limit consistency", 180.0, fluid_limit},
    {"m/m/1 multidimensional", 120.0, mm1_multitime},
    {"thm34 numeric optimizer", 10.0, thm34_optimizer},
    {"integration by parts", 30.0, integration_by_parts},
};

}  // namespace

CriterionReport run_criterion(int id, const AcceptanceConfig& cfg) {
  if (id < 1 || id > kCriterionCount) {
    throw Error(ErrorCode::InvalidArgument, "no acceptance criterion " + std::to_string(id));
  }
  const CriterionInfo& info = kCriteria[id - 1];
  CriterionReport report;
  report.id = id;
  report.title = info.title;
  report.time_limit = info.time_limit;
  const auto start = std::chrono::steady_clock::now();
  info.run(report, cfg);
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool too_slow = cfg.enforce_time_limits && report.seconds > report.time_limit;
  if (too_slow && report.violations.size() < kMaxViolations) {
    report.violations.push_back("runtime " + num(report.seconds) + " s exceeds " +
                                num(report.time_limit) + " s");
  }
  if (report.failures > 0 || too_slow) {
    report.status = CheckStatus::Fail;
  } else if (report.checks == report.untested) {
    report.status = CheckStatus::Untested;
  } else {
    report.status = CheckStatus::Pass;
  }
  return report;
}

std::vector<CriterionReport> run_acceptance(
    const AcceptanceConfig& cfg, const std::function<void(const CriterionReport&)>& on_done) {
  std::vector<int> ids = cfg.criteria;
  if (ids.empty()) {
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  }
  std::vector<CriterionReport> out;
  for (int id : ids) {
    out.push_back(run_criterion(id, cfg));
    if (on_done) on_done(out.back());
  }
  return out;
}

std::string summary_line(const CriterionReport& r) {
  std::string status = to_string(r.status);
  for (auto& ch : status) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  char head[160];
  std::snprintf(head, sizeof head, "[%s] criterion %2d %-28s %7.2f s (limit %g s) checks=%zu fail=%zu untested=%zu",
                status.c_str(), r.id, r.title.c_str(), r.seconds, r.time_limit, r.checks,
                r.failures, r.untested);
  return std::string(head) + "  " + r.detail;
}

}  // namespace curvctmc
