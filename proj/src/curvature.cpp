#include "curvctmc/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvctmc/bounds.hpp"
#include "curvctmc/error.hpp"
#include "curvctmc/random.hpp"

namespace curvctmc {

namespace {

constexpr double kNormalizationTolerance = 1e-10;

// Last state included in a criterion scan.
std::size_t scan_top(const BirthDeathRates& rates, std::size_t natural_top,
                     std::size_t boundary_margin) {
  std::size_t top = natural_top;
  if (rates.truncated()) {
    const std::size_t n = rates.max_state();
    top = std::min(top, n >= boundary_margin ? n - boundary_margin : 0);
  }
  if (top < 1) {
    throw Error(ErrorCode::InvalidArgument, "criterion scan range is empty");
  }
  return top;
}

void check_distribution(std::span<const double> p, const char* what) {
  double total = 0.0;
  for (double v : p) {
    if (v < -kNormalizationTolerance) {
      throw Error(ErrorCode::NotNormalized, std::string(what) + " has a negative mass");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorCode::NotNormalized, std::string(what) + " does not sum to 1");
  }
}

void check_t_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw Error(ErrorCode::InvalidArgument, "time grid is empty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || !std::isfinite(t_grid[i])) {
      throw Error(ErrorCode::InvalidArgument, "time grid values must be positive and finite");
    }
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "time grid must be strictly increasing");
    }
  }
}

}  // namespace

const char* to_string(CurvatureKind kind) noexcept {
  return kind == CurvatureKind::Wasserstein ? "wasserstein" : "gamma";
}

CurvatureCertificate wasserstein_criterion(const BirthDeathRates& rates,
                                           std::size_t boundary_margin) {
  const std::size_t top = scan_top(rates, rates.max_state(), boundary_margin);
  CurvatureCertificate cert{CurvatureKind::Wasserstein, std::numeric_limits<double>::infinity(),
                            true, 1};
  for (std::size_t x = 1; x <= top; ++x) {
    const double v =
        rates.birth(x - 1) - rates.birth(x) + rates.death(x) - rates.death(x - 1);
    if (v < cert.value) {
      cert.value = v;
      cert.argmin = x;
    }
  }
  return cert;
}

CurvatureCertificate gamma_criterion(const BirthDeathRates& rates, std::size_t boundary_margin) {
  const std::size_t n = rates.max_state();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "gamma criterion needs an interior state");
  const std::size_t top = scan_top(rates, n - 1, boundary_margin);
  CurvatureCertificate cert{CurvatureKind::Gamma, std::numeric_limits<double>::infinity(), false,
                            1};
  auto consider = [&](double v, std::size_t x) {
    if (v < cert.value) {
      cert.value = v;
      cert.argmin = x;
    }
  };
  // End states: the Gamma_2 inequality there needs nu_1 - nu_0 and
  // lambda_{N-1} - lambda_N as well.
  consider(rates.death(1) - rates.death(0), 0);
  for (std::size_t x = 1; x <= top; ++x) {
    consider(std::min(rates.birth(x - 1) - rates.birth(x), rates.death(x + 1) - rates.death(x)),
             x);
  }
  if (!rates.truncated()) consider(rates.birth(n - 1) - rates.birth(n), n);
  cert.valid = cert.value >= 0.0;
  return cert;
}

StateFunction gamma2_gap(const GeneralRates& rates, const StateFunction& f, double rho) {
  const StateFunction g2 = gamma2(rates, f);
  const StateFunction gf = gamma(rates, f);
  std::vector<double> root(gf.size());
  for (std::size_t x = 0; x < gf.size(); ++x) root[x] = std::sqrt(std::max(0.0, gf[x]));
  const StateFunction g_root = gamma(rates, StateFunction(std::move(root)));
  std::vector<double> out(gf.size());
  for (std::size_t x = 0; x < gf.size(); ++x) out[x] = g2[x] - g_root[x] - rho * gf[x];
  return StateFunction(std::move(out));
}

double w1_distance(std::span<const double> mu, std::span<const double> nu, const Metric& d) {
  if (mu.size() != nu.size() || mu.size() != d.size()) {
    throw Error(ErrorCode::DimensionMismatch, "w1_distance");
  }
  check_distribution(mu, "mu");
  check_distribution(nu, "nu");
  double cdf_mu = 0.0, cdf_nu = 0.0, total = 0.0;
  for (std::size_t k = 0; k + 1 < mu.size(); ++k) {
    cdf_mu += mu[k];
    cdf_nu += nu[k];
    total += d.edge(k) * std::abs(cdf_mu - cdf_nu);
  }
  return total;
}

double kantorovich_dual_gap(std::span<const double> mu, std::span<const double> nu,
                            const Metric& d, const std::vector<StateFunction>& sample_fns) {
  const double primal = w1_distance(mu, nu, d);
  double best = 0.0;
  for (const auto& f : sample_fns) {
    if (f.size() != mu.size()) throw Error(ErrorCode::DimensionMismatch, "kantorovich_dual_gap");
    const double lip = lipschitz_seminorm(f, d);
    if (!(lip > 0.0)) continue;
    double acc = 0.0;
    for (std::size_t x = 0; x < mu.size(); ++x) acc += f[x] * (mu[x] - nu[x]);
    best = std::max(best, std::abs(acc) / lip);
  }
  return primal - best;
}

double wasserstein_contraction(const TransitionKernel& kernel, const Metric& d, bool all_pairs) {
  const std::size_t n = kernel.size();
  if (d.size() != n) throw Error(ErrorCode::DimensionMismatch, "wasserstein_contraction");
  double best = 0.0;
  for (std::size_t x = 0; x + 1 < n; ++x) {
    const std::size_t last = all_pairs ? n - 1 : x + 1;
    for (std::size_t y = x + 1; y <= last; ++y) {
      const double ratio = w1_distance(kernel.row(x), kernel.row(y), d) / d.distance(x, y);
      best = std::max(best, ratio);
    }
  }
  return best;
}

CurvatureEstimate wasserstein_curvature_estimate(const GeneralRates& rates, const Metric& d,
                                                 const std::vector<double>& t_grid,
                                                 const UniformizationConfig& cfg) {
  check_t_grid(t_grid);
  CurvatureEstimate est{CurvatureKind::Wasserstein, EstimateDirection::Exact, t_grid, {}, {}, 0};
  for (double t : t_grid) {
    const double ratio = wasserstein_contraction(transition_matrix(rates, t, cfg), d);
    const bool degenerate = !(ratio > 0.0);
    est.degenerate.push_back(degenerate);
    est.values.push_back(degenerate ? std::numeric_limits<double>::infinity()
                                    : -std::log(ratio) / t);
  }
  return est;
}

std::vector<StateFunction> default_test_family(std::size_t size, std::size_t random_count,
                                               std::uint64_t seed) {
  std::vector<StateFunction> family;
  family.reserve(1 + size + random_count);
  family.push_back(StateFunction::identity(size));
  for (std::size_t x = 0; x < size; ++x) family.push_back(StateFunction::indicator(size, x));
  RandomStream rng(seed, 0);
  for (std::size_t i = 0; i < random_count; ++i) {
    std::vector<double> v(size);
    for (double& e : v) e = rng.uniform(-1.0, 1.0);
    family.emplace_back(std::move(v));
  }
  return family;
}

GammaRatio gamma_commutation_ratio(const GeneralRates& rates, const TransitionKernel& kernel,
                                   const StateFunction& f) {
  const StateFunction gamma_pf = gamma(rates, kernel.apply(f));
  const StateFunction gf = gamma(rates, f);
  std::vector<double> root(gf.size());
  for (std::size_t x = 0; x < gf.size(); ++x) root[x] = std::sqrt(std::max(0.0, gf[x]));
  const StateFunction p_root = kernel.apply(StateFunction(std::move(root)));
  GammaRatio out;
  for (std::size_t x = 0; x < gf.size(); ++x) {
    if (!(p_root[x] > 0.0)) {
      ++out.skipped;
      continue;
    }
    out.ratio = std::max(out.ratio, std::sqrt(std::max(0.0, gamma_pf[x])) / p_root[x]);
  }
  return out;
}

CurvatureEstimate gamma_curvature_estimate(const GeneralRates& rates,
                                           const std::vector<double>& t_grid,
                                           const std::vector<StateFunction>& test_fns,
                                           const UniformizationConfig& cfg) {
  check_t_grid(t_grid);
  if (test_fns.empty()) throw Error(ErrorCode::InvalidArgument, "no test functions");
  for (const auto& f : test_fns) {
    if (f.size() != rates.size()) throw Error(ErrorCode::DimensionMismatch, "test function");
    if (f.max() == f.min()) {
      throw Error(ErrorCode::InvalidArgument, "test functions must be non-constant");
    }
  }
  CurvatureEstimate est{CurvatureKind::Gamma, EstimateDirection::FromAbove, t_grid, {}, {}, 0};
  for (double t : t_grid) {
    const TransitionKernel kernel = transition_matrix(rates, t, cfg);
    double best = 0.0;
    for (const auto& f : test_fns) {
      const GammaRatio r = gamma_commutation_ratio(rates, kernel, f);
      est.skipped_states += r.skipped;
      best = std::max(best, r.ratio);
    }
    const bool degenerate = !(best > 0.0);
    est.degenerate.push_back(degenerate);
    est.values.push_back(degenerate ? std::numeric_limits<double>::infinity()
                                    : -std::log(best) / t);
  }
  return est;
}

CovarianceCheck covariance_check(const GeneralRates& rates, std::size_t x0,
                                 const StateFunction& g1, const StateFunction& g2, double t,
                                 const CurvatureCertificate& rho,
                                 const UniformizationConfig& cfg) {
  if (rho.kind != CurvatureKind::Gamma || !rho.valid) {
    throw Error(ErrorCode::InvalidCertificate, "covariance check needs a valid Gamma certificate");
  }
  if (g1.size() != rates.size() || g2.size() != rates.size()) {
    throw Error(ErrorCode::DimensionMismatch, "covariance_check");
  }
  const auto row = kernel_row(rates, x0, t, cfg);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t y = 0; y < row.size(); ++y) {
    m1 += row[y] * g1[y];
    m2 += row[y] * g2[y];
  }
  double cov = 0.0, root_mean = 0.0;
  const StateFunction gamma2_fn = gamma(rates, g2);
  for (std::size_t y = 0; y < row.size(); ++y) {
    cov += row[y] * (g1[y] - m1) * (g2[y] - m2);
    root_mean += row[y] * std::sqrt(std::max(0.0, gamma2_fn[y]));
  }
  const double g1_sup = gamma(rates, g1).max();
  const double rhs = 2.0 * l_trho(t, rho.value) * std::sqrt(std::max(0.0, g1_sup)) * root_mean;
  return {cov, rhs};
}

}  // namespace curvctmc
