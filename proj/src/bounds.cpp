#include "curvctmc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "curvctmc/error.hpp"

namespace curvctmc {

namespace {

const double kLogMinNormal = std::log(std::numeric_limits<double>::min());

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || std::isnan(v)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
  }
}

void check_finite_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidArgument, "t must be positive and finite");
  }
}

double require(const std::optional<double>& v, const char* bound, const char* field) {
  if (!v) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(bound) + " needs parameter '" + field + "'");
  }
  return *v;
}

// (1 + u) log(1 + u) - u without cancellation near zero.
double bennett_rate(double u) {
  if (u < 1e-3) {
    return u * u * (0.5 + u * (-1.0 / 6.0 + u * (1.0 / 12.0 - u / 20.0)));
  }
  return (1.0 + u) * std::log1p(u) - u;
}

// Shared form of the Wasserstein-curvature bound with explicit C and M.
double wasserstein_log_bound(double y, double lip, double b, double C, double M, double v2,
                             Variant variant) {
  check_positive(y, "y");
  check_positive(lip, "lip");
  check_positive(b, "jump bound b");
  check_positive(v2, "angle bracket V^2");
  const double scale = b * C * lip;
  const double u = b * C * y / (M * v2 * lip);
  return poisson_log_bound(y, scale, u, variant);
}

}  // namespace

const char* to_string(Variant v) noexcept {
  return v == Variant::Standard ? "standard" : "bennett";
}

double c_tk(double t, double K) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be non-negative");
  if (std::isinf(t)) {
    if (!(K > 0.0)) throw Error(ErrorCode::InvalidArgument, "t = inf needs positive curvature");
    return 1.0;
  }
  return std::max(1.0, std::exp(-K * t));
}

double m_tk(double t, double K) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be non-negative");
  if (std::isinf(t)) {
    if (!(K > 0.0)) throw Error(ErrorCode::InvalidArgument, "t = inf needs positive curvature");
    return 1.0 / (2.0 * K);
  }
  if (K == 0.0) return t;
  return -std::expm1(-2.0 * K * t) / (2.0 * K);
}

double l_trho(double t, double rho) { return m_tk(t, rho); }

double rate_fn(double u, Variant variant) {
  if (!(u >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rate function needs u >= 0");
  return variant == Variant::Standard ? 0.5 * u * std::log1p(u) : bennett_rate(u);
}

bool underflows(double log_value) { return log_value < kLogMinNormal; }

double exp_or_zero(double log_value) {
  return underflows(log_value) ? 0.0 : std::exp(log_value);
}

double poisson_log_bound(double y, double scale, double u, Variant variant) {
  if (variant == Variant::Standard) return -(y / (2.0 * scale)) * std::log1p(u);
  return -(y / (scale * u)) * bennett_rate(u);
}

double log_bound_thm31(double y, const DeviationBoundSpec& spec) {
  check_finite_time(spec.t);
  const double b = require(spec.jump, "thm31", "b");
  const double v2 = require(spec.angle_bracket, "thm31", "V2");
  const double K = require(spec.K, "thm31", "K");
  return wasserstein_log_bound(y, spec.lip, b, c_tk(spec.t, K), m_tk(spec.t, K), v2,
                               spec.variant);
}

double bound_thm31(double y, const DeviationBoundSpec& spec) {
  return exp_or_zero(log_bound_thm31(y, spec));
}

double log_bound_cor36(double y, const DeviationBoundSpec& spec) {
  check_finite_time(spec.t);
  check_positive(y, "y");
  check_positive(spec.lip, "lip");
  const double b = require(spec.jump, "cor36", "b");
  const double gamma_inf = require(spec.gamma_inf, "cor36", "gamma_inf");
  const double rho = require(spec.rho, "cor36", "rho");
  check_positive(b, "jump bound b");
  check_positive(gamma_inf, "gamma_inf");
  const double L = l_trho(spec.t, rho);
  return poisson_log_bound(y, b * spec.lip, y * b * spec.lip / (2.0 * L * gamma_inf),
                           spec.variant);
}

double bound_cor36(double y, const DeviationBoundSpec& spec) {
  return exp_or_zero(log_bound_cor36(y, spec));
}

double log_bound_cor37(double y, const DeviationBoundSpec& spec) {
  check_finite_time(spec.t);
  check_positive(y, "y");
  check_positive(spec.lip, "lip");
  const double b = require(spec.jump, "cor37", "b");
  const double v2 = require(spec.angle_bracket, "cor37", "V2");
  const double rho = require(spec.rho, "cor37", "rho");
  check_positive(b, "jump bound b");
  check_positive(v2, "angle bracket V^2");
  const double L = l_trho(spec.t, rho);
  return poisson_log_bound(y, b * spec.lip, b * y / (L * v2 * spec.lip), spec.variant);
}

double bound_cor37(double y, const DeviationBoundSpec& spec) {
  return exp_or_zero(log_bound_cor37(y, spec));
}

double log_bound_cor46(double y, const DeviationBoundSpec& spec) {
  check_finite_time(spec.t);
  const double K = require(spec.K, "cor46", "K");
  const double v2 = require(spec.angle_bracket, "cor46", "V2");
  if (K > 0.0) {
    throw Error(ErrorCode::IncompatibleBound, "cor46 needs K <= 0; use cor49 for K > 0");
  }
  // C = exp(-K t) since K <= 0; the K = 0 case is the limit form.
  return wasserstein_log_bound(y, spec.lip, 1.0, std::exp(-K * spec.t), m_tk(spec.t, K), v2,
                               spec.variant);
}

double bound_cor46(double y, const DeviationBoundSpec& spec) {
  return exp_or_zero(log_bound_cor46(y, spec));
}

double log_bound_cor47(double y, const DeviationBoundSpec& spec) {
  check_finite_time(spec.t);
  check_positive(y, "y");
  check_positive(spec.lip, "lip");
  const double gamma_inf = require(spec.gamma_inf, "cor47", "gamma_inf");
  check_positive(gamma_inf, "gamma_inf");
  return poisson_log_bound(y, spec.lip, y * spec.lip / (2.0 * spec.t * gamma_inf),
                           spec.variant);
}

double bound_cor47(double y, const DeviationBoundSpec& spec) {
  return exp_or_zero(log_bound_cor47(y, spec));
}

double log_bound_cor49(double y, const DeviationBoundSpec& spec) {
  const double K = require(spec.K, "cor49", "K");
  const double v2 = require(spec.angle_bracket, "cor49", "V2");
  if (!(K > 0.0)) throw Error(ErrorCode::IncompatibleBound, "cor49 needs K > 0");
  if (!(spec.t > 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be positive");
  return wasserstein_log_bound(y, spec.lip, 1.0, 1.0, m_tk(spec.t, K), v2, spec.variant);
}

double bound_cor49(double y, const DeviationBoundSpec& spec) {
  return exp_or_zero(log_bound_cor49(y, spec));
}

double log_bound_cor410(double y, const DeviationBoundSpec& spec) {
  const double rho = require(spec.rho, "cor410", "rho");
  const double ends = require(spec.boundary_rates, "cor410", "lambda0_plus_nun");
  if (!(rho > 0.0)) throw Error(ErrorCode::IncompatibleBound, "cor410 needs rho > 0");
  if (!(spec.t > 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be positive");
  check_positive(y, "y");
  check_positive(spec.lip, "lip");
  check_positive(ends, "lambda0_plus_nun");
  const double L = l_trho(spec.t, rho);
  return poisson_log_bound(y, spec.lip, y / (L * ends * spec.lip), spec.variant);
}

double bound_cor410(double y, const DeviationBoundSpec& spec) {
  return exp_or_zero(log_bound_cor410(y, spec));
}

double bound_cor411(double y, double t, double nu, double lip) {
  check_positive(y, "y");
  check_positive(t, "t");
  check_positive(nu, "nu");
  check_positive(lip, "lip");
  const double time_factor = std::isinf(t) ? 1.0 : -std::expm1(-2.0 * t);
  return exp_or_zero(-y * y / (time_factor * nu * lip * lip));
}

double log_bound_ehrenfest_prelimit(double y, double n, double t, double nu, double lip) {
  check_positive(y, "y");
  check_positive(n, "n");
  check_positive(t, "t");
  check_positive(nu, "nu");
  check_positive(lip, "lip");
  const double time_factor = std::isinf(t) ? 1.0 : -std::expm1(-2.0 * t);
  const double root_n = std::sqrt(n);
  return -(y * root_n / (2.0 * lip)) * std::log1p(2.0 * y / (time_factor * root_n * nu * lip));
}

double bound_ehrenfest_prelimit(double y, double n, double t, double nu, double lip) {
  return exp_or_zero(log_bound_ehrenfest_prelimit(y, n, t, nu, lip));
}

double log_bound_cor412(double y, std::size_t n, double T, double lambda, double nu,
                        double lip_n, Variant variant) {
  check_positive(y, "y");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "cor412 needs at least one sample");
  check_positive(T, "T");
  check_positive(lambda + nu, "lambda + nu");
  check_positive(lip_n, "lip_n");
  const double nd = static_cast<double>(n);
  return poisson_log_bound(y, nd * lip_n, y / (T * nd * (lambda + nu) * lip_n), variant);
}

double bound_cor412(double y, std::size_t n, double T, double lambda, double nu, double lip_n,
                    Variant variant) {
  return exp_or_zero(log_bound_cor412(y, n, T, lambda, nu, lip_n, variant));
}

double mm1_log_mgf_bound(double tau, double t, double lambda, double nu, double z) {
  const double s = tau * z;
  // exp(s) - s - 1 without cancellation for small s.
  const double excess = s < 1e-4 ? s * s * (0.5 + s / 6.0) : std::expm1(s) - s;
  return t * (lambda + nu) * excess;
}

double mgf_bound_mm1(double tau, double t, double lambda, double nu, double lip1) {
  check_positive(tau, "tau");
  return std::exp(mm1_log_mgf_bound(tau, t, lambda, nu, lip1));
}

PsiFunction::PsiFunction(const GeneralRates& rates, const StateFunction& f, double t,
                         double rho, const Metric& d) {
  if (f.size() != rates.size() || d.size() != rates.size()) {
    throw Error(ErrorCode::DimensionMismatch, "psi_ft");
  }
  check_finite_time(t);
  lip_ = lipschitz_seminorm(f, d);
  if (!(lip_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "psi_ft needs a non-constant f");
  const StateFunction gf = gamma(rates, f);
  gamma_sup_ = gf.max();
  l_ = curvctmc::l_trho(t, rho);
  jumps_.resize(rates.size());
  for (std::size_t x = 0; x < rates.size(); ++x) {
    for (const auto& tr : rates.row(x)) {
      const double diff = f[tr.to] - f[x];
      if (diff == 0.0) continue;
      jumps_[x].push_back({diff * diff * tr.rate, lip_ * d.distance(x, tr.to)});
    }
  }
}

double PsiFunction::operator()(double lambda) const {
  if (lambda <= 0.0) return 0.0;
  constexpr double kMaxExponent = 700.0;
  double best = 0.0;
  for (const auto& row : jumps_) {
    double acc = 0.0;
    for (const auto& j : row) {
      const double z = lambda * j.scaled_dist;
      if (z > kMaxExponent) return std::numeric_limits<double>::infinity();
      const double g = std::expm1(z) / j.scaled_dist;
      acc += j.sq_diff_rate * g * g;
    }
    best = std::max(best, acc);
  }
  const double value = std::sqrt(2.0) * l_ * std::sqrt(gamma_sup_) * std::sqrt(best);
  return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

double psi_ft(double lambda, const GeneralRates& rates, const StateFunction& f, double t,
              double rho, const Metric& d) {
  check_positive(lambda, "lambda");
  return PsiFunction(rates, f, t, rho, d)(lambda);
}

namespace {

double simpson_step(const std::function<double(double)>& fn, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double eps, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = fn(lm), frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_step(fn, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1) +
         simpson_step(fn, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                        double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = fn(a), fb = fn(b), m = 0.5 * (a + b), fm = fn(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double eps = std::max(rel_tol * std::abs(whole), std::numeric_limits<double>::min());
  return simpson_step(fn, a, fa, b, fb, m, fm, whole, eps, max_depth);
}

Thm34Result optimize_thm34(double y, const PsiFunction& psi, const Thm34Config& cfg) {
  check_positive(y, "y");
  double lo = 0.0, hi = cfg.lambda_start;
  int expansions = 0;
  while (!(psi(hi) > y)) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > cfg.max_expansions) {
      throw Error(ErrorCode::BracketFailure, "psi stays below y on the expanded bracket");
    }
  }
  for (int i = 0; i < cfg.bisection_steps && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) > y ? hi : lo) = mid;
  }
  Thm34Result result;
  result.lambda_star = lo;
  result.psi_integral =
      adaptive_simpson([&psi](double s) { return psi(s); }, 0.0, lo, cfg.quad_rel_tol);
  result.log_value = std::min(0.0, result.psi_integral - y * lo);
  result.value = exp_or_zero(result.log_value);
  return result;
}

double bound_thm34(double y, const GeneralRates& rates, const StateFunction& f, double t,
                   double rho, const Metric& d, const Thm34Config& cfg) {
  return optimize_thm34(y, PsiFunction(rates, f, t, rho, d), cfg).value;
}

void validate_y_grid(const std::vector<double>& y_grid) {
  if (y_grid.empty()) throw Error(ErrorCode::InvalidArgument, "y grid is empty");
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    if (!(y_grid[i] > 0.0) || !std::isfinite(y_grid[i])) {
      throw Error(ErrorCode::InvalidArgument, "y grid values must be positive and finite");
    }
    if (i > 0 && !(y_grid[i] > y_grid[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "y grid must be strictly increasing");
    }
  }
}

BoundCurve evaluate_curve(const std::function<double(double)>& log_bound,
                          const std::vector<double>& y_grid) {
  validate_y_grid(y_grid);
  BoundCurve curve;
  curve.y = y_grid;
  curve.values.reserve(y_grid.size());
  for (double y : y_grid) {
    const double lb = log_bound(y);
    curve.underflow = curve.underflow || underflows(lb);
    curve.values.push_back(exp_or_zero(lb));
  }
  return curve;
}

}  // namespace curvctmc
