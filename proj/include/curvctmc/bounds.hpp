#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "curvctmc/chain_model.hpp"

namespace curvctmc {

/// Sentinel time for the stationary (t -> infinity) forms.
inline constexpr double kStationaryTime = std::numeric_limits<double>::infinity();

enum class Variant {
  Standard,  // u log(1 + u) / 2
  Bennett,   // (1 + u) log(1 + u) - u
};

const char* to_string(Variant v) noexcept;

/// sup_{0<=s<=t} exp(-K (t - s)) = max(1, exp(-K t)).
double c_tk(double t, double K);
/// (1 - exp(-2 K t)) / (2 K), equal to t at K = 0 and 1 / (2 K) at t = inf.
double m_tk(double t, double K);
double l_trho(double t, double rho);

double rate_fn(double u, Variant variant);

/// Constants feeding the closed-form bounds. Each bound checks that the
/// fields it needs are present.
struct DeviationBoundSpec {
  double t = 1.0;
  double lip = 1.0;
  std::optional<double> jump;           // b
  std::optional<double> angle_bracket;  // V^2
  std::optional<double> K;
  std::optional<double> rho;
  std::optional<double> gamma_inf;        // sup norm of Gamma f
  std::optional<double> boundary_rates;   // lambda_0 + nu_n
  Variant variant = Variant::Standard;
};

/// Returns exp(log_value), or 0 when the result would be subnormal.
double exp_or_zero(double log_value);
bool underflows(double log_value);

/// Log of exp(-(y / (2 scale)) log(1 + u)) in the standard variant and of
/// exp(-(y / (scale u)) h(u)) with h the Bennett rate in the other.
double poisson_log_bound(double y, double scale, double u, Variant variant);

double log_bound_thm31(double y, const DeviationBoundSpec& spec);
double bound_thm31(double y, const DeviationBoundSpec& spec);
double log_bound_cor36(double y, const DeviationBoundSpec& spec);
double bound_cor36(double y, const DeviationBoundSpec& spec);
double log_bound_cor37(double y, const DeviationBoundSpec& spec);
double bound_cor37(double y, const DeviationBoundSpec& spec);
/// Bounded rates on the integers, K <= 0, V^2 = sup (lambda + nu).
double log_bound_cor46(double y, const DeviationBoundSpec& spec);
double bound_cor46(double y, const DeviationBoundSpec& spec);
/// Monotone rates, uses gamma_inf only.
double log_bound_cor47(double y, const DeviationBoundSpec& spec);
double bound_cor47(double y, const DeviationBoundSpec& spec);
/// Finite space, K > 0. t = kStationaryTime gives the stationary form.
double log_bound_cor49(double y, const DeviationBoundSpec& spec);
double bound_cor49(double y, const DeviationBoundSpec& spec);
/// Finite space, rho > 0, uses lambda_0 + nu_n.
double log_bound_cor410(double y, const DeviationBoundSpec& spec);
double bound_cor410(double y, const DeviationBoundSpec& spec);

/// Gaussian bound for the Ornstein-Uhlenbeck fluid limit.
double bound_cor411(double y, double t, double nu, double lip);

/// Pre-limit Ehrenfest bound at size n with K = 1 and Lipschitz constant
/// lip / sqrt(n); tends to bound_cor411 as n grows.
double log_bound_ehrenfest_prelimit(double y, double n, double t, double nu, double lip);
double bound_ehrenfest_prelimit(double y, double n, double t, double nu, double lip);

/// Multi-time M/M/1 bound for an l1-Lipschitz function of n samples
/// spanning [0, T].
double log_bound_cor412(double y, std::size_t n, double T, double lambda, double nu,
                        double lip_n, Variant variant = Variant::Standard);
double bound_cor412(double y, std::size_t n, double T, double lambda, double nu, double lip_n,
                    Variant variant = Variant::Standard);

/// h(tau, t, z) = t (lambda + nu) (exp(tau z) - tau z - 1).
double mm1_log_mgf_bound(double tau, double t, double lambda, double nu, double z);
/// exp(h(tau, t, lip1)): bound on E[exp(tau (u(X_t) - E u(X_t)))].
double mgf_bound_mm1(double tau, double t, double lambda, double nu, double lip1);

/// psi_{f,t} from the Gamma-curvature bound, with the per-state jump data
/// precomputed so repeated evaluation is cheap.
class PsiFunction {
 public:
  PsiFunction(const GeneralRates& rates, const StateFunction& f, double t, double rho,
              const Metric& d);

  /// Infinity when the exponentials overflow.
  double operator()(double lambda) const;

  double lipschitz() const noexcept { return lip_; }
  double gamma_sup() const noexcept { return gamma_sup_; }
  double l_trho() const noexcept { return l_; }
  /// psi'(0+) = 2 L_{t,rho} sup Gamma f.
  double slope_at_zero() const noexcept { return 2.0 * l_ * gamma_sup_; }

 private:
  struct Jump {
    double sq_diff_rate;  // (f(y) - f(x))^2 Q(x, y)
    double scaled_dist;   // lip * d(x, y)
  };
  std::vector<std::vector<Jump>> jumps_;
  double lip_ = 0.0;
  double gamma_sup_ = 0.0;
  double l_ = 0.0;
};

double psi_ft(double lambda, const GeneralRates& rates, const StateFunction& f, double t,
              double rho, const Metric& d);

struct Thm34Config {
  double quad_rel_tol = 1e-8;
  double lambda_start = 1e-6;
  int max_expansions = 200;
  int bisection_steps = 200;
};

struct Thm34Result {
  double log_value = 0.0;
  double value = 1.0;
  double lambda_star = 0.0;
  double psi_integral = 0.0;
};

Thm34Result optimize_thm34(double y, const PsiFunction& psi, const Thm34Config& cfg = {});
double bound_thm34(double y, const GeneralRates& rates, const StateFunction& f, double t,
                   double rho, const Metric& d, const Thm34Config& cfg = {});

/// Adaptive Simpson quadrature on [a, b] with relative tolerance.
double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                        double rel_tol, int max_depth = 50);

struct BoundCurve {
  std::vector<double> y;
  std::vector<double> values;
  bool underflow = false;
};

/// Evaluates a log-bound on a positive increasing grid.
BoundCurve evaluate_curve(const std::function<double(double)>& log_bound,
                          const std::vector<double>& y_grid);

void validate_y_grid(const std::vector<double>& y_grid);

}  // namespace curvctmc
