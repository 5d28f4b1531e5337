#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "curvctmc/chain_model.hpp"
#include "curvctmc/semigroup.hpp"

namespace curvctmc {

enum class CurvatureKind { Wasserstein, Gamma };

const char* to_string(CurvatureKind kind) noexcept;

/// Rate-based lower bound on a curvature (K or rho, units 1/time).
struct CurvatureCertificate {
  CurvatureKind kind;
  double value;
  /// Whether the certificate may be used: always for Wasserstein, only
  /// for rho >= 0 for Gamma.
  bool valid;
  std::size_t argmin;
};

/// States excluded at the top of a truncated chain.
inline constexpr std::size_t kDefaultBoundaryMargin = 2;

/// K = inf_x lambda_{x-1} - lambda_x + nu_x - nu_{x-1} over x >= 1.
CurvatureCertificate wasserstein_criterion(const BirthDeathRates& rates,
                                           std::size_t boundary_margin = kDefaultBoundaryMargin);

/// rho = inf over interior x of min(lambda_{x-1} - lambda_x, nu_{x+1} - nu_x),
/// together with nu_1 - nu_0 at 0 and lambda_{N-1} - lambda_N at N.
CurvatureCertificate gamma_criterion(const BirthDeathRates& rates,
                                     std::size_t boundary_margin = kDefaultBoundaryMargin);

/// Gamma_2 f - Gamma((Gamma f)^{1/2}) - rho Gamma f, pointwise.
StateFunction gamma2_gap(const GeneralRates& rates, const StateFunction& f, double rho);

/// Transport distance for a path metric via the cumulative-difference
/// formula.
double w1_distance(std::span<const double> mu, std::span<const double> nu, const Metric& d);

/// W_d(mu, nu) minus the best dual value among the sampled functions, each
/// rescaled to Lipschitz constant 1. Constant functions are ignored.
double kantorovich_dual_gap(std::span<const double> mu, std::span<const double> nu,
                            const Metric& d, const std::vector<StateFunction>& sample_fns);

enum class EstimateDirection {
  Exact,      // the finite-space quantity itself
  FromAbove,  // sup over a sub-family, so an upper estimate
};

struct CurvatureEstimate {
  CurvatureKind kind;
  EstimateDirection direction;
  std::vector<double> t_grid;
  std::vector<double> values;
  /// Ratio was 0 at this time: value reported as +infinity.
  std::vector<bool> degenerate;
  /// States skipped because the denominator P_t (Gamma f)^{1/2} vanished.
  std::size_t skipped_states = 0;
};

/// max over adjacent x of W_d(P_t(x,.), P_t(x+1,.)) / d(x, x+1), or over all
/// pairs when requested.
double wasserstein_contraction(const TransitionKernel& kernel, const Metric& d,
                               bool all_pairs = false);

CurvatureEstimate wasserstein_curvature_estimate(const GeneralRates& rates, const Metric& d,
                                                 const std::vector<double>& t_grid,
                                                 const UniformizationConfig& cfg = {});

/// Identity, every single-site indicator and `random_count` functions with
/// values uniform in [-1, 1].
std::vector<StateFunction> default_test_family(std::size_t size, std::size_t random_count = 50,
                                               std::uint64_t seed = 2007);

/// sup_x (Gamma P_t f)^{1/2}(x) / P_t (Gamma f)^{1/2}(x) for one f, skipping
/// states with a vanishing denominator.
struct GammaRatio {
  double ratio = 0.0;
  std::size_t skipped = 0;
};

GammaRatio gamma_commutation_ratio(const GeneralRates& rates, const TransitionKernel& kernel,
                                   const StateFunction& f);

CurvatureEstimate gamma_curvature_estimate(const GeneralRates& rates,
                                           const std::vector<double>& t_grid,
                                           const std::vector<StateFunction>& test_fns,
                                           const UniformizationConfig& cfg = {});

struct CovarianceCheck {
  double lhs;
  double rhs;
};

/// Exact Cov_x0[g1(X_t), g2(X_t)] and 2 L_{t,rho} |Gamma g1|^{1/2} E_x0[(Gamma g2)^{1/2}(X_t)].
CovarianceCheck covariance_check(const GeneralRates& rates, std::size_t x0,
                                 const StateFunction& g1, const StateFunction& g2, double t,
                                 const CurvatureCertificate& rho,
                                 const UniformizationConfig& cfg = {});

}  // namespace curvctmc
