#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "curvctmc/chain_model.hpp"
#include "curvctmc/random.hpp"
#include "curvctmc/semigroup.hpp"

namespace curvctmc {

/// Piecewise-constant trajectory up to a horizon.
struct Path {
  std::size_t initial = 0;
  double horizon = 0.0;
  std::vector<double> times;        // jump times, strictly increasing
  std::vector<std::size_t> states;  // state entered at each jump

  std::size_t state_at(double t) const;
};

Path sample_path(const GeneralRates& rates, std::size_t x0, double horizon, RandomStream& rng);
Path sample_path(const GeneralRates& rates, std::size_t x0, double horizon, std::uint64_t seed);

/// States of a single trajectory at the given non-decreasing times.
std::vector<std::size_t> sample_states_at(const GeneralRates& rates, std::size_t x0,
                                          std::span<const double> times, RandomStream& rng);
std::vector<std::size_t> sample_states_at(const GeneralRates& rates, std::size_t x0,
                                          std::span<const double> times, std::uint64_t seed);

/// One-sided exact binomial upper bound at level `confidence`.
double clopper_pearson_upper(std::uint64_t k, std::uint64_t n, double confidence);

enum class CheckStatus { Pass, Fail, Untested };

const char* to_string(CheckStatus s) noexcept;

struct MonteCarloConfig {
  std::uint64_t n_paths = 100'000;
  double confidence = 0.99;
  std::uint64_t seed = 1;
  /// 0 picks the hardware count. Results do not depend on this value.
  unsigned workers = 0;
  /// Refuse truncated chains whose kernel puts more mass than this on the
  /// top `boundary_margin` states.
  double tail_guard = 1e-6;
  std::size_t boundary_margin = 2;
  UniformizationConfig uniformization{};

  void validate() const;
};

/// Empirical upper tail of f(X_t) - E f(X_t) on a y grid.
struct TailEstimate {
  std::vector<double> y;
  std::vector<std::uint64_t> exceedances;
  std::uint64_t n_paths = 0;
  double confidence = 0.0;
  double mean = 0.0;
  /// Standard error of `mean` when it is itself a Monte Carlo estimate.
  double mean_stderr = 0.0;
  bool exact_mean = true;
  double truncation_tail_mass = 0.0;
  std::vector<double> p_hat;
  std::vector<double> upper;
  // Filled by compare_with_bound.
  std::vector<double> analytic_bound;
  std::vector<CheckStatus> status;
};

/// Marks each y as Pass/Fail by comparing the upper confidence bound with
/// `bound + slack`; ys where the bound is below 10 / n_paths are Untested.
void compare_with_bound(TailEstimate& estimate, const std::vector<double>& bound,
                        double slack = 0.0);

/// Tail of f(X_t) - E_x0 f(X_t), centered at the exact semigroup mean.
TailEstimate monte_carlo_tail(const GeneralRates& rates, std::size_t x0, const StateFunction& f,
                              double t, const std::vector<double>& y_grid,
                              const MonteCarloConfig& cfg);

/// Function of n states with a declared l1-Lipschitz constant.
class MultiLipschitzFn {
 public:
  using Evaluator = std::function<double(std::span<const std::size_t>)>;

  MultiLipschitzFn(std::size_t arity, double lipschitz, Evaluator fn);

  /// (x_1 + ... + x_n) / n, constant 1/n.
  static MultiLipschitzFn coordinate_average(std::size_t arity);

  std::size_t arity() const noexcept { return arity_; }
  double lipschitz() const noexcept { return lip_; }
  double operator()(std::span<const std::size_t> x) const { return fn_(x); }

 private:
  std::size_t arity_;
  double lip_;
  Evaluator fn_;
};

/// Checks the declared constant on random coordinate-unit perturbations
/// within [0, max_state].
bool verify_lipschitz(const MultiLipschitzFn& f, std::size_t max_state, std::size_t samples,
                      std::uint64_t seed);

/// E_x0 f(X_{t_1}, ..., X_{t_n}) by nested kernel sums.
double multisample_mean(const GeneralRates& rates, std::size_t x0,
                        const std::vector<double>& times, const MultiLipschitzFn& f,
                        const UniformizationConfig& cfg = {});

/// Tail of f(X_{t_1}, ..., X_{t_n}) - E f for the truncated M/M/1 queue.
/// The mean is exact for n <= 3; otherwise it is estimated from an
/// independent batch and the y grid is shifted down by three standard
/// errors before counting.
TailEstimate mm1_multisample_tail(double lambda, double nu, std::size_t truncation,
                                  std::size_t x0, const std::vector<double>& times,
                                  const MultiLipschitzFn& f, const std::vector<double>& y_grid,
                                  const MonteCarloConfig& cfg);

/// Variance lambda nu (1 - exp(-2t)) of the Ornstein-Uhlenbeck limit.
double ou_variance(double lambda, double nu, double t);
/// P(f_lip (U_t - E U_t) >= y) for the Gaussian limit.
double ou_exact_tail(double z0, double lambda, double nu, double t, double f_lip, double y);
double ou_sample(double z0, double lambda, double nu, double t, RandomStream& rng);

struct RescaledTail {
  TailEstimate tail;
  std::size_t start_state = 0;
  /// (x_n - lambda n) / sqrt(n)
  double z_start = 0.0;
};

/// Tail of Z_t = (X_t - lambda n) / sqrt(n) for the Ehrenfest chain started
/// at round(lambda n + z0 sqrt(n)).
RescaledTail ehrenfest_rescaled_tail(std::size_t n, double lambda, double nu, double z0,
                                     double t, const std::vector<double>& y_grid,
                                     const MonteCarloConfig& cfg);

}  // namespace curvctmc
