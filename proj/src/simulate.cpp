#include "curvctmc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

#include "curvctmc/bounds.hpp"
#include "curvctmc/error.hpp"

namespace curvctmc {

namespace {

constexpr double kTailWarning = 1e-8;

std::size_t next_state(const GeneralRates& rates, std::size_t x, double total, RandomStream& rng) {
  const auto row = rates.row(x);
  double target = rng.uniform() * total;
  for (const auto& tr : row) {
    if (target < tr.rate) return tr.to;
    target -= tr.rate;
  }
  return row.back().to;
}

// Advances (state, clock) to the last jump before `until`.
void advance(const GeneralRates& rates, std::size_t& state, double& clock, double& next_jump,
             double until, RandomStream& rng, Path* record) {
  while (next_jump <= until) {
    clock = next_jump;
    state = next_state(rates, state, rates.total_rate(state), rng);
    if (record) {
      record->times.push_back(clock);
      record->states.push_back(state);
    }
    const double total = rates.total_rate(state);
    next_jump = total > 0.0 ? clock + rng.exponential(total)
                            : std::numeric_limits<double>::infinity();
  }
}

double first_jump(const GeneralRates& rates, std::size_t x0, RandomStream& rng) {
  const double total = rates.total_rate(x0);
  return total > 0.0 ? rng.exponential(total) : std::numeric_limits<double>::infinity();
}

void check_start(const GeneralRates& rates, std::size_t x0) {
  if (x0 >= rates.size()) {
    throw Error(ErrorCode::InvalidArgument, "start state " + std::to_string(x0) + " out of range");
  }
}

unsigned worker_count(unsigned requested, std::uint64_t n_paths) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(w, std::max<std::uint64_t>(1, n_paths)));
}

// Counts, for each threshold, the paths whose statistic is >= threshold.
// Path i draws from RandomStream(seed, first_index + i).
template <class Statistic>
std::vector<std::uint64_t> count_exceedances(const std::vector<double>& thresholds,
                                             std::uint64_t n_paths, std::uint64_t seed,
                                             std::uint64_t first_index, unsigned workers,
                                             const Statistic& statistic) {
  workers = worker_count(workers, n_paths);
  std::vector<std::vector<std::uint64_t>> partial(workers,
                                                  std::vector<std::uint64_t>(thresholds.size(), 0));
  auto work = [&](unsigned w) {
    auto& counts = partial[w];
    for (std::uint64_t i = w; i < n_paths; i += workers) {
      RandomStream rng(seed, first_index + i);
      const double value = statistic(rng);
      for (std::size_t j = 0; j < thresholds.size(); ++j) {
        if (value >= thresholds[j]) ++counts[j];
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  std::vector<std::uint64_t> total(thresholds.size(), 0);
  for (const auto& counts : partial) {
    for (std::size_t j = 0; j < total.size(); ++j) total[j] += counts[j];
  }
  return total;
}

TailEstimate finish_estimate(const std::vector<double>& y_grid,
                             std::vector<std::uint64_t> exceedances, double mean,
                             const MonteCarloConfig& cfg) {
  TailEstimate est;
  est.y = y_grid;
  est.exceedances = std::move(exceedances);
  est.n_paths = cfg.n_paths;
  est.confidence = cfg.confidence;
  est.mean = mean;
  for (auto k : est.exceedances) {
    est.p_hat.push_back(static_cast<double>(k) / static_cast<double>(cfg.n_paths));
    est.upper.push_back(clopper_pearson_upper(k, cfg.n_paths, cfg.confidence));
  }
  return est;
}

double guard_truncation(const GeneralRates& rates, std::size_t x0, double t,
                        const MonteCarloConfig& cfg) {
  if (!rates.space().truncated()) return 0.0;
  const TailMassReport report =
      truncation_tail_mass(rates, x0, t, cfg.boundary_margin, cfg.uniformization);
  if (report.invalid_start) {
    throw Error(ErrorCode::TruncationTail, "start state lies inside the truncation margin");
  }
  if (report.mass > cfg.tail_guard) {
    throw Error(ErrorCode::TruncationTail,
                "truncation tail mass " + std::to_string(report.mass) + " exceeds guard");
  }
  if (report.mass > kTailWarning) {
    std::clog << "warning: truncation tail mass " << report.mass << " at t = " << t << '\n';
  }
  return report.mass;
}

}  // namespace

std::size_t Path::state_at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return initial;
  return states[static_cast<std::size_t>(it - times.begin()) - 1];
}

Path sample_path(const GeneralRates& rates, std::size_t x0, double horizon, RandomStream& rng) {
  check_start(rates, x0);
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidArgument, "horizon must be finite and non-negative");
  }
  Path path;
  path.initial = x0;
  path.horizon = horizon;
  std::size_t state = x0;
  double clock = 0.0;
  double next_jump = first_jump(rates, x0, rng);
  advance(rates, state, clock, next_jump, horizon, rng, &path);
  return path;
}

Path sample_path(const GeneralRates& rates, std::size_t x0, double horizon, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  return sample_path(rates, x0, horizon, rng);
}

std::vector<std::size_t> sample_states_at(const GeneralRates& rates, std::size_t x0,
                                          std::span<const double> times, RandomStream& rng) {
  check_start(rates, x0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i]) || (i > 0 && times[i] < times[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "sample times must be sorted and non-negative");
    }
  }
  std::vector<std::size_t> out;
  out.reserve(times.size());
  std::size_t state = x0;
  double clock = 0.0;
  double next_jump = first_jump(rates, x0, rng);
  for (double t : times) {
    advance(rates, state, clock, next_jump, t, rng, nullptr);
    out.push_back(state);
  }
  return out;
}

std::vector<std::size_t> sample_states_at(const GeneralRates& rates, std::size_t x0,
                                          std::span<const double> times, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  return sample_states_at(rates, x0, times, rng);
}

double clopper_pearson_upper(std::uint64_t k, std::uint64_t n, double confidence) {
  if (n == 0 || k > n) throw Error(ErrorCode::InvalidArgument, "need 0 <= k <= n and n >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence must lie in (0, 1)");
  }
  if (k == n) return 1.0;
  const double nd = static_cast<double>(n);
  if (k == 0) return -std::expm1(std::log1p(-confidence) / nd);
  return boost::math::ibeta_inv(static_cast<double>(k + 1), static_cast<double>(n - k),
                                confidence);
}

const char* to_string(CheckStatus s) noexcept {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Untested: return "untested";
  }
  return "unknown";
}

void MonteCarloConfig::validate() const {
  if (n_paths < 1) throw Error(ErrorCode::InvalidArgument, "n_paths must be at least 1");
  if (!(confidence > 0.5 && confidence < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence must lie in (0.5, 1)");
  }
  uniformization.validate();
}

void compare_with_bound(TailEstimate& estimate, const std::vector<double>& bound, double slack) {
  if (bound.size() != estimate.y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "bound and y grid sizes differ");
  }
  estimate.analytic_bound = bound;
  estimate.status.clear();
  const double untested_below = 10.0 / static_cast<double>(estimate.n_paths);
  for (std::size_t i = 0; i < bound.size(); ++i) {
    if (bound[i] < untested_below) {
      estimate.status.push_back(CheckStatus::Untested);
    } else {
      estimate.status.push_back(estimate.upper[i] <= bound[i] + slack ? CheckStatus::Pass
                                                                      : CheckStatus::Fail);
    }
  }
}

TailEstimate monte_carlo_tail(const GeneralRates& rates, std::size_t x0, const StateFunction& f,
                              double t, const std::vector<double>& y_grid,
                              const MonteCarloConfig& cfg) {
  cfg.validate();
  check_start(rates, x0);
  validate_y_grid(y_grid);
  if (f.size() != rates.size()) throw Error(ErrorCode::DimensionMismatch, "monte_carlo_tail");
  const double tail_mass = guard_truncation(rates, x0, t, cfg);
  const double mean = expectation(rates, x0, f, t, cfg.uniformization);

  std::vector<double> thresholds(y_grid.size());
  for (std::size_t j = 0; j < y_grid.size(); ++j) thresholds[j] = mean + y_grid[j];
  const double horizon[] = {t};
  auto counts = count_exceedances(thresholds, cfg.n_paths, cfg.seed, 0, cfg.workers,
                                  [&](RandomStream& rng) {
                                    return f[sample_states_at(rates, x0, horizon, rng)[0]];
                                  });
  TailEstimate est = finish_estimate(y_grid, std::move(counts), mean, cfg);
  est.truncation_tail_mass = tail_mass;
  return est;
}

MultiLipschitzFn::MultiLipschitzFn(std::size_t arity, double lipschitz, Evaluator fn)
    : arity_(arity), lip_(lipschitz), fn_(std::move(fn)) {
  if (arity_ < 1) throw Error(ErrorCode::InvalidArgument, "arity must be at least 1");
  if (!(lip_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "Lipschitz constant must be positive");
}

MultiLipschitzFn MultiLipschitzFn::coordinate_average(std::size_t arity) {
  const double n = static_cast<double>(arity);
  return MultiLipschitzFn(arity, 1.0 / n, [n](std::span<const std::size_t> x) {
    double s = 0.0;
    for (auto v : x) s += static_cast<double>(v);
    return s / n;
  });
}

bool verify_lipschitz(const MultiLipschitzFn& f, std::size_t max_state, std::size_t samples,
                      std::uint64_t seed) {
  RandomStream rng(seed, 0);
  std::vector<std::size_t> x(f.arity());
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& v : x) {
      v = std::min(max_state - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_state)));
    }
    const double base = f(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      ++x[i];
      const double bumped = f(x);
      --x[i];
      if (std::abs(bumped - base) > f.lipschitz() * (1.0 + 1e-12) + 1e-15) return false;
    }
  }
  return true;
}

double multisample_mean(const GeneralRates& rates, std::size_t x0,
                        const std::vector<double>& times, const MultiLipschitzFn& f,
                        const UniformizationConfig& cfg) {
  if (times.size() != f.arity()) throw Error(ErrorCode::DimensionMismatch, "multisample_mean");
  const std::size_t n = rates.size();
  std::vector<TransitionKernel> steps;
  double previous = 0.0;
  for (double t : times) {
    if (!(t >= previous) || (!steps.empty() && !(t > previous))) {
      throw Error(ErrorCode::InvalidArgument, "sample times must be strictly increasing");
    }
    steps.push_back(transition_matrix(rates, t - previous, cfg));
    previous = t;
  }
  // Innermost-first nested sums: value(x_1..x_k) = sum_{x_{k+1}} P(x_k, x_{k+1}) value(..).
  std::vector<std::size_t> x(times.size());
  constexpr double kSkip = 1e-300;
  std::function<double(std::size_t)> nested = [&](std::size_t k) -> double {
    // x[0..k-1] fixed; sum over x[k].
    const std::size_t from = k == 0 ? x0 : x[k - 1];
    const auto row = steps[k].row(from);
    double acc = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (row[y] < kSkip) continue;
      x[k] = y;
      acc += row[y] * (k + 1 == x.size() ? f(x) : nested(k + 1));
    }
    return acc;
  };
  return nested(0);
}

TailEstimate mm1_multisample_tail(double lambda, double nu, std::size_t truncation,
                                  std::size_t x0, const std::vector<double>& times,
                                  const MultiLipschitzFn& f, const std::vector<double>& y_grid,
                                  const MonteCarloConfig& cfg) {
  cfg.validate();
  validate_y_grid(y_grid);
  if (times.empty() || times.size() != f.arity()) {
    throw Error(ErrorCode::DimensionMismatch, "times and function arity differ");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > (i ? times[i - 1] : 0.0))) {
      throw Error(ErrorCode::InvalidArgument, "sample times must be positive and increasing");
    }
  }
  const GeneralRates rates = BirthDeathRates::mm1(lambda, nu, truncation).to_general();
  check_start(rates, x0);
  double tail_mass = 0.0;
  for (double t : times) tail_mass = std::max(tail_mass, guard_truncation(rates, x0, t, cfg));

  auto statistic = [&](RandomStream& rng) { return f(sample_states_at(rates, x0, times, rng)); };

  double mean = 0.0, stderr_mean = 0.0;
  const bool exact = times.size() <= 3;
  if (exact) {
    mean = multisample_mean(rates, x0, times, f, cfg.uniformization);
  } else {
    // Independent batch: stream indices after the counting paths.
    const std::uint64_t batch = 4 * cfg.n_paths;
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t i = 0; i < batch; ++i) {
      RandomStream rng(cfg.seed, cfg.n_paths + i);
      const double v = statistic(rng);
      sum += v;
      sum_sq += v * v;
    }
    const double b = static_cast<double>(batch);
    mean = sum / b;
    stderr_mean = std::sqrt(std::max(0.0, sum_sq / b - mean * mean) / (b - 1.0));
  }

  std::vector<double> thresholds(y_grid.size());
  for (std::size_t j = 0; j < y_grid.size(); ++j) {
    thresholds[j] = mean + y_grid[j] - 3.0 * stderr_mean;
  }
  auto counts = count_exceedances(thresholds, cfg.n_paths, cfg.seed, 0, cfg.workers, statistic);
  TailEstimate est = finish_estimate(y_grid, std::move(counts), mean, cfg);
  est.exact_mean = exact;
  est.mean_stderr = stderr_mean;
  est.truncation_tail_mass = tail_mass;
  return est;
}

double ou_variance(double lambda, double nu, double t) {
  if (!(lambda > 0.0) || !(nu > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "OU parameters must be positive");
  }
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be non-negative");
  if (std::abs(lambda + nu - 1.0) > 1e-12) {
    std::clog << "warning: OU limit assumes lambda + nu = 1, got " << lambda + nu << '\n';
  }
  const double time_factor = std::isinf(t) ? 1.0 : -std::expm1(-2.0 * t);
  return lambda * nu * time_factor;
}

double ou_exact_tail(double z0, double lambda, double nu, double t, double f_lip, double y) {
  (void)z0;  // the centered tail does not depend on the start
  if (!(f_lip > 0.0)) throw Error(ErrorCode::InvalidArgument, "f_lip must be positive");
  const double sigma = std::sqrt(ou_variance(lambda, nu, t));
  if (sigma == 0.0) return y > 0.0 ? 0.0 : 1.0;
  return 0.5 * std::erfc(y / (f_lip * sigma * std::sqrt(2.0)));
}

double ou_sample(double z0, double lambda, double nu, double t, RandomStream& rng) {
  const double mean = std::isinf(t) ? 0.0 : z0 * std::exp(-t);
  return mean + std::sqrt(ou_variance(lambda, nu, t)) * rng.normal();
}

RescaledTail ehrenfest_rescaled_tail(std::size_t n, double lambda, double nu, double z0,
                                     double t, const std::vector<double>& y_grid,
                                     const MonteCarloConfig& cfg) {
  const double nd = static_cast<double>(n);
  const double root_n = std::sqrt(nd);
  const double target = std::round(lambda * nd + z0 * root_n);
  const auto start = static_cast<std::size_t>(std::clamp(target, 0.0, nd));
  std::vector<double> z(n + 1);
  for (std::size_t x = 0; x <= n; ++x) z[x] = (static_cast<double>(x) - lambda * nd) / root_n;
  const GeneralRates rates = BirthDeathRates::ehrenfest(n, lambda, nu).to_general();
  RescaledTail out;
  out.start_state = start;
  out.z_start = z[start];
  out.tail = monte_carlo_tail(rates, start, StateFunction(std::move(z)), t, y_grid, cfg);
  return out;
}

}  // namespace curvctmc
