#include "curvctmc/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>

#include "curvctmc/error.hpp"

namespace curvctmc {

namespace {

constexpr double kClampFloor = -1e-14;

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidArgument, "time must be finite and non-negative");
  }
}

// v <- v M with M = I + Q / Lambda, fixed summation order.
void step_forward(const GeneralRates& rates, double uniform_rate, std::span<const double> v,
                  std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t x = 0; x < v.size(); ++x) {
    const double mass = v[x];
    if (mass == 0.0) continue;
    out[x] += mass * (1.0 - rates.total_rate(x) / uniform_rate);
    for (const auto& tr : rates.row(x)) out[tr.to] += mass * (tr.rate / uniform_rate);
  }
}

// g <- M g.
void step_backward(const GeneralRates& rates, double uniform_rate, std::span<const double> g,
                   std::span<double> out) {
  for (std::size_t x = 0; x < g.size(); ++x) {
    double acc = 0.0;
    for (const auto& tr : rates.row(x)) acc += (g[tr.to] - g[x]) * tr.rate;
    out[x] = g[x] + acc / uniform_rate;
  }
}

std::vector<double> propagate_row(const GeneralRates& rates, std::size_t x0,
                                  const PoissonWeights& pw, double uniform_rate) {
  const std::size_t n = rates.size();
  std::vector<double> current(n, 0.0), next(n), sum(n, 0.0);
  current[x0] = 1.0;
  for (std::size_t k = 0; k < pw.weights.size(); ++k) {
    const double w = pw.weights[k];
    for (std::size_t y = 0; y < n; ++y) sum[y] += w * current[y];
    if (k + 1 < pw.weights.size()) {
      step_forward(rates, uniform_rate, current, next);
      current.swap(next);
    }
  }
  const double kept = 1.0 - pw.tail;
  for (double& v : sum) v /= kept;
  return sum;
}

void clamp_row(std::span<double> row) {
  bool clamped = false;
  for (double& p : row) {
    if (p < kClampFloor) {
      throw Error(ErrorCode::NegativeKernelEntry, "kernel entry below -1e-14");
    }
    if (p < 0.0) {
      p = 0.0;
      clamped = true;
    }
  }
  if (clamped) {
    double total = 0.0;
    for (double p : row) total += p;
    for (double& p : row) p /= total;
  }
}

}  // namespace

void UniformizationConfig::validate() const {
  if (!(tolerance > 0.0 && tolerance < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "uniformization tolerance must lie in (0, 1)");
  }
  if (max_terms < 1) throw Error(ErrorCode::InvalidArgument, "max_terms must be at least 1");
}

PoissonWeights poisson_weights(double mean, const UniformizationConfig& cfg) {
  cfg.validate();
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw Error(ErrorCode::InvalidArgument, "Poisson mean must be finite and non-negative");
  }
  if (mean == 0.0) return {{1.0}, 0.0};

  // Unnormalized weights relative to the mode, extended until they are
  // negligible on both sides, then normalized.
  constexpr double kNegligible = 1e-40;
  const auto mode = static_cast<std::size_t>(std::floor(mean));
  std::vector<double> right{1.0};
  for (std::size_t k = mode;; ++k) {
    const double w = right.back() * mean / static_cast<double>(k + 1);
    if (w < kNegligible) break;
    if (right.size() > cfg.max_terms) {
      throw Error(ErrorCode::SeriesCapExceeded, "uniformization series exceeds max_terms");
    }
    right.push_back(w);
  }
  std::vector<double> left;
  double w = 1.0;
  for (std::size_t k = mode; k > 0; --k) {
    w *= static_cast<double>(k) / mean;
    if (w < kNegligible) {
      // Remaining left mass underflows relative to the mode; keep zeros so
      // the index stays aligned with the power of M.
      left.resize(mode, 0.0);
      break;
    }
    left.push_back(w);
  }
  left.resize(mode, 0.0);

  std::vector<double> weights(mode + right.size());
  for (std::size_t i = 0; i < mode; ++i) weights[mode - 1 - i] = left[i];
  std::copy(right.begin(), right.end(), weights.begin() + static_cast<std::ptrdiff_t>(mode));

  // Sum from the smallest terms inward for accuracy.
  std::vector<double> sorted = weights;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double v : sorted) total += v;
  for (double& v : weights) v /= total;

  double tail = 0.0;
  std::size_t keep = weights.size();
  while (keep > 1 && tail + weights[keep - 1] < cfg.tolerance) {
    tail += weights[keep - 1];
    --keep;
  }
  weights.resize(keep);
  if (weights.size() > cfg.max_terms) {
    throw Error(ErrorCode::SeriesCapExceeded, "uniformization series exceeds max_terms");
  }
  return {std::move(weights), tail};
}

TransitionKernel::TransitionKernel(double time, std::size_t size, std::vector<double> entries,
                                   double truncation_error)
    : time_(time), size_(size), entries_(std::move(entries)), error_(truncation_error) {
  if (entries_.size() != size_ * size_) {
    throw Error(ErrorCode::DimensionMismatch, "kernel entries do not form a square matrix");
  }
}

TransitionKernel TransitionKernel::identity(std::size_t size) {
  std::vector<double> e(size * size, 0.0);
  for (std::size_t x = 0; x < size; ++x) e[x * size + x] = 1.0;
  return TransitionKernel(0.0, size, std::move(e), 0.0);
}

StateFunction TransitionKernel::apply(const StateFunction& f) const {
  if (f.size() != size_) throw Error(ErrorCode::DimensionMismatch, "kernel apply");
  std::vector<double> out(size_);
  for (std::size_t x = 0; x < size_; ++x) {
    double acc = 0.0;
    const auto r = row(x);
    for (std::size_t y = 0; y < size_; ++y) acc += r[y] * f[y];
    out[x] = acc;
  }
  return StateFunction(std::move(out));
}

std::vector<double> TransitionKernel::push_forward(std::span<const double> mu) const {
  if (mu.size() != size_) throw Error(ErrorCode::DimensionMismatch, "kernel push_forward");
  std::vector<double> out(size_, 0.0);
  for (std::size_t x = 0; x < size_; ++x) {
    const auto r = row(x);
    for (std::size_t y = 0; y < size_; ++y) out[y] += mu[x] * r[y];
  }
  return out;
}

TransitionKernel TransitionKernel::then(const TransitionKernel& other) const {
  if (other.size_ != size_) throw Error(ErrorCode::DimensionMismatch, "kernel product");
  std::vector<double> out(size_ * size_, 0.0);
  for (std::size_t x = 0; x < size_; ++x) {
    for (std::size_t k = 0; k < size_; ++k) {
      const double a = (*this)(x, k);
      if (a == 0.0) continue;
      const auto r = other.row(k);
      for (std::size_t y = 0; y < size_; ++y) out[x * size_ + y] += a * r[y];
    }
  }
  return TransitionKernel(time_ + other.time_, size_, std::move(out), error_ + other.error_);
}

void TransitionKernel::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  for (std::size_t x = 0; x < size_; ++x) {
    for (std::size_t y = 0; y < size_; ++y) {
      if (y) out << ',';
      out << (*this)(x, y);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

TransitionKernel transition_matrix(const GeneralRates& rates, double t,
                                   const UniformizationConfig& cfg) {
  cfg.validate();
  check_time(t);
  const std::size_t n = rates.size();
  const double uniform_rate = rates.max_total_rate();
  if (t == 0.0 || uniform_rate == 0.0) {
    std::vector<double> id(n * n, 0.0);
    for (std::size_t x = 0; x < n; ++x) id[x * n + x] = 1.0;
    return TransitionKernel(t, n, std::move(id), 0.0);
  }
  const PoissonWeights pw = poisson_weights(uniform_rate * t, cfg);

  std::vector<double> entries(n * n);
  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  auto fill_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t x = begin; x < end; ++x) {
      auto row = propagate_row(rates, x, pw, uniform_rate);
      clamp_row(row);
      std::copy(row.begin(), row.end(), entries.begin() + static_cast<std::ptrdiff_t>(x * n));
    }
  };
  if (workers <= 1) {
    fill_rows(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      pool.emplace_back(fill_rows, begin, std::min(n, begin + chunk));
    }
  }
  return TransitionKernel(t, n, std::move(entries), pw.tail);
}

StateFunction apply_semigroup(const GeneralRates& rates, const StateFunction& f, double t,
                              const UniformizationConfig& cfg) {
  cfg.validate();
  check_time(t);
  if (f.size() != rates.size()) throw Error(ErrorCode::DimensionMismatch, "apply_semigroup");
  const double uniform_rate = rates.max_total_rate();
  if (t == 0.0 || uniform_rate == 0.0) return f;
  const PoissonWeights pw = poisson_weights(uniform_rate * t, cfg);
  const std::size_t n = rates.size();
  std::vector<double> current = f.vector(), next(n), sum(n, 0.0);
  for (std::size_t k = 0; k < pw.weights.size(); ++k) {
    for (std::size_t x = 0; x < n; ++x) sum[x] += pw.weights[k] * current[x];
    if (k + 1 < pw.weights.size()) {
      step_backward(rates, uniform_rate, current, next);
      current.swap(next);
    }
  }
  // Truncated series loses mass pw.tail; restore stochasticity.
  const double kept = 1.0 - pw.tail;
  for (double& v : sum) v /= kept;
  return StateFunction(std::move(sum));
}

std::vector<double> kernel_row(const GeneralRates& rates, std::size_t x0, double t,
                               const UniformizationConfig& cfg) {
  cfg.validate();
  check_time(t);
  if (x0 >= rates.size()) {
    throw Error(ErrorCode::InvalidArgument, "start state " + std::to_string(x0) + " out of range");
  }
  const double uniform_rate = rates.max_total_rate();
  if (t == 0.0 || uniform_rate == 0.0) {
    std::vector<double> row(rates.size(), 0.0);
    row[x0] = 1.0;
    return row;
  }
  auto row = propagate_row(rates, x0, poisson_weights(uniform_rate * t, cfg), uniform_rate);
  clamp_row(row);
  return row;
}

double expectation(const GeneralRates& rates, std::size_t x0, const StateFunction& f, double t,
                   const UniformizationConfig& cfg) {
  if (f.size() != rates.size()) throw Error(ErrorCode::DimensionMismatch, "expectation");
  const auto row = kernel_row(rates, x0, t, cfg);
  double acc = 0.0;
  for (std::size_t y = 0; y < row.size(); ++y) acc += row[y] * f[y];
  return acc;
}

TailMassReport truncation_tail_mass(const GeneralRates& rates, std::size_t x0, double t,
                                    std::size_t margin, const UniformizationConfig& cfg) {
  const auto row = kernel_row(rates, x0, t, cfg);
  const std::size_t n = row.size();
  margin = std::min(margin, n);
  TailMassReport report;
  for (std::size_t y = n - margin; y < n; ++y) report.mass += row[y];
  report.invalid_start = x0 + margin >= n;
  return report;
}

}  // namespace curvctmc
