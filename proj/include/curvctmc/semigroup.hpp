#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "curvctmc/chain_model.hpp"

namespace curvctmc {

struct UniformizationConfig {
  double tolerance = 1e-12;
  std::size_t max_terms = 1'000'000;
  /// Worker threads for full-kernel construction; 0 picks the hardware count.
  unsigned workers = 0;

  void validate() const;
};

/// Normalized Poisson(mean) weights p_0..p_R with the right tail beyond R
/// below the requested tolerance.
struct PoissonWeights {
  std::vector<double> weights;
  double tail = 0.0;
};

PoissonWeights poisson_weights(double mean, const UniformizationConfig& cfg);

/// Dense row-stochastic matrix P_t.
class TransitionKernel {
 public:
  TransitionKernel(double time, std::size_t size, std::vector<double> entries,
                   double truncation_error);

  static TransitionKernel identity(std::size_t size);

  double time() const noexcept { return time_; }
  std::size_t size() const noexcept { return size_; }
  /// Achieved uniformization truncation error.
  double truncation_error() const noexcept { return error_; }

  double operator()(std::size_t x, std::size_t y) const { return entries_[x * size_ + y]; }
  std::span<const double> row(std::size_t x) const {
    return {entries_.data() + x * size_, size_};
  }

  StateFunction apply(const StateFunction& f) const;
  /// Distribution mu P_t.
  std::vector<double> push_forward(std::span<const double> mu) const;
  /// Matrix product (this) * (other).
  TransitionKernel then(const TransitionKernel& other) const;

  void write_csv(std::ostream& out) const;

 private:
  double time_;
  std::size_t size_;
  std::vector<double> entries_;
  double error_;
};

TransitionKernel transition_matrix(const GeneralRates& rates, double t,
                                   const UniformizationConfig& cfg = {});

StateFunction apply_semigroup(const GeneralRates& rates, const StateFunction& f, double t,
                              const UniformizationConfig& cfg = {});

/// Row P_t(x0, .) by forward propagation of the point mass.
std::vector<double> kernel_row(const GeneralRates& rates, std::size_t x0, double t,
                               const UniformizationConfig& cfg = {});

double expectation(const GeneralRates& rates, std::size_t x0, const StateFunction& f, double t,
                   const UniformizationConfig& cfg = {});

struct TailMassReport {
  /// Mass of P_t(x0, .) on the top `margin` states.
  double mass = 0.0;
  /// x0 itself lies within the top margin.
  bool invalid_start = false;
};

TailMassReport truncation_tail_mass(const GeneralRates& rates, std::size_t x0, double t,
                                    std::size_t margin, const UniformizationConfig& cfg = {});

}  // namespace curvctmc
