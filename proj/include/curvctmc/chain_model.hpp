#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace curvctmc {

/// States 0..N. `truncated` marks a finite window standing in for the
/// non-negative integers, whose right boundary is an artifact.
class StateSpace {
 public:
  StateSpace(std::size_t max_state, bool truncated = false);

  std::size_t max_state() const noexcept { return max_state_; }
  std::size_t size() const noexcept { return max_state_ + 1; }
  bool truncated() const noexcept { return truncated_; }

  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  std::size_t max_state_;
  bool truncated_;
};

/// Real function on a state space. Values must be finite.
class StateFunction {
 public:
  StateFunction() = default;
  StateFunction(std::vector<double> values);
  StateFunction(std::initializer_list<double> values);
  StateFunction(std::size_t size, double fill);

  static StateFunction identity(std::size_t size);
  static StateFunction indicator(std::size_t size, std::size_t at);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t x) const { return values_[x]; }
  double& operator[](std::size_t x) { return values_[x]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  double sup_norm() const noexcept;
  double min() const;
  double max() const;

 private:
  std::vector<double> values_;
};

/// Path metric d(x, y) = sum of edge weights between x and y.
class Metric {
 public:
  enum class Kind { UnitPath, WeightedPath };

  static Metric unit(std::size_t size);
  static Metric weighted(std::vector<double> weights);

  Kind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return weights_.size() + 1; }
  /// Weight of the edge (k, k+1).
  double edge(std::size_t k) const { return weights_[k]; }
  std::span<const double> weights() const noexcept { return weights_; }
  double distance(std::size_t x, std::size_t y) const;

 private:
  Metric(Kind kind, std::vector<double> weights);

  Kind kind_;
  std::vector<double> weights_;
  std::vector<double> prefix_;  // prefix_[x] = d(0, x)
};

/// Sparse off-diagonal transition rates Q(x, y), x != y.
class GeneralRates {
 public:
  struct Transition {
    std::size_t to;
    double rate;
  };

  GeneralRates(StateSpace space, std::vector<std::vector<Transition>> rows);

  /// Dense rate matrix; the diagonal is ignored.
  static GeneralRates from_dense(const std::vector<std::vector<double>>& q,
                                 bool truncated = false);
  static GeneralRates zero(std::size_t size);

  const StateSpace& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return space_.size(); }
  std::span<const Transition> row(std::size_t x) const { return rows_[x]; }
  double total_rate(std::size_t x) const { return totals_[x]; }
  double max_total_rate() const noexcept { return max_total_; }
  double rate(std::size_t x, std::size_t y) const;

 private:
  StateSpace space_;
  std::vector<std::vector<Transition>> rows_;
  std::vector<double> totals_;
  double max_total_ = 0.0;
};

/// Birth-death rates on 0..N: births x -> x+1 at lambda_x, deaths
/// x -> x-1 at nu_x. Irreducibility is checked on construction.
///
/// On a truncated space the stored top birth rate is kept (it is the rate
/// of the chain on the integers) but the finite generator reflects at N.
class BirthDeathRates {
 public:
  BirthDeathRates(std::vector<double> lambda, std::vector<double> nu,
                  bool truncated = false);

  /// lambda_x = lambda (n - x), nu_x = nu x on {0..n}.
  static BirthDeathRates ehrenfest(std::size_t n, double lambda, double nu);
  /// Constant rates lambda up, nu down (nu_0 = 0), truncated at N.
  static BirthDeathRates mm1(double lambda, double nu, std::size_t truncation);

  const StateSpace& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return space_.size(); }
  std::size_t max_state() const noexcept { return space_.max_state(); }
  bool truncated() const noexcept { return space_.truncated(); }

  /// Rates as stored.
  std::span<const double> lambda() const noexcept { return lambda_; }
  std::span<const double> nu() const noexcept { return nu_; }
  /// Effective rates of the finite chain.
  double birth(std::size_t x) const;
  double death(std::size_t x) const { return nu_[x]; }

  GeneralRates to_general() const;

 private:
  StateSpace space_;
  std::vector<double> lambda_;
  std::vector<double> nu_;
};

/// Jump bound b and angle-bracket bound V^2; infinity when unbounded.
struct ChainParams {
  double jump_bound;
  double angle_bracket;
};

StateFunction generator_apply(const GeneralRates& rates, const StateFunction& f);

/// Gamma(f, g)(x) = 1/2 sum_y (f(y) - f(x)) (g(y) - g(x)) Q(x, y).
StateFunction carre_du_champ(const GeneralRates& rates, const StateFunction& f,
                             const StateFunction& g);
StateFunction gamma(const GeneralRates& rates, const StateFunction& f);

/// Gamma_2 f = 1/2 (L Gamma f - 2 Gamma(f, L f)). Boundary states only use
/// the transitions they have.
StateFunction gamma2(const GeneralRates& rates, const StateFunction& f);

/// Lipschitz seminorm for a path metric; the supremum over all pairs is
/// attained on adjacent states.
double lipschitz_seminorm(const StateFunction& f, const Metric& d);

double angle_bracket_bound(const GeneralRates& rates, const Metric& d);
double jump_bound(const GeneralRates& rates, const Metric& d);
ChainParams chain_params(const GeneralRates& rates, const Metric& d);

/// Stationary law via detailed balance, computed in log space.
std::vector<double> stationary_distribution(const BirthDeathRates& rates);

}  // namespace curvctmc
