#include "curvctmc/chain_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "curvctmc/error.hpp"

namespace curvctmc {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Reducible: return "reducible chain";
    case ErrorCode::NotNormalized: return "not normalized";
    case ErrorCode::SeriesCapExceeded: return "series cap exceeded";
    case ErrorCode::NegativeKernelEntry: return "negative kernel entry";
    case ErrorCode::TruncationTail: return "truncation tail mass too large";
    case ErrorCode::InvalidCertificate: return "invalid curvature certificate";
    case ErrorCode::IncompatibleBound: return "incompatible bound parameters";
    case ErrorCode::BracketFailure: return "bracket failure";
    case ErrorCode::Config: return "configuration error";
  }
  return "unknown";
}

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": sizes " + std::to_string(a) + " and " +
                    std::to_string(b));
  }
}

}  // namespace

StateSpace::StateSpace(std::size_t max_state, bool truncated)
    : max_state_(max_state), truncated_(truncated) {
  if (max_state_ < 1) {
    throw Error(ErrorCode::InvalidArgument, "state space needs at least two states");
  }
}

StateFunction::StateFunction(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "state function values must be finite");
    }
  }
}

StateFunction::StateFunction(std::initializer_list<double> values)
    : StateFunction(std::vector<double>(values)) {}

StateFunction::StateFunction(std::size_t size, double fill)
    : StateFunction(std::vector<double>(size, fill)) {}

StateFunction StateFunction::identity(std::size_t size) {
  std::vector<double> v(size);
  std::iota(v.begin(), v.end(), 0.0);
  return StateFunction(std::move(v));
}

StateFunction StateFunction::indicator(std::size_t size, std::size_t at) {
  std::vector<double> v(size, 0.0);
  v.at(at) = 1.0;
  return StateFunction(std::move(v));
}

double StateFunction::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double StateFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double StateFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

Metric::Metric(Kind kind, std::vector<double> weights)
    : kind_(kind), weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "metric needs at least two states");
  }
  prefix_.assign(weights_.size() + 1, 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (!(weights_[k] > 0.0) || !std::isfinite(weights_[k])) {
      throw Error(ErrorCode::InvalidArgument, "metric edge weights must be positive and finite");
    }
    prefix_[k + 1] = prefix_[k] + weights_[k];
  }
}

Metric Metric::unit(std::size_t size) {
  if (size < 2) throw Error(ErrorCode::InvalidArgument, "metric needs at least two states");
  return Metric(Kind::UnitPath, std::vector<double>(size - 1, 1.0));
}

Metric Metric::weighted(std::vector<double> weights) {
  return Metric(Kind::WeightedPath, std::move(weights));
}

double Metric::distance(std::size_t x, std::size_t y) const {
  if (x == y) return 0.0;
  if (kind_ == Kind::UnitPath) {
    return x > y ? static_cast<double>(x - y) : static_cast<double>(y - x);
  }
  return std::abs(prefix_.at(x) - prefix_.at(y));
}

GeneralRates::GeneralRates(StateSpace space, std::vector<std::vector<Transition>> rows)
    : space_(space), rows_(std::move(rows)) {
  require_same_size(rows_.size(), space_.size(), "rate rows");
  totals_.assign(rows_.size(), 0.0);
  for (std::size_t x = 0; x < rows_.size(); ++x) {
    auto& row = rows_[x];
    std::sort(row.begin(), row.end(),
              [](const Transition& a, const Transition& b) { return a.to < b.to; });
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& tr = row[i];
      if (tr.to >= space_.size() || tr.to == x) {
        throw Error(ErrorCode::InvalidArgument, "transition target out of range or diagonal");
      }
      if (i > 0 && row[i - 1].to == tr.to) {
        throw Error(ErrorCode::InvalidArgument, "duplicate transition");
      }
      if (!(tr.rate >= 0.0) || !std::isfinite(tr.rate)) {
        throw Error(ErrorCode::InvalidArgument, "rates must be non-negative and finite");
      }
      totals_[x] += tr.rate;
    }
    std::erase_if(row, [](const Transition& t) { return t.rate == 0.0; });
    max_total_ = std::max(max_total_, totals_[x]);
  }
}

GeneralRates GeneralRates::from_dense(const std::vector<std::vector<double>>& q,
                                      bool truncated) {
  std::vector<std::vector<Transition>> rows(q.size());
  for (std::size_t x = 0; x < q.size(); ++x) {
    require_same_size(q[x].size(), q.size(), "dense rate matrix");
    for (std::size_t y = 0; y < q.size(); ++y) {
      if (y != x && q[x][y] != 0.0) rows[x].push_back({y, q[x][y]});
    }
  }
  if (q.size() < 2) throw Error(ErrorCode::InvalidArgument, "rate matrix needs two states");
  return GeneralRates(StateSpace(q.size() - 1, truncated), std::move(rows));
}

GeneralRates GeneralRates::zero(std::size_t size) {
  if (size < 2) throw Error(ErrorCode::InvalidArgument, "rate matrix needs two states");
  return GeneralRates(StateSpace(size - 1), std::vector<std::vector<Transition>>(size));
}

double GeneralRates::rate(std::size_t x, std::size_t y) const {
  for (const auto& tr : rows_.at(x)) {
    if (tr.to == y) return tr.rate;
  }
  return 0.0;
}

BirthDeathRates::BirthDeathRates(std::vector<double> lambda, std::vector<double> nu,
                                 bool truncated)
    : space_(lambda.size() >= 2 ? lambda.size() - 1 : 1, truncated),
      lambda_(std::move(lambda)),
      nu_(std::move(nu)) {
  if (lambda_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "birth-death chain needs at least two states");
  }
  require_same_size(lambda_.size(), nu_.size(), "birth and death rate vectors");
  const std::size_t n = max_state();
  for (std::size_t x = 0; x <= n; ++x) {
    if (!(lambda_[x] >= 0.0) || !(nu_[x] >= 0.0) || !std::isfinite(lambda_[x]) ||
        !std::isfinite(nu_[x])) {
      throw Error(ErrorCode::InvalidArgument, "rates must be non-negative and finite");
    }
  }
  if (nu_[0] != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "state 0 must be reflecting (nu_0 = 0)");
  }
  if (!truncated && lambda_[n] != 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "top state of a finite chain must be reflecting (lambda_N = 0)");
  }
  for (std::size_t x = 0; x <= n; ++x) {
    if ((x < n && lambda_[x] <= 0.0) || (x >= 1 && nu_[x] <= 0.0)) {
      throw Error(ErrorCode::Reducible,
                  "reducible chain: zero rate at state " + std::to_string(x));
    }
  }
}

BirthDeathRates BirthDeathRates::ehrenfest(std::size_t n, double lambda, double nu) {
  std::vector<double> up(n + 1), down(n + 1);
  for (std::size_t x = 0; x <= n; ++x) {
    up[x] = lambda * static_cast<double>(n - x);
    down[x] = nu * static_cast<double>(x);
  }
  return BirthDeathRates(std::move(up), std::move(down), false);
}

BirthDeathRates BirthDeathRates::mm1(double lambda, double nu, std::size_t truncation) {
  std::vector<double> up(truncation + 1, lambda), down(truncation + 1, nu);
  down[0] = 0.0;
  return BirthDeathRates(std::move(up), std::move(down), true);
}

double BirthDeathRates::birth(std::size_t x) const {
  return x == max_state() ? 0.0 : lambda_[x];
}

GeneralRates BirthDeathRates::to_general() const {
  std::vector<std::vector<GeneralRates::Transition>> rows(size());
  for (std::size_t x = 0; x < size(); ++x) {
    if (x >= 1 && nu_[x] > 0.0) rows[x].push_back({x - 1, nu_[x]});
    if (birth(x) > 0.0) rows[x].push_back({x + 1, birth(x)});
  }
  return GeneralRates(space_, std::move(rows));
}

StateFunction generator_apply(const GeneralRates& rates, const StateFunction& f) {
  require_same_size(rates.size(), f.size(), "generator_apply");
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t x = 0; x < f.size(); ++x) {
    double acc = 0.0;
    for (const auto& tr : rates.row(x)) acc += (f[tr.to] - f[x]) * tr.rate;
    out[x] = acc;
  }
  return StateFunction(std::move(out));
}

StateFunction carre_du_champ(const GeneralRates& rates, const StateFunction& f,
                             const StateFunction& g) {
  require_same_size(rates.size(), f.size(), "carre_du_champ");
  require_same_size(f.size(), g.size(), "carre_du_champ");
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t x = 0; x < f.size(); ++x) {
    double acc = 0.0;
    for (const auto& tr : rates.row(x)) acc += (f[tr.to] - f[x]) * (g[tr.to] - g[x]) * tr.rate;
    out[x] = 0.5 * acc;
  }
  return StateFunction(std::move(out));
}

StateFunction gamma(const GeneralRates& rates, const StateFunction& f) {
  return carre_du_champ(rates, f, f);
}

StateFunction gamma2(const GeneralRates& rates, const StateFunction& f) {
  const StateFunction lf = generator_apply(rates, f);
  const StateFunction l_gamma = generator_apply(rates, gamma(rates, f));
  const StateFunction cross = carre_du_champ(rates, f, lf);
  std::vector<double> out(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) out[x] = 0.5 * (l_gamma[x] - 2.0 * cross[x]);
  return StateFunction(std::move(out));
}

double lipschitz_seminorm(const StateFunction& f, const Metric& d) {
  require_same_size(f.size(), d.size(), "lipschitz_seminorm");
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < f.size(); ++k) {
    best = std::max(best, std::abs(f[k + 1] - f[k]) / d.edge(k));
  }
  return best;
}

double angle_bracket_bound(const GeneralRates& rates, const Metric& d) {
  require_same_size(rates.size(), d.size(), "angle_bracket_bound");
  double best = 0.0;
  for (std::size_t x = 0; x < rates.size(); ++x) {
    double acc = 0.0;
    for (const auto& tr : rates.row(x)) {
      const double dist = d.distance(x, tr.to);
      acc += dist * dist * tr.rate;
    }
    best = std::max(best, acc);
  }
  return best;
}

double jump_bound(const GeneralRates& rates, const Metric& d) {
  require_same_size(rates.size(), d.size(), "jump_bound");
  double best = 0.0;
  for (std::size_t x = 0; x < rates.size(); ++x) {
    for (const auto& tr : rates.row(x)) best = std::max(best, d.distance(x, tr.to));
  }
  return best;
}

ChainParams chain_params(const GeneralRates& rates, const Metric& d) {
  return {jump_bound(rates, d), angle_bracket_bound(rates, d)};
}

std::vector<double> stationary_distribution(const BirthDeathRates& rates) {
  const std::size_t n = rates.max_state();
  std::vector<double> log_weight(n + 1, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const double up = rates.birth(x);
    const double down = rates.death(x + 1);
    if (!(up > 0.0) || !(down > 0.0)) {
      throw Error(ErrorCode::Reducible, "stationary distribution needs an irreducible chain");
    }
    log_weight[x + 1] = log_weight[x] + std::log(up) - std::log(down);
  }
  const double top = *std::max_element(log_weight.begin(), log_weight.end());
  std::vector<double> pi(n + 1);
  double total = 0.0;
  for (std::size_t x = 0; x <= n; ++x) {
    pi[x] = std::exp(log_weight[x] - top);
    total += pi[x];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::InvalidArgument, "zero normalizer for stationary distribution");
  }
  for (double& p : pi) p /= total;
  return pi;
}

}  // namespace curvctmc
