#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace curvctmc::oracle {

namespace {

Eigen::MatrixXd generator_matrix(const GeneralRates& rates) {
  const auto n = static_cast<Eigen::Index>(rates.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (const auto& tr : rates.row(static_cast<std::size_t>(x))) {
      q(x, static_cast<Eigen::Index>(tr.to)) += tr.rate;
      q(x, x) -= tr.rate;
    }
  }
  return q;
}

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    }
  }
  return out;
}

double binomial_cdf(std::uint64_t k, std::uint64_t n, double p) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return k >= n ? 1.0 : 0.0;
  double s = 0.0;
  const double nd = static_cast<double>(n);
  for (std::uint64_t i = 0; i <= k; ++i) {
    const double id = static_cast<double>(i);
    s += std::exp(std::lgamma(nd + 1) - std::lgamma(id + 1) - std::lgamma(nd - id + 1) +
                  id * std::log(p) + (nd - id) * std::log1p(-p));
  }
  return std::min(1.0, s);
}

}  // namespace

std::vector<double> dense_generator(const GeneralRates& rates) {
  return row_major(generator_matrix(rates));
}

std::vector<double> expm_kernel(const GeneralRates& rates, double t) {
  const Eigen::MatrixXd qt = generator_matrix(rates) * t;
  return row_major(qt.exp());
}

std::vector<double> stationary_by_solve(const GeneralRates& rates) {
  const Eigen::MatrixXd q = generator_matrix(rates);
  const auto n = q.rows();
  // Replace one balance equation by the normalization.
  Eigen::MatrixXd a = q.transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  return {pi.data(), pi.data() + n};
}

double w1_min_cost_flow(std::span<const double> mu, std::span<const double> nu,
                        const Metric& d) {
  struct Edge {
    std::size_t to;
    double cap;
    double cost;
  };
  std::vector<std::size_t> sources, sinks;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (mu[x] > 0.0) sources.push_back(x);
  }
  for (std::size_t y = 0; y < nu.size(); ++y) {
    if (nu[y] > 0.0) sinks.push_back(y);
  }
  const std::size_t s = 0, t = 1 + sources.size() + sinks.size();
  const std::size_t nodes = t + 1;
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> adj(nodes);
  auto add = [&](std::size_t a, std::size_t b, double cap, double cost) {
    adj[a].push_back(edges.size());
    edges.push_back({b, cap, cost});
    adj[b].push_back(edges.size());
    edges.push_back({a, 0.0, -cost});
  };
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sources.size(); ++i) add(s, 1 + i, mu[sources[i]], 0.0);
  for (std::size_t j = 0; j < sinks.size(); ++j) {
    add(1 + sources.size() + j, t, nu[sinks[j]], 0.0);
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = 0; j < sinks.size(); ++j) {
      add(1 + i, 1 + sources.size() + j, inf, d.distance(sources[i], sinks[j]));
    }
  }
  double cost = 0.0;
  constexpr double kEps = 1e-15;
  for (;;) {
    std::vector<double> dist(nodes, inf);
    std::vector<std::size_t> via(nodes, edges.size());
    dist[s] = 0.0;
    for (std::size_t round = 0; round < nodes; ++round) {
      bool changed = false;
      for (std::size_t a = 0; a < nodes; ++a) {
        if (dist[a] == inf) continue;
        for (auto e : adj[a]) {
          if (edges[e].cap > kEps && dist[a] + edges[e].cost < dist[edges[e].to] - 1e-15) {
            dist[edges[e].to] = dist[a] + edges[e].cost;
            via[edges[e].to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[t] == inf) break;
    double push = inf;
    for (std::size_t v = t; v != s; v = edges[via[v] ^ 1].to) push = std::min(push, edges[via[v]].cap);
    for (std::size_t v = t; v != s; v = edges[via[v] ^ 1].to) {
      edges[via[v]].cap -= push;
      edges[via[v] ^ 1].cap += push;
    }
    cost += push * dist[t];
  }
  return cost;
}

double lipschitz_all_pairs(std::span<const double> f, const Metric& d) {
  double best = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    for (std::size_t y = x + 1; y < f.size(); ++y) {
      best = std::max(best, std::abs(f[x] - f[y]) / d.distance(x, y));
    }
  }
  return best;
}

std::vector<double> binomial_pmf(std::size_t n, double p) {
  std::vector<double> out(n + 1);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    out[k] = std::exp(std::lgamma(nd + 1) - std::lgamma(kd + 1) - std::lgamma(nd - kd + 1) +
                      kd * std::log(p) + (nd - kd) * std::log1p(-p));
  }
  return out;
}

double clopper_pearson_by_bisection(std::uint64_t k, std::uint64_t n, double confidence) {
  if (k >= n) return 1.0;
  double lo = static_cast<double>(k) / static_cast<double>(n), hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (binomial_cdf(k, n, mid) > 1.0 - confidence) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double gamma2_decomposition(const BirthDeathRates& rates, std::span<const double> f,
                            std::size_t x) {
  const auto n = static_cast<long>(rates.max_state());
  auto fv = [&](long z) { return z < 0 || z > n ? 0.0 : f[static_cast<std::size_t>(z)]; };
  auto lam = [&](long z) { return z < 0 || z > n ? 0.0 : rates.birth(static_cast<std::size_t>(z)); };
  auto nu = [&](long z) { return z < 0 || z > n ? 0.0 : rates.death(static_cast<std::size_t>(z)); };
  const long z = static_cast<long>(x);
  const double a = fv(z) - fv(z + 1);
  const double b = fv(z) - fv(z - 1);
  const double c = fv(z + 2) - fv(z + 1);
  const double dd = fv(z - 2) - fv(z - 1);
  const double here = std::sqrt(lam(z) * a * a + nu(z) * b * b);
  const double i_term = lam(z) * lam(z + 1) * a * c + lam(z) * nu(z) * a * b +
                        lam(z) * std::sqrt(lam(z + 1) * c * c + nu(z + 1) * a * a) * here;
  const double j_term = nu(z) * nu(z - 1) * b * dd + lam(z) * nu(z) * a * b +
                        nu(z) * std::sqrt(lam(z - 1) * b * b + nu(z - 1) * dd * dd) * here;
  return lam(z) * (nu(z + 1) - nu(z)) * a * a + nu(z) * (lam(z - 1) - lam(z)) * b * b + i_term +
         j_term;
}

double chernoff_mm1(double y, double T, double lambda, double nu, double z) {
  auto objective = [&](double tau) {
    return -tau * y + T * (lambda + nu) * (std::exp(tau * z) - tau * z - 1.0);
  };
  double hi = 1e-3;
  while (objective(2.0 * hi) < objective(hi) && hi < 1e6) hi *= 2.0;
  double lo = 0.0;
  hi *= 2.0;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 300; ++i) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if (objective(m1) < objective(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return std::exp(objective(0.5 * (lo + hi)));
}

}  // namespace curvctmc::oracle
