#pragma once

// Reference computations used only to cross-check the library. Each one
// takes a different route from the production code: dense matrix
// exponentials, linear solves, flow algorithms and direct sums.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "curvctmc/chain_model.hpp"

namespace curvctmc::oracle {

/// Row-major generator matrix with the diagonal filled in.
std::vector<double> dense_generator(const GeneralRates& rates);

/// exp(tQ) by Pade scaling and squaring, row-major.
std::vector<double> expm_kernel(const GeneralRates& rates, double t);

/// Stationary law from the linear system pi Q = 0, sum pi = 1.
std::vector<double> stationary_by_solve(const GeneralRates& rates);

/// Transport cost min sum c(x, y) pi(x, y) over couplings, by successive
/// shortest paths on the bipartite graph of the two supports.
double w1_min_cost_flow(std::span<const double> mu, std::span<const double> nu,
                        const Metric& d);

/// max over all pairs x != y of |f(x) - f(y)| / d(x, y).
double lipschitz_all_pairs(std::span<const double> f, const Metric& d);

/// Binomial(n, p) probability mass by log-gamma.
std::vector<double> binomial_pmf(std::size_t n, double p);

/// Upper Clopper-Pearson limit by bisection on the binomial CDF.
double clopper_pearson_by_bisection(std::uint64_t k, std::uint64_t n, double confidence);

/// 2 Gamma_2 f - 2 Gamma((Gamma f)^{1/2}) at x from the explicit five-point
/// decomposition of the birth-death case.
double gamma2_decomposition(const BirthDeathRates& rates, std::span<const double> f,
                            std::size_t x);

/// inf over tau > 0 of exp(-tau y + h(tau, T, z)) with h the M/M/1 log-MGF
/// bound, by golden-section search on a log grid.
double chernoff_mm1(double y, double T, double lambda, double nu, double z);

}  // namespace curvctmc::oracle
