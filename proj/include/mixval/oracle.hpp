#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mixval/model.hpp"

namespace mixval {

/// Exact small-sample marginal likelihood of the mixture, obtained by expanding
/// the product over observations into all 2^n allocations of observations to
/// the pure-code or discrepancy component.
///
/// For an allocation A the discrepancy integrates out to
///   y ~ N(G theta, lambda^2 V_A),  V_A = I + Corr_gamma[A, A] / k  on A x A, I elsewhere,
/// after which theta (flat) and lambda (1/lambda) integrate in closed form as long
/// as n > p. The alpha integral contributes B(n - l + a0, l + a0) / B(a0, a0) with
/// l = |A|, and (k, gamma) are integrated numerically against their Beta priors.
/// Only a zero discrepancy mean is supported.

constexpr int kOracleMaxN = 12;

struct AllocationSubset {
    std::uint32_t mask = 0;       ///< bit i set when observation i is in A
    std::vector<Index> members;   ///< indices with zeta = 1, ascending

    Index size() const { return static_cast<Index>(members.size()); }
};

/// All 2^n subsets ordered by bitmask. Throws InvalidArgument when n > 12.
std::vector<AllocationSubset> enumerate_allocations(int n);

/// Tensor Gauss-Legendre rule over (k, gamma) after mapping each axis through
/// the inverse Beta CDF, so the weights integrate against the priors directly.
struct QuadratureGrid {
    VectorXd k_nodes, k_weights;
    VectorXd gamma_nodes, gamma_weights;
    int resolution = 0;
};

QuadratureGrid make_quadrature_grid(const PriorConfig& priors, int resolution);

/// Gauss-Legendre nodes and weights on (0, 1); weights sum to one.
void gauss_legendre_unit(int order, VectorXd& nodes, VectorXd& weights);

/// log of the allocation term with theta, lambda and delta integrated out, at fixed (k, gamma).
/// Throws DivergentIntegral when n <= p or the design is rank-deficient.
double allocation_log_marginal(const Dataset& data, const LinearCode& code, std::span<const Index> subset, double k,
                               double gamma);

/// log B(n - l + a0, l + a0) - log B(a0, a0)
double allocation_log_weight(Index n, Index l, double a0);

struct OracleResult {
    double log_marginal = 0.0;
    double alpha_mean = 0.0;
    std::vector<double> size_mass;       ///< posterior mass of allocations with |A| = l, l = 0..n
    std::vector<double> subset_weights;  ///< normalized posterior weight per subset, bitmask order
    std::vector<double> subset_log_terms;
    int resolution = 0;
};

/// Computes every allocation term on the grid. jobs > 1 splits the subsets over
/// threads; the reduction is a sorted log-sum-exp, so the result does not depend
/// on jobs.
OracleResult evaluate_oracle(const Dataset& data, const LinearCode& code, const PriorConfig& priors,
                             const QuadratureGrid& grid, int jobs = 1);

double marginal_likelihood(const Dataset& data, const LinearCode& code, const PriorConfig& priors,
                           const QuadratureGrid& grid);

double posterior_alpha_mean_exact(const Dataset& data, const LinearCode& code, const PriorConfig& priors,
                                  const QuadratureGrid& grid);

struct OracleReport {
    OracleResult coarse;
    OracleResult fine;       ///< doubled resolution
    double relative_change = 0.0;  ///< |lm_fine - lm_coarse| / max(1, |lm_coarse|)
};

/// Evaluates at `resolution` and 2 * `resolution`. Throws NumericalError when
/// the log marginal moves by more than `tolerance` (relative) between the two.
OracleReport run_oracle(const Dataset& data, const LinearCode& code, const PriorConfig& priors, int resolution = 32,
                        int jobs = 1, double tolerance = 5e-3);

/// log(sum exp(v)) after sorting ascending.
double sorted_log_sum_exp(std::vector<double> values);

}  // namespace mixval
