#include "mixval/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mixval/errors.hpp"
#include "mixval/gp.hpp"

namespace mixval {

namespace {

const double kLogTwoPi = std::log(2.0 * std::numbers::pi);
const double kNegInf = -std::numeric_limits<double>::infinity();

/// Precomputed pieces shared by every allocation term of one dataset.
struct OracleContext {
    MatrixXd G;
    VectorXd y;
    MatrixXd D;
    Index n = 0;
    Index p = 0;
};

OracleContext make_context(const Dataset& data, const LinearCode& code) {
    data.validate();
    OracleContext ctx;
    ctx.G = code.design(data.X);
    ctx.y = data.y;
    ctx.D = l1_distances(data.X);
    ctx.n = data.n();
    ctx.p = ctx.G.cols();
    if (ctx.n <= ctx.p) {
        throw DivergentIntegral("the lambda integral diverges unless n > p (n = " + std::to_string(ctx.n) +
                                ", p = " + std::to_string(ctx.p) + ")");
    }
    if (!dependent_columns(ctx.G).empty()) {
        throw DivergentIntegral("the theta integral diverges for a rank-deficient design");
    }
    return ctx;
}

/// Closed-form theta/lambda integral for y ~ N(G theta, lambda^2 V) with V given
/// through its whitened data (V^{-1/2} y, V^{-1/2} G) and log|V|.
double gls_log_marginal(const VectorXd& y_w, const MatrixXd& G_w, double log_det_v) {
    const Index n = G_w.rows();
    const Index p = G_w.cols();
    Eigen::HouseholderQR<MatrixXd> qr(G_w);
    const MatrixXd R = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    double log_det_gram = 0.0;
    for (Index j = 0; j < p; ++j) log_det_gram += 2.0 * std::log(std::abs(R(j, j)));
    const VectorXd beta = qr.solve(y_w);
    const double S = (y_w - G_w * beta).squaredNorm();
    if (!(S > 0.0)) return std::numeric_limits<double>::infinity();
    const double a = static_cast<double>(n - p);
    return -0.5 * a * kLogTwoPi - 0.5 * log_det_v - 0.5 * log_det_gram + std::lgamma(0.5 * a) - std::log(2.0) -
           0.5 * a * std::log(0.5 * S);
}

double allocation_term(const OracleContext& ctx, std::span<const Index> subset, const MatrixXd& corr, double k) {
    const auto l = static_cast<Index>(subset.size());
    if (l == 0) return gls_log_marginal(ctx.y, ctx.G, 0.0);
    MatrixXd B(l, l);
    for (Index a = 0; a < l; ++a) {
        for (Index b = 0; b < l; ++b) B(a, b) = corr(subset[a], subset[b]) / k;
        B(a, a) += 1.0;
    }
    const CholFactor chol = chol_psd(B);
    VectorXd y_w = ctx.y;
    MatrixXd G_w = ctx.G;
    VectorXd y_a(l);
    MatrixXd G_a(l, ctx.p);
    for (Index a = 0; a < l; ++a) {
        y_a(a) = ctx.y(subset[a]);
        G_a.row(a) = ctx.G.row(subset[a]);
    }
    y_a = chol.L.triangularView<Eigen::Lower>().solve(y_a);
    G_a = chol.L.triangularView<Eigen::Lower>().solve(G_a);
    for (Index a = 0; a < l; ++a) {
        y_w(subset[a]) = y_a(a);
        G_w.row(subset[a]) = G_a.row(a);
    }
    return gls_log_marginal(y_w, G_w, chol.log_det());
}

}  // namespace

std::vector<AllocationSubset> enumerate_allocations(int n) {
    if (n < 0) throw InvalidArgument("enumerate_allocations: negative n");
    if (n > kOracleMaxN) {
        throw InvalidArgument("exact enumeration is capped at n = " + std::to_string(kOracleMaxN) + " (got n = " +
                              std::to_string(n) + ")");
    }
    const std::uint32_t count = 1u << n;
    std::vector<AllocationSubset> out(count);
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        out[mask].mask = mask;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) out[mask].members.push_back(i);
        }
    }
    return out;
}

void gauss_legendre_unit(int order, VectorXd& nodes, VectorXd& weights) {
    if (order < 1) throw InvalidArgument("Gauss-Legendre order must be positive");
    nodes.resize(order);
    weights.resize(order);
    for (int i = 0; i < order; ++i) {
        // Newton on P_order starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= order; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) p0 = 1.0;
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= order; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        if (order == 1) p0 = 1.0;
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        // map [-1, 1] -> (0, 1), ascending
        nodes(order - 1 - i) = 0.5 * (x + 1.0);
        weights(order - 1 - i) = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

QuadratureGrid make_quadrature_grid(const PriorConfig& priors, int resolution) {
    priors.validate();
    QuadratureGrid grid;
    grid.resolution = resolution;
    VectorXd u, w;
    gauss_legendre_unit(resolution, u, w);
    grid.k_nodes.resize(resolution);
    grid.gamma_nodes.resize(resolution);
    for (int j = 0; j < resolution; ++j) {
        grid.k_nodes(j) = boost::math::ibeta_inv(priors.k_prior.a, priors.k_prior.b, u(j));
        grid.gamma_nodes(j) = boost::math::ibeta_inv(priors.gamma_prior.a, priors.gamma_prior.b, u(j));
    }
    grid.k_weights = w;
    grid.gamma_weights = w;
    return grid;
}

double allocation_log_marginal(const Dataset& data, const LinearCode& code, std::span<const Index> subset, double k,
                               double gamma) {
    if (!(k > 0.0 && k < 1.0)) throw InvalidArgument("k must lie in (0,1)");
    const OracleContext ctx = make_context(data, code);
    for (Index i : subset) {
        if (i < 0 || i >= ctx.n) throw InvalidArgument("allocation index out of range");
    }
    const double value = allocation_term(ctx, subset, corr_from_distances(ctx.D, gamma), k);
    if (!std::isfinite(value)) throw DivergentIntegral("allocation marginal is not finite (exact fit)");
    return value;
}

double allocation_log_weight(Index n, Index l, double a0) {
    const double nd = static_cast<double>(n);
    const double ld = static_cast<double>(l);
    return std::log(boost::math::beta(nd - ld + a0, ld + a0)) - std::log(boost::math::beta(a0, a0));
}

double sorted_log_sum_exp(std::vector<double> values) {
    if (values.empty()) return kNegInf;
    std::sort(values.begin(), values.end());
    const double hi = values.back();
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - hi);
    return hi + std::log(acc);
}

OracleResult evaluate_oracle(const Dataset& data, const LinearCode& code, const PriorConfig& priors,
                             const QuadratureGrid& grid, int jobs) {
    priors.validate();
    if (priors.mu_delta != 0.0) {
        throw InvalidArgument("the enumeration oracle supports only a zero discrepancy mean");
    }
    if (data.n() > kOracleMaxN) {
        throw InvalidArgument("exact enumeration is capped at n = " + std::to_string(kOracleMaxN) + " (got n = " +
                              std::to_string(data.n()) + ")");
    }
    const OracleContext ctx = make_context(data, code);
    const auto subsets = enumerate_allocations(static_cast<int>(ctx.n));
    const int R = grid.resolution;

    std::vector<MatrixXd> corr(static_cast<std::size_t>(R));
    for (int q = 0; q < R; ++q) corr[static_cast<std::size_t>(q)] = corr_from_distances(ctx.D, grid.gamma_nodes(q));

    std::vector<double> log_terms(subsets.size());
    auto work = [&](std::size_t begin, std::size_t stride) {
        std::vector<double> cells(static_cast<std::size_t>(R) * static_cast<std::size_t>(R));
        for (std::size_t s = begin; s < subsets.size(); s += stride) {
            const auto& A = subsets[s];
            double integral;
            if (A.members.empty()) {
                integral = allocation_term(ctx, A.members, corr[0], 0.5);
            } else {
                std::size_t c = 0;
                for (int q = 0; q < R; ++q) {
                    for (int j = 0; j < R; ++j) {
                        cells[c++] = std::log(grid.gamma_weights(q)) + std::log(grid.k_weights(j)) +
                                     allocation_term(ctx, A.members, corr[static_cast<std::size_t>(q)],
                                                     grid.k_nodes(j));
                    }
                }
                integral = sorted_log_sum_exp(cells);
            }
            log_terms[s] = allocation_log_weight(ctx.n, A.size(), priors.a0) + integral;
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, jobs));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
        for (auto& th : pool) th.join();
    }

    for (double v : log_terms) {
        if (!std::isfinite(v)) throw DivergentIntegral("an allocation term is not finite");
    }

    OracleResult result;
    result.resolution = R;
    result.subset_log_terms = log_terms;
    result.log_marginal = sorted_log_sum_exp(log_terms);
    result.size_mass.assign(static_cast<std::size_t>(ctx.n + 1), 0.0);
    result.subset_weights.resize(subsets.size());
    const double nd = static_cast<double>(ctx.n);
    std::vector<double> alpha_parts(subsets.size());
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        const double w = std::exp(log_terms[s] - result.log_marginal);
        const auto l = static_cast<std::size_t>(subsets[s].size());
        result.subset_weights[s] = w;
        result.size_mass[l] += w;
        alpha_parts[s] = w * (nd - static_cast<double>(l) + priors.a0) / (nd + 2.0 * priors.a0);
    }
    std::sort(alpha_parts.begin(), alpha_parts.end());
    result.alpha_mean = 0.0;
    for (double a : alpha_parts) result.alpha_mean += a;
    return result;
}

double marginal_likelihood(const Dataset& data, const LinearCode& code, const PriorConfig& priors,
                           const QuadratureGrid& grid) {
    return evaluate_oracle(data, code, priors, grid).log_marginal;
}

double posterior_alpha_mean_exact(const Dataset& data, const LinearCode& code, const PriorConfig& priors,
                                  const QuadratureGrid& grid) {
    return evaluate_oracle(data, code, priors, grid).alpha_mean;
}

OracleReport run_oracle(const Dataset& data, const LinearCode& code, const PriorConfig& priors, int resolution,
                        int jobs, double tolerance) {
    OracleReport report;
    report.coarse = evaluate_oracle(data, code, priors, make_quadrature_grid(priors, resolution), jobs);
    report.fine = evaluate_oracle(data, code, priors, make_quadrature_grid(priors, 2 * resolution), jobs);
    report.relative_change = std::abs(report.fine.log_marginal - report.coarse.log_marginal) /
                             std::max(1.0, std::abs(report.coarse.log_marginal));
    if (report.relative_change > tolerance) {
        throw NumericalError("quadrature did not converge: log marginal moved by " +
                             std::to_string(100.0 * report.relative_change) + "% under grid doubling");
    }
    return report;
}

}  // namespace mixval
