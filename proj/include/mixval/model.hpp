#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace mixval {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Field measurements: n rows of controllable inputs in [0,1]^d and the
/// measured response at each of them.
struct Dataset {
    MatrixXd X;
    VectorXd y;

    Index n() const { return y.size(); }
    Index d() const { return X.cols(); }

    /// Throws InvalidArgument unless n >= 1, X is n x d, all inputs are finite and
    /// inside [0,1], and y is finite.
    void validate() const;
};

/// Per-column affine map onto [0,1]. Kept alongside a dataset so correlation
/// lengths stay on the unit scale the gamma prior assumes.
struct UnitScaler {
    VectorXd offset;
    VectorXd scale;

    static UnitScaler fit(const MatrixXd& X);
    MatrixXd apply(const MatrixXd& X) const;
    MatrixXd invert(const MatrixXd& U) const;
};

/// A code that is linear in its parameters, f(x, theta) = g(x) theta.
///
/// Two kinds of basis are supported. A polynomial basis has an intercept plus
/// x_j, x_j^2, ..., x_j^{deg_j} for every input j (no cross terms); with a single
/// input of degree 2 this is g(x) = (1, x, x^2). A tabulated basis is an explicit
/// n x p design matrix, one row per observation, as produced by linearizing a
/// black-box code.
class LinearCode {
public:
    static LinearCode polynomial(std::vector<int> degrees);
    static LinearCode tabulated(MatrixXd design);

    bool is_tabulated() const { return tabulated_; }
    Index p() const;

    /// g(x) for a polynomial basis.
    VectorXd basis_row(const Eigen::Ref<const VectorXd>& x) const;

    /// Stacked rows g(x_1), ..., g(x_n). For a tabulated basis X must have as many
    /// rows as the table.
    MatrixXd design(const MatrixXd& X) const;

    std::vector<std::string> column_names() const;
    const std::vector<int>& degrees() const { return degrees_; }
    const MatrixXd& table() const { return table_; }

private:
    bool tabulated_ = false;
    std::vector<int> degrees_;
    MatrixXd table_;
};

/// Indices of design columns that are (numerically) linear combinations of the
/// columns before them. Empty when the design has full column rank.
std::vector<Index> dependent_columns(const MatrixXd& G);

/// One full parameter point of the encompassing mixture.
struct MixtureState {
    VectorXd theta;
    double lambda = 1.0;  ///< noise standard deviation
    double alpha = 0.5;   ///< weight of the pure-code component
    double k = 0.5;       ///< variance ratio, sigma_delta^2 = lambda^2 / k
    double gamma = 0.5;   ///< correlation length of the discrepancy
    VectorXd delta;       ///< discrepancy at the observed inputs
    std::vector<std::uint8_t> zeta;  ///< 1 when observation i uses the discrepancy component

    int m() const;
    void validate(Index n, Index p) const;
};

struct BetaShape {
    double a = 1.0;
    double b = 1.0;

    double mean() const { return a / (a + b); }
    double log_pdf(double x) const;
};

/// Hyperparameters. theta and lambda always carry the Jeffreys prior 1/lambda.
struct PriorConfig {
    double a0 = 0.5;          ///< alpha ~ Beta(a0, a0)
    BetaShape k_prior{1.0, 1.0};
    BetaShape gamma_prior{1.0, 1.0};
    double mu_delta = 0.0;    ///< constant mean of the discrepancy process

    void validate() const;
};

double log_lik_m0(double y, const Eigen::Ref<const VectorXd>& g, const Eigen::Ref<const VectorXd>& theta,
                  double lambda);

double log_lik_m1(double y, const Eigen::Ref<const VectorXd>& g, double delta,
                  const Eigen::Ref<const VectorXd>& theta, double lambda);

/// log N(value | mean, sd^2), evaluated as -log(sd) terms so that tiny sd does not underflow.
double log_normal_pdf(double value, double mean, double sd);

/// Sum over observations of log(alpha * l0_i + (1 - alpha) * l1_i), one
/// log-sum-exp per observation.
double log_mixture_lik(const Dataset& data, const LinearCode& code, const MixtureState& state);

/// y = G theta* + eps, eps ~ N(0, lambda*^2).
VectorXd simulate_m0(const LinearCode& code, const VectorXd& theta_star, double lambda_star, const MatrixXd& X,
                     std::uint64_t seed);

struct M1Simulation {
    VectorXd y;
    VectorXd delta;
};

/// delta* ~ GP(0, (lambda*^2 / k*) Corr_gamma*), then y = G theta* + delta* + eps.
M1Simulation simulate_m1(const LinearCode& code, const VectorXd& theta_star, double lambda_star, double k_star,
                         double gamma_star, const MatrixXd& X, std::uint64_t seed);

/// Inputs x_i = i / n, i = 1..n, as a column.
MatrixXd unit_grid(Index n);

}  // namespace mixval
