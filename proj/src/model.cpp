#include "mixval/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/QR>
#include <boost/math/special_functions/beta.hpp>

#include "mixval/errors.hpp"
#include "mixval/gp.hpp"
#include "mixval/random.hpp"

namespace mixval {

namespace {

const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + " is not finite");
}

void require_finite(const Eigen::Ref<const VectorXd>& v, const char* what) {
    if (!v.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
}

void require_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InvalidArgument("lambda must be positive and finite, got " + std::to_string(lambda));
    }
}

}  // namespace

void Dataset::validate() const {
    if (y.size() < 1) throw InvalidArgument("dataset needs at least one observation");
    if (X.rows() != y.size()) throw InvalidArgument("dataset: X has " + std::to_string(X.rows()) +
                                                    " rows but y has " + std::to_string(y.size()));
    if (X.cols() < 1) throw InvalidArgument("dataset: no input columns");
    if (!X.allFinite()) throw InvalidArgument("dataset: inputs contain non-finite values");
    if (!y.allFinite()) throw InvalidArgument("dataset: responses contain non-finite values");
    if ((X.array() < 0.0).any() || (X.array() > 1.0).any()) {
        throw InvalidArgument("dataset: inputs must lie in [0,1]; rescale them first");
    }
}

UnitScaler UnitScaler::fit(const MatrixXd& X) {
    UnitScaler s;
    s.offset = X.colwise().minCoeff().transpose();
    s.scale = (X.colwise().maxCoeff().transpose() - s.offset);
    for (Index j = 0; j < s.scale.size(); ++j) {
        if (!(s.scale(j) > 0.0)) s.scale(j) = 1.0;
    }
    return s;
}

MatrixXd UnitScaler::apply(const MatrixXd& X) const {
    MatrixXd U = X;
    for (Index j = 0; j < X.cols(); ++j) U.col(j) = (X.col(j).array() - offset(j)) / scale(j);
    return U;
}

MatrixXd UnitScaler::invert(const MatrixXd& U) const {
    MatrixXd X = U;
    for (Index j = 0; j < U.cols(); ++j) X.col(j) = U.col(j).array() * scale(j) + offset(j);
    return X;
}

LinearCode LinearCode::polynomial(std::vector<int> degrees) {
    if (degrees.empty()) throw InvalidArgument("polynomial basis needs one degree per input");
    for (int deg : degrees) {
        if (deg < 0) throw InvalidArgument("polynomial degrees must be nonnegative");
    }
    LinearCode code;
    code.degrees_ = std::move(degrees);
    return code;
}

LinearCode LinearCode::tabulated(MatrixXd design) {
    if (design.rows() < 1 || design.cols() < 1) throw InvalidArgument("tabulated design is empty");
    if (!design.allFinite()) throw InvalidArgument("tabulated design has non-finite entries");
    LinearCode code;
    code.tabulated_ = true;
    code.table_ = std::move(design);
    return code;
}

Index LinearCode::p() const {
    if (tabulated_) return table_.cols();
    Index p = 1;
    for (int deg : degrees_) p += deg;
    return p;
}

VectorXd LinearCode::basis_row(const Eigen::Ref<const VectorXd>& x) const {
    if (tabulated_) throw InvalidArgument("basis_row is undefined for a tabulated design");
    if (x.size() != static_cast<Index>(degrees_.size())) {
        throw InvalidArgument("basis_row: input has " + std::to_string(x.size()) + " coordinates, basis expects " +
                              std::to_string(degrees_.size()));
    }
    VectorXd g(p());
    Index col = 0;
    g(col++) = 1.0;
    for (std::size_t j = 0; j < degrees_.size(); ++j) {
        double power = 1.0;
        for (int e = 1; e <= degrees_[j]; ++e) {
            power *= x(static_cast<Index>(j));
            g(col++) = power;
        }
    }
    return g;
}

MatrixXd LinearCode::design(const MatrixXd& X) const {
    if (tabulated_) {
        if (X.rows() != table_.rows()) {
            throw InvalidArgument("tabulated design has " + std::to_string(table_.rows()) + " rows, data has " +
                                  std::to_string(X.rows()));
        }
        return table_;
    }
    MatrixXd G(X.rows(), p());
    for (Index i = 0; i < X.rows(); ++i) G.row(i) = basis_row(X.row(i).transpose()).transpose();
    return G;
}

std::vector<std::string> LinearCode::column_names() const {
    std::vector<std::string> names;
    if (tabulated_) {
        for (Index j = 0; j < table_.cols(); ++j) names.push_back("g" + std::to_string(j + 1));
        return names;
    }
    names.emplace_back("1");
    for (std::size_t j = 0; j < degrees_.size(); ++j) {
        for (int e = 1; e <= degrees_[j]; ++e) {
            std::string name = "x" + std::to_string(j + 1);
            if (e > 1) name += "^" + std::to_string(e);
            names.push_back(name);
        }
    }
    return names;
}

std::vector<Index> dependent_columns(const MatrixXd& G) {
    std::vector<Index> dependent;
    const double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
    const double tol = 1e-10 * scale * static_cast<double>(std::max(G.rows(), G.cols()));
    // Greedy: a column is dependent when it adds no rank to the accepted ones.
    MatrixXd accepted(G.rows(), 0);
    for (Index j = 0; j < G.cols(); ++j) {
        MatrixXd trial(G.rows(), accepted.cols() + 1);
        trial << accepted, G.col(j);
        Eigen::ColPivHouseholderQR<MatrixXd> qr(trial);
        qr.setThreshold(tol / std::max(1e-300, trial.cwiseAbs().maxCoeff()));
        if (qr.rank() == trial.cols()) {
            accepted = std::move(trial);
        } else {
            dependent.push_back(j);
        }
    }
    return dependent;
}

int MixtureState::m() const {
    int count = 0;
    for (auto z : zeta) count += z ? 1 : 0;
    return count;
}

void MixtureState::validate(Index n, Index p) const {
    if (theta.size() != p) throw InvalidArgument("state: theta has the wrong dimension");
    if (delta.size() != n || static_cast<Index>(zeta.size()) != n) {
        throw InvalidArgument("state: delta or zeta has the wrong length");
    }
    if (!theta.allFinite() || !delta.allFinite()) throw InvalidArgument("state: non-finite theta or delta");
    require_lambda(lambda);
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("state: alpha outside [0,1]");
    if (!(k > 0.0 && k < 1.0)) throw InvalidArgument("state: k outside (0,1)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("state: gamma outside (0,1)");
}

double BetaShape::log_pdf(double x) const {
    if (!(x > 0.0 && x < 1.0)) return -std::numeric_limits<double>::infinity();
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - std::log(boost::math::beta(a, b));
}

void PriorConfig::validate() const {
    if (!(a0 > 0.0)) throw InvalidArgument("a0 must be positive");
    if (!(k_prior.a > 0.0 && k_prior.b > 0.0)) throw InvalidArgument("k prior shapes must be positive");
    if (!(gamma_prior.a > 0.0 && gamma_prior.b > 0.0)) throw InvalidArgument("gamma prior shapes must be positive");
    if (!std::isfinite(mu_delta)) throw InvalidArgument("mu_delta must be finite");
}

double log_normal_pdf(double value, double mean, double sd) {
    const double z = (value - mean) / sd;
    return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * z * z;
}

double log_lik_m0(double y, const Eigen::Ref<const VectorXd>& g, const Eigen::Ref<const VectorXd>& theta,
                  double lambda) {
    require_lambda(lambda);
    require_finite(y, "y");
    require_finite(g, "g");
    require_finite(theta, "theta");
    if (g.size() != theta.size()) throw InvalidArgument("log_lik_m0: g and theta differ in length");
    return log_normal_pdf(y, g.dot(theta), lambda);
}

double log_lik_m1(double y, const Eigen::Ref<const VectorXd>& g, double delta,
                  const Eigen::Ref<const VectorXd>& theta, double lambda) {
    require_lambda(lambda);
    require_finite(y, "y");
    require_finite(delta, "delta");
    require_finite(g, "g");
    require_finite(theta, "theta");
    if (g.size() != theta.size()) throw InvalidArgument("log_lik_m1: g and theta differ in length");
    return log_normal_pdf(y, g.dot(theta) + delta, lambda);
}

double log_mixture_lik(const Dataset& data, const LinearCode& code, const MixtureState& state) {
    const MatrixXd G = code.design(data.X);
    if (G.rows() != data.n()) throw InvalidArgument("log_mixture_lik: design and data disagree");
    state.validate(data.n(), G.cols());
    const double log_a = std::log(state.alpha);
    const double log_1a = std::log1p(-state.alpha);
    double total = 0.0;
    for (Index i = 0; i < data.n(); ++i) {
        const double l0 = log_lik_m0(data.y(i), G.row(i).transpose(), state.theta, state.lambda);
        const double l1 = log_lik_m1(data.y(i), G.row(i).transpose(), state.delta(i), state.theta, state.lambda);
        if (l0 == l1) {
            total += l0;
            continue;
        }
        const double a = log_a + l0;
        const double b = log_1a + l1;
        const double hi = std::max(a, b);
        const double lo = std::min(a, b);
        total += hi + std::log1p(std::exp(lo - hi));
    }
    return total;
}

VectorXd simulate_m0(const LinearCode& code, const VectorXd& theta_star, double lambda_star, const MatrixXd& X,
                     std::uint64_t seed) {
    if (!(lambda_star >= 0.0)) throw InvalidArgument("simulate_m0: lambda* must be nonnegative");
    const MatrixXd G = code.design(X);
    if (G.cols() != theta_star.size()) throw InvalidArgument("simulate_m0: theta* has the wrong dimension");
    Rng rng(seed);
    VectorXd y = G * theta_star;
    for (Index i = 0; i < y.size(); ++i) y(i) += lambda_star * rng.normal();
    return y;
}

M1Simulation simulate_m1(const LinearCode& code, const VectorXd& theta_star, double lambda_star, double k_star,
                         double gamma_star, const MatrixXd& X, std::uint64_t seed) {
    if (!(lambda_star >= 0.0)) throw InvalidArgument("simulate_m1: lambda* must be nonnegative");
    if (!(k_star > 0.0 && k_star < 1.0)) throw InvalidArgument("simulate_m1: k* must lie in (0,1)");
    if (!(gamma_star > 0.0 && gamma_star < 1.0)) throw InvalidArgument("simulate_m1: gamma* must lie in (0,1)");
    const MatrixXd G = code.design(X);
    if (G.cols() != theta_star.size()) throw InvalidArgument("simulate_m1: theta* has the wrong dimension");

    Rng rng(seed);
    const CholFactor chol = chol_psd(corr_matrix(X, gamma_star).M);
    const double sigma = lambda_star / std::sqrt(k_star);
    M1Simulation sim;
    const VectorXd z = rng.normal_vector(X.rows());
    sim.delta = chol.L.triangularView<Eigen::Lower>() * z;
    sim.delta *= sigma;
    sim.y = G * theta_star + sim.delta;
    for (Index i = 0; i < sim.y.size(); ++i) sim.y(i) += lambda_star * rng.normal();
    return sim;
}

MatrixXd unit_grid(Index n) {
    MatrixXd X(n, 1);
    for (Index i = 0; i < n; ++i) X(i, 0) = static_cast<double>(i + 1) / static_cast<double>(n);
    return X;
}

}  // namespace mixval
