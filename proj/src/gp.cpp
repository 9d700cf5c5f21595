#include "mixval/gp.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "mixval/errors.hpp"

namespace mixval {

namespace {

constexpr int kJitterEscalations = 6;

void require_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgument("correlation length must be positive, got " + std::to_string(gamma));
    }
}

}  // namespace

double exp_corr(const Eigen::Ref<const VectorXd>& xi, const Eigen::Ref<const VectorXd>& xj, double gamma) {
    require_gamma(gamma);
    if (xi.size() != xj.size()) throw InvalidArgument("exp_corr: input dimensions differ");
    return std::exp(-(xi - xj).cwiseAbs().sum() / gamma);
}

MatrixXd l1_distances(const MatrixXd& X) {
    const Index n = X.rows();
    MatrixXd D = MatrixXd::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            const double dist = (X.row(i) - X.row(j)).cwiseAbs().sum();
            D(i, j) = dist;
            D(j, i) = dist;
        }
    }
    return D;
}

MatrixXd corr_from_distances(const MatrixXd& D, double gamma) {
    require_gamma(gamma);
    return (-D.array() / gamma).exp().matrix();
}

CorrMatrix corr_matrix(const MatrixXd& X, double gamma) {
    require_gamma(gamma);
    return {corr_from_distances(l1_distances(X), gamma), gamma};
}

double CholFactor::log_det() const { return 2.0 * L.diagonal().array().log().sum(); }

VectorXd CholFactor::half_solve(const VectorXd& b) const {
    return L.triangularView<Eigen::Lower>().solve(b);
}

VectorXd CholFactor::solve(const VectorXd& b) const {
    VectorXd w = L.triangularView<Eigen::Lower>().solve(b);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(w);
    return w;
}

MatrixXd CholFactor::solve(const MatrixXd& B) const {
    MatrixXd W = L.triangularView<Eigen::Lower>().solve(B);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(W);
    return W;
}

CholFactor chol_psd(const MatrixXd& M, double base_jitter) {
    if (M.rows() != M.cols()) throw InvalidArgument("chol_psd: matrix is not square");
    const Index n = M.rows();
    if (n == 0) return {MatrixXd(0, 0), 0.0};
    if (!M.allFinite()) throw SingularMatrix("chol_psd: matrix has non-finite entries");

    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};

    const double mean_diag = M.diagonal().mean();
    const double unit = mean_diag > 0.0 ? mean_diag : 1.0;
    double jitter = base_jitter * unit;
    for (int attempt = 0; attempt <= kJitterEscalations; ++attempt, jitter *= 10.0) {
        MatrixXd Mj = M;
        Mj.diagonal().array() += jitter;
        llt.compute(Mj);
        if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
    }
    throw SingularMatrix("Cholesky factorization failed after jitter escalation to " + std::to_string(jitter / 10.0));
}

GpConditional gp_conditional(double mu_delta, const MatrixXd& prior_cov, std::span<const Index> sites,
                             const VectorXd& noise_var, const VectorXd& y_m, const VectorXd& code_mean_m) {
    const Index n = prior_cov.rows();
    const auto m = static_cast<Index>(sites.size());
    if (noise_var.size() != m || y_m.size() != m || code_mean_m.size() != m) {
        throw InvalidArgument("gp_conditional: conditioning vectors do not match the number of sites");
    }
    GpConditional out{VectorXd::Constant(n, mu_delta), prior_cov};
    if (m == 0) return out;

    MatrixXd cross(n, m);  // Sigma_{delta, y_m}
    MatrixXd obs_cov(m, m);
    for (Index l = 0; l < m; ++l) {
        if (sites[l] < 0 || sites[l] >= n) throw InvalidArgument("gp_conditional: site index out of range");
        cross.col(l) = prior_cov.col(sites[l]);
        for (Index q = 0; q < m; ++q) obs_cov(l, q) = prior_cov(sites[l], sites[q]);
    }
    obs_cov.diagonal() += noise_var;

    const CholFactor chol = chol_psd(obs_cov);
    const VectorXd innovation = y_m - (code_mean_m.array() + mu_delta).matrix();
    out.mean += cross * chol.solve(innovation);
    const MatrixXd half = chol.L.triangularView<Eigen::Lower>().solve(cross.transpose());
    out.cov.noalias() -= half.transpose() * half;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

VectorXd sample_mvn(const VectorXd& mu, const CholFactor& chol, Rng& rng) {
    if (chol.size() != mu.size()) throw InvalidArgument("sample_mvn: factor and mean sizes differ");
    const VectorXd z = rng.normal_vector(mu.size());
    VectorXd draw = chol.L.triangularView<Eigen::Lower>() * z;
    return mu + draw;
}

}  // namespace mixval
