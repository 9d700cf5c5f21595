#pragma once

#include <span>

#include <Eigen/Core>

#include "mixval/random.hpp"

namespace mixval {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// exp(-||xi - xj||_1 / gamma). For scalar inputs this is exp(-|x - x'| / gamma);
/// with several inputs it is the product of one-dimensional exponential kernels
/// sharing a single length.
double exp_corr(const Eigen::Ref<const VectorXd>& xi, const Eigen::Ref<const VectorXd>& xj, double gamma);

struct CorrMatrix {
    MatrixXd M;
    double gamma = 0.0;
};

CorrMatrix corr_matrix(const MatrixXd& X, double gamma);

/// Pairwise L1 distances between the rows of X.
MatrixXd l1_distances(const MatrixXd& X);

/// exp(-D / gamma) elementwise.
MatrixXd corr_from_distances(const MatrixXd& D, double gamma);

/// Lower Cholesky factor of a symmetric matrix, possibly of M + jitter * I.
struct CholFactor {
    MatrixXd L;
    double jitter_used = 0.0;

    Index size() const { return L.rows(); }
    double log_det() const;
    /// L^{-1} b
    VectorXd half_solve(const VectorXd& b) const;
    /// (L L^T)^{-1} b
    VectorXd solve(const VectorXd& b) const;
    MatrixXd solve(const MatrixXd& B) const;
};

/// Cholesky with jitter escalation. The plain factorization is tried first; on
/// failure base_jitter * mean(diag) is added to the diagonal and multiplied by
/// ten on each retry, six times at most. Throws SingularMatrix when every
/// attempt fails.
CholFactor chol_psd(const MatrixXd& M, double base_jitter = 1e-10);

struct GpConditional {
    VectorXd mean;
    MatrixXd cov;
};

/// Kriging update of a discrepancy vector observed with noise at some sites.
///
/// prior_cov is Sigma_{delta,delta} over all n sites; the prior mean is the
/// constant mu_delta. Observation l sits at index sites[l] with its own noise
/// variance noise_var[l], so Sigma_{y_m,y_m} = prior_cov[sites, sites] +
/// diag(noise_var). y_m - code_mean_m are the observations with the code output
/// removed. Sites may repeat.
GpConditional gp_conditional(double mu_delta, const MatrixXd& prior_cov, std::span<const Index> sites,
                             const VectorXd& noise_var, const VectorXd& y_m, const VectorXd& code_mean_m);

/// mu + L z with z standard normal from rng.
VectorXd sample_mvn(const VectorXd& mu, const CholFactor& chol, Rng& rng);

}  // namespace mixval
