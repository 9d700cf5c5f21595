#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mixval/gp.hpp"
#include "mixval/model.hpp"
#include "mixval/random.hpp"

namespace mixval {

struct McmcConfig {
    long iters = 10000;   ///< total iterations, burn-in included
    long burn_in = 1000;
    std::uint64_t seed = 1;
    double target_accept = 0.44;
    long adapt_window = 20;
    long thin = 1;
    bool random_init = false;
    double initial_scale_k = 1.0;      ///< random-walk sd on logit(k)
    double initial_scale_gamma = 1.0;  ///< random-walk sd on logit(gamma)

    void validate() const;
};

/// Data, code design and priors with everything that stays fixed along a chain
/// precomputed: the Gram factor of G, the OLS fit and the input distances.
class MixtureProblem {
public:
    MixtureProblem(Dataset data, const LinearCode& code, PriorConfig priors);

    const Dataset& data() const { return data_; }
    const MatrixXd& design() const { return G_; }
    const PriorConfig& priors() const { return priors_; }
    const MatrixXd& distances() const { return D_; }
    Index n() const { return data_.n(); }
    Index p() const { return G_.cols(); }

    /// Lower factor of G^T G.
    const MatrixXd& gram_factor() const { return gram_L_; }
    VectorXd gram_solve(const VectorXd& b) const;
    const VectorXd& ols() const { return ols_; }

private:
    Dataset data_;
    MatrixXd G_;
    PriorConfig priors_;
    MatrixXd D_;
    MatrixXd gram_L_;
    VectorXd ols_;
};

/// Correlation matrix at one gamma with its factor; reused while gamma stays put.
struct CorrCache {
    double gamma = 0.0;
    MatrixXd corr;
    CholFactor chol;

    double log_det() const { return chol.log_det(); }
    /// (v - mu)^T Corr^{-1} (v - mu)
    double quad_form(const VectorXd& v, double mu) const;
};

CorrCache make_corr_cache(const MixtureProblem& problem, double gamma);

struct ZetaDraw {
    std::vector<std::uint8_t> zeta;
    int m = 0;
};

/// P(zeta_i = 1 | state) for every observation, computed in the log domain.
VectorXd zeta_probabilities(const MixtureProblem& problem, const MixtureState& state);

ZetaDraw sample_zeta(const MixtureProblem& problem, const MixtureState& state, Rng& rng);

/// Draws the whole discrepancy vector given the observations allocated to the
/// discrepancy component (state.zeta), with sigma_delta^2 = lambda^2 / k.
///
/// Uses pathwise conditioning: a prior draw is corrected by the kriging gain
/// applied to the mismatch with noisy pseudo-observations. The result has
/// exactly the gp_conditional distribution but only factors the m x m
/// observation block.
VectorXd sample_delta(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr, Rng& rng);

/// The Gaussian full conditional of delta in closed form (mean and covariance).
GpConditional delta_conditional(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr);

struct GaussianConditional {
    VectorXd mean;
    MatrixXd cov;
};

GaussianConditional theta_conditional(const MixtureProblem& problem, const MixtureState& state);
VectorXd sample_theta(const MixtureProblem& problem, const MixtureState& state, Rng& rng);

/// lambda^2 | rest ~ InverseGamma(shape, rate).
struct InverseGammaParams {
    double shape = 0.0;
    double rate = 0.0;
};

/// shape = n, rate = (RSS_zeta + k (delta - mu)^T Corr^{-1} (delta - mu)) / 2.
InverseGammaParams lambda_conditional(const MixtureProblem& problem, const MixtureState& state,
                                      const CorrCache& corr);
double sample_lambda(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr, Rng& rng);

double sample_alpha(Index n, int m, double a0, Rng& rng);

struct MhResult {
    double value = 0.0;
    bool accepted = false;
};

/// log of the k full conditional up to a constant: log N(delta | mu, lambda^2/k Corr) + log Beta(k).
/// quad = (delta - mu)^T Corr^{-1} (delta - mu).
double log_conditional_k(double k, double quad, Index n, double lambda, const BetaShape& prior);

/// Log acceptance ratio of moving k to k_prop under a random walk on logit(k).
double log_accept_ratio_k(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr,
                          double k_prop);

MhResult mh_step_k(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr, double scale,
                   Rng& rng);

/// log N(delta | mu, lambda^2/k Corr_gamma) + log Beta(gamma) up to a constant.
double log_conditional_gamma(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr);

double log_accept_ratio_gamma(const MixtureProblem& problem, const MixtureState& state, const CorrCache& current,
                              const CorrCache& proposal);

/// Random walk on logit(gamma). On acceptance `corr` is replaced by the cache
/// at the new gamma.
MhResult mh_step_gamma(const MixtureProblem& problem, const MixtureState& state, CorrCache& corr, double scale,
                       Rng& rng);

/// Robbins-Monro step on the log scale: log s += (rate - target) / iteration^0.6.
double adapt_scale(double current_scale, double accept_rate, double target, long iteration);

struct PosteriorDraws {
    std::vector<long> iterations;  ///< 1-based iteration index of each saved state
    std::vector<MixtureState> states;
    std::vector<int> m_trace;      ///< m after every iteration, burn-in included
    double accept_k = 0.0;         ///< post-burn-in acceptance rates
    double accept_gamma = 0.0;
    double scale_k = 0.0;          ///< frozen proposal scales
    double scale_gamma = 0.0;

    std::size_t size() const { return states.size(); }
    bool empty() const { return states.empty(); }
};

/// The starting point used by run_chain.
MixtureState initial_state(const MixtureProblem& problem, const McmcConfig& config, Rng& rng);

/// Runs the Metropolis-within-Gibbs sweep (zeta, delta, theta, lambda, alpha, k,
/// gamma) `config.iters` times. Proposal scales adapt during burn-in only.
PosteriorDraws run_chain(const MixtureProblem& problem, const McmcConfig& config);
PosteriorDraws run_chain(const Dataset& data, const LinearCode& code, const PriorConfig& priors,
                         const McmcConfig& config);

/// One sweep from `state`. Exposed so tests can drive the kernel directly.
struct SweepStats {
    bool accepted_k = false;
    bool accepted_gamma = false;
};
SweepStats gibbs_sweep(const MixtureProblem& problem, MixtureState& state, CorrCache& corr, double scale_k,
                       double scale_gamma, Rng& rng);

}  // namespace mixval
