#include "mixval/sampler.hpp"

#include <cmath>
#include <string>

#include "mixval/errors.hpp"

namespace mixval {

namespace {

double logit(double x) { return std::log(x) - std::log1p(-x); }

double expit(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

std::vector<Index> allocated_sites(const std::vector<std::uint8_t>& zeta) {
    std::vector<Index> sites;
    for (std::size_t i = 0; i < zeta.size(); ++i) {
        if (zeta[i]) sites.push_back(static_cast<Index>(i));
    }
    return sites;
}

/// Re-throws a step failure with the iteration attached, keeping its category.
[[noreturn]] void rethrow_at(long iteration) {
    const std::string where = "iteration " + std::to_string(iteration) + ": ";
    try {
        throw;
    } catch (const SingularMatrix& e) {
        throw SingularMatrix(where + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(where + e.what());
    } catch (const DivergentIntegral& e) {
        throw DivergentIntegral(where + e.what());
    } catch (const ModelError& e) {
        throw ModelError(where + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(where + e.what());
    }
}

}  // namespace

void McmcConfig::validate() const {
    if (iters < 1) throw InvalidArgument("iters must be at least 1");
    if (burn_in < 0 || burn_in >= iters) throw InvalidArgument("burn_in must satisfy 0 <= burn_in < iters");
    if (!(target_accept > 0.0 && target_accept < 1.0)) throw InvalidArgument("target_accept must lie in (0,1)");
    if (adapt_window < 1) throw InvalidArgument("adapt_window must be at least 1");
    if (thin < 1) throw InvalidArgument("thin must be at least 1");
    if (!(initial_scale_k > 0.0) || !(initial_scale_gamma > 0.0)) {
        throw InvalidArgument("initial proposal scales must be positive");
    }
}

MixtureProblem::MixtureProblem(Dataset data, const LinearCode& code, PriorConfig priors)
    : data_(std::move(data)), priors_(priors) {
    data_.validate();
    priors_.validate();
    G_ = code.design(data_.X);
    const auto dependent = dependent_columns(G_);
    if (!dependent.empty() || G_.rows() < G_.cols()) {
        const auto names = code.column_names();
        std::string cols;
        for (Index j : dependent) {
            if (!cols.empty()) cols += ", ";
            cols += names[static_cast<std::size_t>(j)];
        }
        if (cols.empty()) cols = "(n < p)";
        throw ModelError("design matrix is rank-deficient; dependent basis columns: " + cols);
    }
    Eigen::LLT<MatrixXd> llt(G_.transpose() * G_);
    if (llt.info() != Eigen::Success) throw ModelError("G^T G is not positive definite");
    gram_L_ = llt.matrixL();
    ols_ = gram_solve(G_.transpose() * data_.y);
    D_ = l1_distances(data_.X);
}

VectorXd MixtureProblem::gram_solve(const VectorXd& b) const {
    VectorXd w = gram_L_.triangularView<Eigen::Lower>().solve(b);
    gram_L_.transpose().triangularView<Eigen::Upper>().solveInPlace(w);
    return w;
}

double CorrCache::quad_form(const VectorXd& v, double mu) const {
    return chol.half_solve((v.array() - mu).matrix()).squaredNorm();
}

CorrCache make_corr_cache(const MixtureProblem& problem, double gamma) {
    CorrCache cache;
    cache.gamma = gamma;
    cache.corr = corr_from_distances(problem.distances(), gamma);
    cache.chol = chol_psd(cache.corr);
    return cache;
}

VectorXd zeta_probabilities(const MixtureProblem& problem, const MixtureState& state) {
    const auto& y = problem.data().y;
    const VectorXd mean = problem.design() * state.theta;
    const double log_a = std::log(state.alpha);
    const double log_1a = std::log1p(-state.alpha);
    VectorXd prob(problem.n());
    for (Index i = 0; i < problem.n(); ++i) {
        const double l0 = log_normal_pdf(y(i), mean(i), state.lambda);
        const double l1 = log_normal_pdf(y(i), mean(i) + state.delta(i), state.lambda);
        if (l0 == l1) {
            prob(i) = 1.0 - state.alpha;
            continue;
        }
        // P(zeta = 1) = 1 / (1 + exp(a - b))
        const double diff = (log_a + l0) - (log_1a + l1);
        prob(i) = diff > 0.0 ? std::exp(-diff) / (1.0 + std::exp(-diff)) : 1.0 / (1.0 + std::exp(diff));
    }
    return prob;
}

ZetaDraw sample_zeta(const MixtureProblem& problem, const MixtureState& state, Rng& rng) {
    const VectorXd prob = zeta_probabilities(problem, state);
    ZetaDraw draw;
    draw.zeta.resize(static_cast<std::size_t>(problem.n()));
    for (Index i = 0; i < problem.n(); ++i) {
        const bool one = rng.uniform() < prob(i);
        draw.zeta[static_cast<std::size_t>(i)] = one ? 1 : 0;
        draw.m += one ? 1 : 0;
    }
    return draw;
}

VectorXd sample_delta(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr, Rng& rng) {
    const Index n = problem.n();
    const double mu = problem.priors().mu_delta;
    const double sigma = state.lambda / std::sqrt(state.k);

    const VectorXd z = rng.normal_vector(n);
    VectorXd delta = corr.chol.L.triangularView<Eigen::Lower>() * z;
    delta = (sigma * delta).array() + mu;
    const auto sites = allocated_sites(state.zeta);
    const auto m = static_cast<Index>(sites.size());
    if (m == 0) return delta;

    // Observation block divided by sigma^2: Corr_mm + k I.
    MatrixXd obs(m, m);
    MatrixXd cross(n, m);
    VectorXd mismatch(m);
    for (Index l = 0; l < m; ++l) {
        const Index i = sites[static_cast<std::size_t>(l)];
        cross.col(l) = corr.corr.col(i);
        for (Index q = 0; q < m; ++q) obs(l, q) = corr.corr(i, sites[static_cast<std::size_t>(q)]);
        const double residual = problem.data().y(i) - problem.design().row(i).dot(state.theta);
        mismatch(l) = residual - delta(i) - state.lambda * rng.normal();
    }
    obs.diagonal().array() += state.k;
    const CholFactor chol = chol_psd(obs);
    delta.noalias() += cross * chol.solve(mismatch);
    return delta;
}

GpConditional delta_conditional(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr) {
    const auto sites = allocated_sites(state.zeta);
    const auto m = static_cast<Index>(sites.size());
    const double sigma2 = state.lambda * state.lambda / state.k;
    VectorXd y_m(m), code_m(m);
    for (Index l = 0; l < m; ++l) {
        const Index i = sites[static_cast<std::size_t>(l)];
        y_m(l) = problem.data().y(i);
        code_m(l) = problem.design().row(i).dot(state.theta);
    }
    const VectorXd noise = VectorXd::Constant(m, state.lambda * state.lambda);
    return gp_conditional(problem.priors().mu_delta, sigma2 * corr.corr, sites, noise, y_m, code_m);
}

GaussianConditional theta_conditional(const MixtureProblem& problem, const MixtureState& state) {
    VectorXd target = problem.data().y;
    for (Index i = 0; i < problem.n(); ++i) {
        if (state.zeta[static_cast<std::size_t>(i)]) target(i) -= state.delta(i);
    }
    GaussianConditional out;
    out.mean = problem.gram_solve(problem.design().transpose() * target);
    const MatrixXd& L = problem.gram_factor();
    const MatrixXd Linv = L.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(problem.p(), problem.p()));
    out.cov = state.lambda * state.lambda * (Linv.transpose() * Linv);
    return out;
}

VectorXd sample_theta(const MixtureProblem& problem, const MixtureState& state, Rng& rng) {
    VectorXd target = problem.data().y;
    for (Index i = 0; i < problem.n(); ++i) {
        if (state.zeta[static_cast<std::size_t>(i)]) target(i) -= state.delta(i);
    }
    const VectorXd mean = problem.gram_solve(problem.design().transpose() * target);
    // cov = lambda^2 (L L^T)^{-1}, so lambda L^{-T} z has the right spread.
    VectorXd z = rng.normal_vector(problem.p());
    problem.gram_factor().transpose().triangularView<Eigen::Upper>().solveInPlace(z);
    return mean + state.lambda * z;
}

InverseGammaParams lambda_conditional(const MixtureProblem& problem, const MixtureState& state,
                                      const CorrCache& corr) {
    const VectorXd fitted = problem.design() * state.theta;
    double rss = 0.0;
    for (Index i = 0; i < problem.n(); ++i) {
        double r = problem.data().y(i) - fitted(i);
        if (state.zeta[static_cast<std::size_t>(i)]) r -= state.delta(i);
        rss += r * r;
    }
    const double quad = corr.quad_form(state.delta, problem.priors().mu_delta);
    InverseGammaParams ig;
    ig.shape = static_cast<double>(problem.n());
    ig.rate = 0.5 * (rss + state.k * quad);
    if (!(ig.rate > 0.0) || !std::isfinite(ig.rate)) {
        throw NumericalError("lambda conditional has a nonpositive rate (" + std::to_string(ig.rate) + ")");
    }
    return ig;
}

double sample_lambda(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr, Rng& rng) {
    const InverseGammaParams ig = lambda_conditional(problem, state, corr);
    const double lambda2 = ig.rate / rng.gamma(ig.shape);
    return std::sqrt(lambda2);
}

double sample_alpha(Index n, int m, double a0, Rng& rng) {
    if (m < 0 || m > n) throw InvalidArgument("sample_alpha: m outside [0, n]");
    return rng.beta(static_cast<double>(n - m) + a0, static_cast<double>(m) + a0);
}

double log_conditional_k(double k, double quad, Index n, double lambda, const BetaShape& prior) {
    if (!(k > 0.0 && k < 1.0)) return -std::numeric_limits<double>::infinity();
    return 0.5 * static_cast<double>(n) * std::log(k) - 0.5 * k * quad / (lambda * lambda) + prior.log_pdf(k);
}

double log_accept_ratio_k(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr,
                          double k_prop) {
    if (!(k_prop > 0.0 && k_prop < 1.0)) return -std::numeric_limits<double>::infinity();
    if (k_prop == state.k) return 0.0;
    const double quad = corr.quad_form(state.delta, problem.priors().mu_delta);
    const auto& prior = problem.priors().k_prior;
    const double cur = log_conditional_k(state.k, quad, problem.n(), state.lambda, prior) + std::log(state.k) +
                       std::log1p(-state.k);
    const double prop = log_conditional_k(k_prop, quad, problem.n(), state.lambda, prior) + std::log(k_prop) +
                        std::log1p(-k_prop);
    return prop - cur;
}

MhResult mh_step_k(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr, double scale,
                   Rng& rng) {
    const double step = scale * rng.normal();
    const double k_prop = step == 0.0 ? state.k : expit(logit(state.k) + step);
    const double log_ratio = log_accept_ratio_k(problem, state, corr, k_prop);
    if (std::log(rng.uniform()) < log_ratio) return {k_prop, true};
    return {state.k, false};
}

double log_conditional_gamma(const MixtureProblem& problem, const MixtureState& state, const CorrCache& corr) {
    const double quad = corr.quad_form(state.delta, problem.priors().mu_delta);
    return -0.5 * corr.log_det() - 0.5 * state.k * quad / (state.lambda * state.lambda) +
           problem.priors().gamma_prior.log_pdf(corr.gamma);
}

double log_accept_ratio_gamma(const MixtureProblem& problem, const MixtureState& state, const CorrCache& current,
                              const CorrCache& proposal) {
    const double g0 = current.gamma;
    const double g1 = proposal.gamma;
    if (!(g1 > 0.0 && g1 < 1.0)) return -std::numeric_limits<double>::infinity();
    if (g1 == g0) return 0.0;
    const double cur = log_conditional_gamma(problem, state, current) + std::log(g0) + std::log1p(-g0);
    const double prop = log_conditional_gamma(problem, state, proposal) + std::log(g1) + std::log1p(-g1);
    return prop - cur;
}

MhResult mh_step_gamma(const MixtureProblem& problem, const MixtureState& state, CorrCache& corr, double scale,
                       Rng& rng) {
    const double step = scale * rng.normal();
    if (step == 0.0) {
        rng.uniform();  // keep the stream aligned with a real proposal
        return {corr.gamma, true};
    }
    const double g_prop = expit(logit(corr.gamma) + step);
    if (!(g_prop > 0.0 && g_prop < 1.0)) {
        rng.uniform();
        return {corr.gamma, false};
    }
    CorrCache proposal;
    try {
        proposal = make_corr_cache(problem, g_prop);
    } catch (const SingularMatrix&) {
        // the proposed correlation cannot be factored; its density is undefined
        rng.uniform();
        return {corr.gamma, false};
    }
    const double log_ratio = log_accept_ratio_gamma(problem, state, corr, proposal);
    if (std::log(rng.uniform()) < log_ratio) {
        corr = std::move(proposal);
        return {g_prop, true};
    }
    return {corr.gamma, false};
}

double adapt_scale(double current_scale, double accept_rate, double target, long iteration) {
    if (iteration < 1) throw InvalidArgument("adapt_scale: iteration must be positive");
    const double step = (accept_rate - target) / std::pow(static_cast<double>(iteration), 0.6);
    return current_scale * std::exp(step);
}

MixtureState initial_state(const MixtureProblem& problem, const McmcConfig& config, Rng& rng) {
    const Index n = problem.n();
    const Index p = problem.p();
    const auto& priors = problem.priors();
    MixtureState s;
    s.theta = problem.ols();
    const double rss = (problem.data().y - problem.design() * s.theta).squaredNorm();
    const double dof = static_cast<double>(std::max<Index>(1, n - p));
    s.lambda = std::max(1e-6, std::sqrt(rss / dof));
    s.alpha = 0.5;
    s.k = priors.k_prior.mean();
    s.gamma = priors.gamma_prior.mean();
    s.delta = VectorXd::Zero(n);
    s.zeta.assign(static_cast<std::size_t>(n), 0);
    if (config.random_init) {
        auto clamp_open = [](double v) { return std::min(1.0 - 1e-6, std::max(1e-6, v)); };
        s.alpha = rng.beta(priors.a0, priors.a0);
        s.k = clamp_open(rng.beta(priors.k_prior.a, priors.k_prior.b));
        s.gamma = clamp_open(rng.beta(priors.gamma_prior.a, priors.gamma_prior.b));
        s.lambda *= std::exp(0.5 * rng.normal());
        VectorXd z = rng.normal_vector(p);
        problem.gram_factor().transpose().triangularView<Eigen::Upper>().solveInPlace(z);
        s.theta += s.lambda * z;
        for (auto& z_i : s.zeta) z_i = rng.bernoulli(0.5) ? 1 : 0;
    }
    return s;
}

SweepStats gibbs_sweep(const MixtureProblem& problem, MixtureState& state, CorrCache& corr, double scale_k,
                       double scale_gamma, Rng& rng) {
    SweepStats stats;
    ZetaDraw z = sample_zeta(problem, state, rng);
    state.zeta = std::move(z.zeta);
    state.delta = sample_delta(problem, state, corr, rng);
    state.theta = sample_theta(problem, state, rng);
    state.lambda = sample_lambda(problem, state, corr, rng);
    state.alpha = sample_alpha(problem.n(), z.m, problem.priors().a0, rng);
    const MhResult k = mh_step_k(problem, state, corr, scale_k, rng);
    state.k = k.value;
    stats.accepted_k = k.accepted;
    const MhResult g = mh_step_gamma(problem, state, corr, scale_gamma, rng);
    state.gamma = g.value;
    stats.accepted_gamma = g.accepted;
    return stats;
}

PosteriorDraws run_chain(const MixtureProblem& problem, const McmcConfig& config) {
    config.validate();
    Rng rng(config.seed);
    MixtureState state = initial_state(problem, config, rng);
    CorrCache corr = make_corr_cache(problem, state.gamma);

    PosteriorDraws draws;
    const long saved = (config.iters - config.burn_in) / config.thin;
    draws.states.reserve(static_cast<std::size_t>(saved));
    draws.iterations.reserve(static_cast<std::size_t>(saved));
    draws.m_trace.reserve(static_cast<std::size_t>(config.iters));

    double scale_k = config.initial_scale_k;
    double scale_gamma = config.initial_scale_gamma;
    long window_k = 0, window_gamma = 0, batch = 0;
    long post_k = 0, post_gamma = 0;

    for (long t = 1; t <= config.iters; ++t) {
        SweepStats stats;
        try {
            stats = gibbs_sweep(problem, state, corr, scale_k, scale_gamma, rng);
        } catch (const std::exception&) {
            rethrow_at(t);
        }
        draws.m_trace.push_back(state.m());

        if (t <= config.burn_in) {
            window_k += stats.accepted_k;
            window_gamma += stats.accepted_gamma;
            if (t % config.adapt_window == 0) {
                ++batch;
                const double w = static_cast<double>(config.adapt_window);
                scale_k = adapt_scale(scale_k, window_k / w, config.target_accept, batch);
                scale_gamma = adapt_scale(scale_gamma, window_gamma / w, config.target_accept, batch);
                window_k = window_gamma = 0;
            }
            continue;
        }
        post_k += stats.accepted_k;
        post_gamma += stats.accepted_gamma;
        if ((t - config.burn_in) % config.thin == 0) {
            draws.iterations.push_back(t);
            draws.states.push_back(state);
        }
    }
    const double post = static_cast<double>(config.iters - config.burn_in);
    draws.accept_k = post_k / post;
    draws.accept_gamma = post_gamma / post;
    draws.scale_k = scale_k;
    draws.scale_gamma = scale_gamma;
    return draws;
}

PosteriorDraws run_chain(const Dataset& data, const LinearCode& code, const PriorConfig& priors,
                         const McmcConfig& config) {
    return run_chain(MixtureProblem(data, code, priors), config);
}

}  // namespace mixval
