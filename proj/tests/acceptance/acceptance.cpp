// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line; the
// process exits nonzero when any criterion fails. Criteria can be selected by
// number on the command line (default: all).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "mixval/blackbox.hpp"
#include "mixval/cli.hpp"
#include "mixval/errors.hpp"
#include "mixval/gp.hpp"
#include "mixval/harness.hpp"
#include "mixval/io.hpp"
#include "mixval/linearize.hpp"
#include "mixval/oracle.hpp"
#include "mixval/report.hpp"
#include "mixval/sampler.hpp"
#include "testing.hpp"

using namespace mixval;
namespace fs = std::filesystem;
using testing_support::sample_mean;
using testing_support::sample_var;

namespace {

// Pinned tolerances and sizes.
constexpr double kFig1AlphaThreshold = 0.8;
constexpr int kFig1MinReplicates = 45;
constexpr double kFig1LambdaLo = 0.08, kFig1LambdaHi = 0.12;
constexpr double kFig2AlphaMedianMax = 0.2;
constexpr double kFig2LambdaMedianMin = 0.12;
constexpr double kThetaSdBand = 3.0;
constexpr double kFig3AlphaMedianMax = 0.1;
constexpr int kFig3MinN = 30;
constexpr int kFig3AllowedInversions = 1;
constexpr double kFig4RmseRatio = 0.75;
constexpr double kOracleAlphaTolerance = 0.03;
constexpr double kOracleRefinementTolerance = 5e-3;
constexpr long kOracleChainIters = 100000;
constexpr int kFuzzDatasets = 100;
constexpr long kMomentDraws = 100000;
constexpr double kMomentSe = 3.0;
constexpr double kMhTolerance = 1e-10;
constexpr double kGewekeMinP = 0.01;
constexpr double kAffineJacobianTolerance = 1e-10;
constexpr double kSmoothJacobianTolerance = 1e-4;
constexpr double kOlsTolerance = 1e-4;
constexpr double kBiasGapMin = 0.15;
constexpr int kBiasSeeds = 10;

const VectorXd kTheta = (VectorXd(3) << 4.0, 1.0, 2.0).finished();

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.5);
}

/// Largest |theta_mean - theta*| / theta_sd over the three components.
double theta_z(const ReplicateRow& r) {
    double z = 0.0;
    for (Index j = 0; j < 3; ++j) z = std::max(z, std::abs(r.theta_mean(j) - kTheta(j)) / r.theta_sd(j));
    return z;
}

std::map<double, std::vector<const ReplicateRow*>> by_gamma(const ScenarioResult& r) {
    std::map<double, std::vector<const ReplicateRow*>> out;
    for (const auto& row : r.rows) {
        if (row.ok) out[row.gamma_star].push_back(&row);
    }
    return out;
}

// ---------------------------------------------------------------- 1
Outcome fig1() {
    const auto res = run_scenario(scenario_defaults("fig1"), 1);
    int alpha_high = 0, joint = 0;
    std::vector<double> lambdas, alphas;
    for (const auto& r : res.rows) {
        if (!r.ok) continue;
        const bool high = r.alpha_mean > kFig1AlphaThreshold;
        alpha_high += high;
        joint += high && theta_z(r) <= kThetaSdBand;
        lambdas.push_back(r.lambda_mean);
        alphas.push_back(r.alpha_mean);
    }
    const double lam = median(lambdas);
    Outcome o;
    o.pass = joint >= kFig1MinReplicates && lam >= kFig1LambdaLo && lam <= kFig1LambdaHi;
    o.detail = std::to_string(alpha_high) + "/" + std::to_string(res.rows.size()) + " replicates with E[alpha|Y] > " +
               fmt(kFig1AlphaThreshold) + " (" + std::to_string(joint) + " also with theta within 3 sd; need " +
               std::to_string(kFig1MinReplicates) + "), median E[alpha|Y] " + fmt(median(alphas)) +
               ", median E[lambda|Y] " + fmt(lam);
    return o;
}

// ---------------------------------------------------------------- 2 and 10
ScenarioResult g_fig2_serial;
bool g_have_fig2 = false;

const ScenarioResult& fig2_serial() {
    if (!g_have_fig2) {
        g_fig2_serial = run_scenario(scenario_defaults("fig2"), 1);
        g_have_fig2 = true;
    }
    return g_fig2_serial;
}

Outcome fig2() {
    const auto groups = by_gamma(fig2_serial());
    Outcome o{true, ""};
    std::ostringstream d;
    for (const auto& [g, rows] : groups) {
        std::vector<double> a, l, z;
        for (const auto* r : rows) {
            a.push_back(r->alpha_mean);
            l.push_back(r->lambda_mean);
            z.push_back(theta_z(*r));
        }
        const double ma = median(a), ml = median(l), mz = median(z);
        bool ok = mz <= kThetaSdBand;
        if (g >= 0.1 - 1e-12) ok = ok && ma < kFig2AlphaMedianMax;
        if (std::abs(g - 0.01) < 1e-12) ok = ok && ml > kFig2LambdaMedianMin;
        o.pass = o.pass && ok;
        d << "g*=" << fmt(g) << ": alpha " << fmt(ma) << " lambda " << fmt(ml) << " theta-z " << fmt(mz)
          << (ok ? "" : " [x]") << "; ";
    }
    o.detail = d.str();
    return o;
}

// ---------------------------------------------------------------- 3
Outcome fig3() {
    const auto res = run_scenario(scenario_defaults("fig3"), 1);
    std::map<int, std::vector<double>> alpha_by_n;
    for (const auto& r : res.rows) {
        if (r.ok) alpha_by_n[r.n].push_back(r.alpha_mean);
    }
    std::vector<std::pair<int, double>> med;
    for (const auto& [n, a] : alpha_by_n) med.emplace_back(n, median(a));
    bool low = true;
    int inversions = 0;
    std::ostringstream d;
    for (std::size_t i = 0; i < med.size(); ++i) {
        if (med[i].first >= kFig3MinN && !(med[i].second < kFig3AlphaMedianMax)) low = false;
        if (i > 0 && med[i].second > med[i - 1].second) ++inversions;
        d << med[i].first << ":" << fmt(med[i].second) << " ";
    }
    Outcome o;
    o.pass = low && inversions <= kFig3AllowedInversions;
    o.detail = "median E[alpha|Y] by n: " + d.str() + "(" + std::to_string(inversions) + " increases)";
    return o;
}

// ---------------------------------------------------------------- 4
Outcome fig4() {
    Scenario s = scenario_defaults("fig4");
    s.gamma_stars = {0.3};
    const auto res = run_scenario(s, 1);
    const auto& r = res.rows.at(0);
    Outcome o;
    o.pass = r.ok && r.rmse_corrected <= kFig4RmseRatio * r.rmse_pure;
    o.detail = "n=100, gamma*=0.3: RMSE corrected " + fmt(r.rmse_corrected) + " vs pure " + fmt(r.rmse_pure) +
               " (ratio " + fmt(r.rmse_corrected / r.rmse_pure) + ", need <= " + fmt(kFig4RmseRatio) + ")";
    return o;
}

// ---------------------------------------------------------------- 5
Outcome oracle_equivalence() {
    const LinearCode code = LinearCode::polynomial({2});
    const PriorConfig priors;
    const MatrixXd X = unit_grid(8);
    Outcome o{true, ""};
    std::ostringstream d;
    double worst = 0.0, worst_ref = 0.0;
    for (int i = 0; i < 10; ++i) {
        const std::uint64_t seed = derive_seed(0xACCE55, static_cast<std::uint64_t>(i));
        const VectorXd y = i < 5 ? simulate_m0(code, kTheta, 0.1, X, seed)
                                 : simulate_m1(code, kTheta, 0.1, 0.1, 0.3, X, seed).y;
        const Dataset data{X, y};
        const auto rep = run_oracle(data, code, priors, 32, 1, 1.0);
        McmcConfig cfg;
        cfg.iters = kOracleChainIters;
        cfg.burn_in = 1000;
        cfg.seed = derive_seed(seed, 1);
        const auto draws = run_chain(data, code, priors, cfg);
        std::vector<double> a;
        for (const auto& st : draws.states) a.push_back(st.alpha);
        const double diff = std::abs(sample_mean(a) - rep.fine.alpha_mean);
        worst = std::max(worst, diff);
        worst_ref = std::max(worst_ref, rep.relative_change);
        if (diff > kOracleAlphaTolerance || rep.relative_change >= kOracleRefinementTolerance) o.pass = false;
        d << (i < 5 ? "m0 " : "m1 ") << fmt(rep.fine.alpha_mean) << "/" << fmt(sample_mean(a)) << "; ";
    }
    o.detail = "max |E_mcmc - E_exact| " + fmt(worst) + ", max grid-doubling change " + fmt(100 * worst_ref) +
               "% (exact/mcmc: " + d.str() + ")";
    return o;
}

// ---------------------------------------------------------------- 6
Outcome propriety() {
    Rng rng(0x7E0);
    const PriorConfig priors;
    const auto grid = make_quadrature_grid(priors, 16);
    int finite = 0;
    for (int t = 0; t < kFuzzDatasets; ++t) {
        const int deg = 1 + static_cast<int>(rng.uniform() * 2);
        const int p = deg + 1;
        const Index n = p + 1 + static_cast<Index>(rng.uniform() * (10 - p));
        std::set<double> xs;
        while (static_cast<Index>(xs.size()) < n) xs.insert(std::round(rng.uniform() * 1e6) / 1e6);
        MatrixXd X(n, 1);
        Index i = 0;
        for (double x : xs) X(i++, 0) = x;
        const VectorXd y = std::exp(2 * rng.normal()) * rng.normal_vector(n) + rng.normal() * VectorXd::Ones(n);
        try {
            const auto r = evaluate_oracle(Dataset{X, y}, LinearCode::polynomial({deg}), priors, grid);
            finite += std::isfinite(r.log_marginal) && std::isfinite(r.alpha_mean);
        } catch (const std::exception&) {
        }
    }
    bool divergent = false;
    std::string msg;
    try {
        MatrixXd G(6, 2);
        G.col(0) = VectorXd::Ones(6);
        G.col(1) = VectorXd::Constant(6, 3.0);
        evaluate_oracle(Dataset{unit_grid(6), VectorXd::LinSpaced(6, 0.0, 1.0)}, LinearCode::tabulated(G), priors,
                        grid);
    } catch (const DivergentIntegral& e) {
        divergent = true;
        msg = e.what();
    } catch (const std::exception&) {
    }
    Outcome o;
    o.pass = finite == kFuzzDatasets && divergent;
    o.detail = std::to_string(finite) + "/" + std::to_string(kFuzzDatasets) +
               " fuzzed datasets with finite log marginal; rank-deficient design: " +
               (divergent ? "divergent-integral error (" + msg + ")" : "no divergent-integral error");
    return o;
}

// ---------------------------------------------------------------- 7
MixtureProblem conditional_problem(Index n, std::uint64_t seed) {
    const LinearCode code = LinearCode::polynomial({2});
    const MatrixXd X = unit_grid(n);
    return MixtureProblem(Dataset{X, simulate_m1(code, kTheta, 0.1, 0.1, 0.3, X, seed).y}, code, PriorConfig{});
}

MixtureState conditional_state(const MixtureProblem& pr, std::uint64_t seed) {
    Rng rng(seed);
    MixtureState s;
    s.theta = pr.ols();
    s.lambda = 0.12;
    s.alpha = 0.4;
    s.k = 0.2;
    s.gamma = 0.3;
    s.delta = 0.2 * rng.normal_vector(pr.n());
    s.zeta.resize(static_cast<std::size_t>(pr.n()));
    for (auto& z : s.zeta) z = rng.bernoulli(0.5) ? 1 : 0;
    return s;
}

/// Sample mean and variance within kMomentSe standard errors of the targets.
/// The variance standard error uses the fourth central moment of the draws.
bool moments_ok(const std::vector<double>& v, double mean, double var, std::string& worst, double& worst_z) {
    const double n = static_cast<double>(v.size());
    const double m = sample_mean(v), s2 = sample_var(v);
    double m4 = 0.0;
    for (double x : v) m4 += std::pow(x - m, 4);
    m4 /= n;
    const double z_mean = std::abs(m - mean) / std::sqrt(var / n);
    const double z_var = std::abs(s2 - var) / std::sqrt(std::max(m4 - s2 * s2, 1e-300) / n);
    const double z = std::max(z_mean, z_var);
    if (z > worst_z) {
        worst_z = z;
        worst = "mean " + fmt(m) + " vs " + fmt(mean) + ", var " + fmt(s2) + " vs " + fmt(var);
    }
    return z <= kMomentSe;
}

double dense_log_joint(const MixtureProblem& pr, const MixtureState& s) {
    const MatrixXd S = (s.lambda * s.lambda / s.k) * corr_matrix(pr.data().X, s.gamma).M;
    const auto lu = S.fullPivLu();
    double lp = -0.5 * static_cast<double>(pr.n()) * std::log(2 * std::numbers::pi) - 0.5 * std::log(lu.determinant()) -
                0.5 * s.delta.dot(lu.inverse() * s.delta);
    for (Index i = 0; i < pr.n(); ++i) {
        const VectorXd g = pr.design().row(i).transpose();
        lp += s.zeta[static_cast<std::size_t>(i)] ? log_lik_m1(pr.data().y(i), g, s.delta(i), s.theta, s.lambda)
                                                   : log_lik_m0(pr.data().y(i), g, s.theta, s.lambda);
    }
    return lp + pr.priors().k_prior.log_pdf(s.k) + pr.priors().gamma_prior.log_pdf(s.gamma);
}

double geweke_min_p(std::uint64_t seed) {
    const LinearCode code = LinearCode::polynomial({1});
    const Index n = 5;
    const MatrixXd X = unit_grid(n);
    const VectorXd theta = (VectorXd(2) << 1.0, -0.5).finished();
    const double lambda = 0.3;
    const PriorConfig priors{0.5, {2.0, 2.0}, {2.0, 2.0}, 0.0};
    const MatrixXd G = code.design(X);
    Rng rng(seed);
    auto draw_prior = [&] {
        MixtureState s;
        s.theta = theta;
        s.lambda = lambda;
        s.alpha = rng.beta(priors.a0, priors.a0);
        s.k = rng.beta(2.0, 2.0);
        s.gamma = rng.beta(2.0, 2.0);
        s.zeta.resize(n);
        for (auto& z : s.zeta) z = rng.bernoulli(1 - s.alpha) ? 1 : 0;
        s.delta = sample_mvn(VectorXd::Zero(n), chol_psd((lambda * lambda / s.k) * corr_matrix(X, s.gamma).M), rng);
        return s;
    };
    std::vector<std::vector<double>> marg(5), succ(5);
    auto record = [](std::vector<std::vector<double>>& into, const MixtureState& s) {
        into[0].push_back(s.k);
        into[1].push_back(s.gamma);
        into[2].push_back(s.alpha);
        into[3].push_back(s.delta(2));
        into[4].push_back(s.delta(0));
    };
    for (int t = 0; t < 3000; ++t) record(marg, draw_prior());
    MixtureState s = draw_prior();
    for (int t = 0; t < 60000; ++t) {
        VectorXd y = G * theta;
        for (Index i = 0; i < n; ++i) {
            if (s.zeta[static_cast<std::size_t>(i)]) y(i) += s.delta(i);
            y(i) += lambda * rng.normal();
        }
        const MixtureProblem pr(Dataset{X, y}, code, priors);
        CorrCache corr = make_corr_cache(pr, s.gamma);
        const auto z = sample_zeta(pr, s, rng);
        s.zeta = z.zeta;
        s.delta = sample_delta(pr, s, corr, rng);
        s.alpha = sample_alpha(n, z.m, priors.a0, rng);
        s.k = mh_step_k(pr, s, corr, 1.2, rng).value;
        s.gamma = mh_step_gamma(pr, s, corr, 1.2, rng).value;
        if (t % 20 == 19) record(succ, s);
    }
    double p = 1.0;
    for (std::size_t j = 0; j < marg.size(); ++j) p = std::min(p, testing_support::ks_two_sample_p(marg[j], succ[j]));
    return p;
}

Outcome conditionals() {
    bool moments = true;
    std::string worst;
    double worst_z = 0.0;
    {
        const auto pr = conditional_problem(15, 11);
        const auto s = conditional_state(pr, 12);
        const auto c = theta_conditional(pr, s);
        Rng rng(13);
        std::vector<std::vector<double>> th(3);
        for (long t = 0; t < kMomentDraws; ++t) {
            const VectorXd v = sample_theta(pr, s, rng);
            for (int j = 0; j < 3; ++j) th[j].push_back(v(j));
        }
        for (int j = 0; j < 3; ++j) moments &= moments_ok(th[j], c.mean(j), c.cov(j, j), worst, worst_z);
    }
    {
        const auto pr = conditional_problem(10, 14);
        const auto s = conditional_state(pr, 15);
        const CorrCache corr = make_corr_cache(pr, s.gamma);
        const auto ig = lambda_conditional(pr, s, corr);
        Rng rng(16);
        std::vector<double> l2;
        for (long t = 0; t < kMomentDraws; ++t) {
            const double l = sample_lambda(pr, s, corr, rng);
            l2.push_back(l * l);
        }
        const double mean = ig.rate / (ig.shape - 1);
        moments &= moments_ok(l2, mean, mean * mean / (ig.shape - 2), worst, worst_z);
    }
    {
        Rng rng(17);
        std::vector<double> a;
        for (long t = 0; t < kMomentDraws; ++t) a.push_back(sample_alpha(30, 12, 0.5, rng));
        const double A = 18.5, B = 12.5;
        moments &= moments_ok(a, A / (A + B), A * B / ((A + B) * (A + B) * (A + B + 1)), worst, worst_z);
    }
    {
        const auto pr = conditional_problem(8, 8);
        const auto s = conditional_state(pr, 9);
        const CorrCache corr = make_corr_cache(pr, s.gamma);
        const auto ex = delta_conditional(pr, s, corr);
        Rng rng(10);
        std::vector<std::vector<double>> dl(8);
        for (long t = 0; t < kMomentDraws; ++t) {
            const VectorXd v = sample_delta(pr, s, corr, rng);
            for (int j = 0; j < 8; ++j) dl[j].push_back(v(j));
        }
        for (int j = 0; j < 8; ++j) moments &= moments_ok(dl[j], ex.mean(j), ex.cov(j, j), worst, worst_z);
    }

    double mh_err = 0.0;
    {
        const auto pr = conditional_problem(12, 18);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto s = conditional_state(pr, 100 + seed);
            const CorrCache corr = make_corr_cache(pr, s.gamma);
            const double base = dense_log_joint(pr, s);
            for (double kp : {0.01, 0.15, 0.5, 0.93}) {
                MixtureState q = s;
                q.k = kp;
                const double dense =
                    dense_log_joint(pr, q) + std::log(kp * (1 - kp)) - base - std::log(s.k * (1 - s.k));
                const double got = log_accept_ratio_k(pr, s, corr, kp);
                mh_err = std::max(mh_err, std::abs(got - dense) / std::max(1.0, std::abs(dense)));
            }
            for (double gp : {0.02, 0.25, 0.6, 0.97}) {
                MixtureState q = s;
                q.gamma = gp;
                const double dense =
                    dense_log_joint(pr, q) + std::log(gp * (1 - gp)) - base - std::log(s.gamma * (1 - s.gamma));
                const double got = log_accept_ratio_gamma(pr, s, corr, make_corr_cache(pr, gp));
                mh_err = std::max(mh_err, std::abs(got - dense) / std::max(1.0, std::abs(dense)));
            }
        }
    }

    std::vector<double> ps;
    for (std::uint64_t seed : {31u, 32u, 33u}) ps.push_back(geweke_min_p(seed));
    const bool geweke = *std::min_element(ps.begin(), ps.end()) > kGewekeMinP;

    Outcome o;
    o.pass = moments && mh_err <= kMhTolerance && geweke;
    o.detail = "moments " + std::string(moments ? "ok" : "FAIL") + " (largest deviation " + fmt(worst_z) + " se: " +
               worst + "); MH ratio error " + fmt(mh_err) + "; successive-conditional min KS p " + fmt(ps[0]) + ", " +
               fmt(ps[1]) + ", " + fmt(ps[2]);
    return o;
}

// ---------------------------------------------------------------- 8
Outcome linearization() {
    const MatrixXd A = (MatrixXd(5, 3) << 1.0, 0.5, -0.2, 0.3, 2.0, 0.1, -0.4, 0.2, 1.5, 0.8, -0.6, 0.3, 0.2, 0.9, -1.1)
                           .finished();
    FunctionBlackBox affine([&](const VectorXd& K) -> VectorXd { return VectorXd::Constant(5, 2.0) + A * K; });
    const Box box3{VectorXd::Zero(3), VectorXd::Ones(3)};
    double affine_err = 0.0;
    for (const VectorXd& K : {VectorXd((VectorXd(3) << 0.3, 0.6, 0.5).finished()), VectorXd(VectorXd::Zero(3)),
                              VectorXd(VectorXd::Ones(3))}) {
        affine_err = std::max(affine_err, (finite_diff_jacobian(affine, K, box3, default_steps(box3)) - A).cwiseAbs().maxCoeff());
    }

    auto smooth = [](const VectorXd& K) -> VectorXd {
        VectorXd out(4);
        for (Index s = 0; s < 4; ++s) {
            const double x = 0.5 + s;
            out(s) = std::sin(K(0) * x) * std::exp(K(1)) + K(0) * K(1) * x * x;
        }
        return out;
    };
    auto jac = [](const VectorXd& K) {
        MatrixXd J(4, 2);
        for (Index s = 0; s < 4; ++s) {
            const double x = 0.5 + s;
            J(s, 0) = x * std::cos(K(0) * x) * std::exp(K(1)) + K(1) * x * x;
            J(s, 1) = std::sin(K(0) * x) * std::exp(K(1)) + K(0) * x * x;
        }
        return J;
    };
    FunctionBlackBox sbb(smooth);
    const Box box2{VectorXd::Zero(2), VectorXd::Ones(2)};
    const VectorXd K = (VectorXd(2) << 0.4, 0.7).finished();
    const MatrixXd exact = jac(K);
    const double rel = ((finite_diff_jacobian(sbb, K, box2, default_steps(box2)) - exact).array() / exact.array().abs())
                           .abs()
                           .maxCoeff();
    const VectorXd h = VectorXd::Constant(2, 0.02);
    const double e1 = (finite_diff_jacobian(sbb, K, box2, h) - exact).cwiseAbs().maxCoeff();
    const double e2 = (finite_diff_jacobian(sbb, K, box2, h / 2) - exact).cwiseAbs().maxCoeff();
    const double ratio = e1 / e2;

    const VectorXd star = (VectorXd(2) << 0.3, 0.7).finished();
    auto bowl = [](const VectorXd& Q) -> VectorXd {
        return (VectorXd(3) << Q(0) * Q(0), Q(1) * Q(1), Q(0) * Q(1)).finished();
    };
    FunctionBlackBox quad(bowl);
    const double ols_err = (ols_reference(quad, box2, bowl(star)).K_hat - star).cwiseAbs().maxCoeff();

    Outcome o;
    o.pass = affine_err <= kAffineJacobianTolerance && rel < kSmoothJacobianTolerance && ratio > 3.5 && ratio < 4.5 &&
             ols_err <= kOlsTolerance;
    o.detail = "affine Jacobian error " + fmt(affine_err) + "; smooth relative error " + fmt(rel) +
               "; error ratio on halving h " + fmt(ratio) + "; OLS argmin error " + fmt(ols_err);
    return o;
}

// ---------------------------------------------------------------- 9
Outcome bias_detection() {
    const LinearCode code = LinearCode::polynomial({2});
    const Index n = 50;
    const MatrixXd X = unit_grid(n);
    PriorConfig priors;
    priors.k_prior = {2.0, 18.0};
    std::vector<double> gaps;
    for (int s = 0; s < kBiasSeeds; ++s) {
        const std::uint64_t seed = derive_seed(0xB1A5, static_cast<std::uint64_t>(s));
        // biased observations drawn independently, as the mixture itself allocates them
        std::vector<std::uint8_t> biased(static_cast<std::size_t>(n), 0);
        Rng pick(derive_seed(seed, 2));
        for (auto& b : biased) b = pick.bernoulli(0.5) ? 1 : 0;
        const auto sim = simulate_partial_bias(code, kTheta, 0.1, 0.1, 0.3, X, biased, seed);
        const MixtureProblem pr(Dataset{X, sim.y}, code, priors);
        McmcConfig cfg;
        cfg.seed = derive_seed(seed, 1);
        const VectorXd bp = rao_blackwell_bias_prob(run_chain(pr, cfg), pr);
        double on = 0.0, off = 0.0;
        int n_on = 0;
        for (Index i = 0; i < n; ++i) {
            if (biased[static_cast<std::size_t>(i)]) {
                on += bp(i);
                ++n_on;
            } else {
                off += bp(i);
            }
        }
        gaps.push_back(on / n_on - off / static_cast<double>(n - n_on));
    }
    const double gap = sample_mean(gaps);
    Outcome o;
    o.pass = gap >= kBiasGapMin;
    o.detail = "mean Rao-Blackwell probability gap (biased - unbiased) " + fmt(gap) + " over " +
               std::to_string(kBiasSeeds) + " seeds (min " + fmt(*std::min_element(gaps.begin(), gaps.end())) + ")";
    return o;
}

// ---------------------------------------------------------------- 10
Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "mixval_acceptance_replay";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string data = (dir / "sim" / "data.csv").string();
    struct Run {
        std::string name;
        std::vector<std::string> args;
    };
    const std::vector<Run> runs{
        {"sim", {"simulate", "--model", "m1", "--gamma", "0.3", "--n", "10", "--seed", "3"}},
        {"fit", {"fit", "--data", data, "--iters", "3000", "--burn-in", "500", "--seed", "4"}},
        {"oracle", {"oracle", "--data", data, "--crosscheck", "--iters", "30000", "--seed", "5"}},
        {"exp", {"experiment", "--name", "fig4", "--set", "iters=2000", "--set", "burn_in=500"}},
    };
    bool replay_ok = true;
    std::string failed;
    for (const auto& r : runs) {
        auto args = r.args;
        args.push_back("--out-dir");
        args.push_back((dir / r.name).string());
        if (run_cli(args) != 0) {
            replay_ok = false;
            failed += r.name + " (run) ";
            continue;
        }
        const std::string again = (dir / (r.name + "_replay")).string();
        if (run_cli({"replay", "--manifest", (dir / r.name / "manifest.json").string(), "--out-dir", again}) != 0) {
            replay_ok = false;
            failed += r.name + " (replay) ";
        }
        for (const auto& entry : fs::directory_iterator(dir / r.name)) {
            const auto name = entry.path().filename().string();
            if (name == "manifest.json") continue;
            if (read_text_file(entry.path().string()) != read_text_file((fs::path(again) / name).string())) {
                replay_ok = false;
                failed += r.name + "/" + name + " ";
            }
        }
    }

    const auto& serial = fig2_serial();
    const auto parallel = run_scenario(scenario_defaults("fig2"), 8);
    const bool same = aggregate_csv(serial) == aggregate_csv(parallel);
    Outcome o;
    o.pass = replay_ok && same;
    o.detail = std::string("replay of simulate/fit/oracle/experiment ") +
               (replay_ok ? "byte-identical" : "differs: " + failed) + "; fig2 aggregate CSV with 8 workers " +
               (same ? "identical to" : "differs from") + " the serial run";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"fig1 pure-code data: alpha high, theta and lambda recovered", fig1},
        {"fig2 correlation-length grid: alpha low, lambda overestimated at 0.01", fig2},
        {"fig3 sample-size sweep: alpha falls below 0.1 from n = 30", fig3},
        {"fig4 bias-corrected prediction beats the pure code", fig4},
        {"sampler matches the exact enumeration at n = 8", oracle_equivalence},
        {"propriety witness on fuzzed datasets", propriety},
        {"conditional updates, acceptance ratios, joint self-consistency", conditionals},
        {"finite-difference Jacobian and least-squares reference", linearization},
        {"Rao-Blackwell bias probabilities separate biased points", bias_detection},
        {"replay and thread-count determinism", determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    int failures = 0;
    for (std::size_t c = 0; c < criteria.size(); ++c) {
        const int id = static_cast<int>(c) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = criteria[c].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("criterion %2d %s: %s | %s\n", id, o.pass ? "PASS" : "FAIL", criteria[c].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
