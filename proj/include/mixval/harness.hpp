#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mixval/sampler.hpp"

namespace mixval {

enum class Generator { M0, M1 };

/// How the gamma prior is set for each grid point.
enum class GammaPriorMode {
    Fixed,        ///< priors.gamma_prior as given
    Informative,  ///< Beta with mean gamma* and a + b = informative_ess
};

/// A replicated simulation study over a grid of (gamma*, n) points. Every grid
/// point uses the quadratic code g(x) = (1, x, x^2) on x_i = i/n.
struct Scenario {
    std::string name;
    Generator generator = Generator::M0;
    std::vector<int> ns{30};
    std::vector<double> gamma_stars{0.3};  ///< ignored for M0 data
    VectorXd theta_star = (VectorXd(3) << 4.0, 1.0, 2.0).finished();
    double lambda_star = 0.1;
    double k_star = 0.1;
    int replicates = 50;
    PriorConfig priors;
    GammaPriorMode gamma_mode = GammaPriorMode::Fixed;
    double informative_ess = 10.0;
    McmcConfig mcmc;
    std::uint64_t seed = 1;

    void validate() const;
    /// Text that fixes every setting; its hash seeds the replicates.
    std::string canonical() const;
    /// (gamma*, n) pairs in output order.
    std::vector<std::pair<double, int>> grid() const;
};

/// fig1 .. fig4. Throws InvalidArgument for other names.
Scenario scenario_defaults(const std::string& name);

/// Applies flat key=value overrides (replicates, iters, burn_in, seed, n,
/// gamma_star, a0, k_prior, gamma_prior, gamma_prior_mode, informative_ess,
/// thin). Unknown keys throw InvalidArgument.
void apply_overrides(Scenario& s, const std::map<std::string, std::string>& kv);

struct ReplicateRow {
    double gamma_star = 0.0;
    int n = 0;
    int replicate = 0;
    bool ok = false;
    std::string error;
    double alpha_mean = 0.0;
    double lambda_mean = 0.0;
    VectorXd theta_mean, theta_sd;
    double k_mean = 0.0;
    double gamma_mean = 0.0;
    double rmse_pure = 0.0;       ///< posterior-mean pure prediction vs y
    double rmse_corrected = 0.0;  ///< posterior-mean corrected prediction vs y
    double seconds = 0.0;
};

struct ScenarioResult {
    Scenario scenario;
    std::vector<ReplicateRow> rows;  ///< every task, failures included, in grid order
    int failures = 0;
};

/// The seed for replicate r of grid point g: injective in (canonical hash, g, r).
std::uint64_t replicate_seed(const Scenario& s, std::size_t grid_index, int replicate);

/// The dataset replicate r of grid point g would analyze.
Dataset replicate_dataset(const Scenario& s, double gamma_star, int n, std::uint64_t seed);

/// Runs every replicate on `jobs` worker threads. A failed replicate is
/// recorded; the scenario throws ModelError if fewer than 90% succeed.
/// Wall time is recorded only when `timing` is set, so outputs stay reproducible.
ScenarioResult run_scenario(const Scenario& s, int jobs = 1, bool timing = false);

/// scenario,gamma_star,n,replicate,alpha_mean,lambda_mean,theta1..theta3,k_mean,gamma_mean,seconds
/// followed by theta sd, rmse and status columns.
std::string replicates_csv(const ScenarioResult& result);

/// Median and quartiles of the per-replicate posterior means for each grid point.
std::string aggregate_csv(const ScenarioResult& result);

/// y = G theta* + zeta*_i delta*_i + noise, with delta* a GP draw as in simulate_m1
/// and zeta* = `biased` (0/1 per observation).
M1Simulation simulate_partial_bias(const LinearCode& code, const VectorXd& theta_star, double lambda_star,
                                   double k_star, double gamma_star, const MatrixXd& X,
                                   const std::vector<std::uint8_t>& biased, std::uint64_t seed);

}  // namespace mixval
