#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "mixval/sampler.hpp"

namespace mixval {

/// Per observation, the average over saved states of P(zeta_i = 1 | state).
VectorXd rao_blackwell_bias_prob(const PosteriorDraws& draws, const MixtureProblem& problem);

/// Per observation, the fraction of saved states with zeta_i = 1.
VectorXd zeta_frequency(const PosteriorDraws& draws);

struct ParamSummary {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;  ///< n - 1 denominator; 0 for a single draw
    double q025 = 0.0;
    double q50 = 0.0;
    double q975 = 0.0;
};

/// Sample quantile with linear interpolation between order statistics
/// (the default "type 7" definition). `sorted` must be ascending.
double quantile_sorted(const std::vector<double>& sorted, double prob);

ParamSummary summarize(std::string name, std::vector<double> values);

/// theta_1..theta_p, lambda, alpha, k, gamma, m, delta_1..delta_n.
std::vector<ParamSummary> posterior_summaries(const PosteriorDraws& draws);

struct PredictionBand {
    VectorXd mean, lo, hi;  ///< central 95% interval
};

struct Predictions {
    PredictionBand pure;       ///< g(x_i) theta
    PredictionBand corrected;  ///< g(x_i) theta + delta_i 1{zeta_i = 1}, drawwise
};

Predictions predict(const PosteriorDraws& draws, const MixtureProblem& problem);

struct ValidationReport {
    VectorXd bias_prob;
    std::vector<ParamSummary> summaries;
    Predictions predictions;
    ParamSummary alpha_summary;
    double accept_k = 0.0;
    double accept_gamma = 0.0;
    long draws = 0;
};

ValidationReport build_report(const PosteriorDraws& draws, const MixtureProblem& problem);

nlohmann::json report_to_json(const ValidationReport& report);
ValidationReport report_from_json(const nlohmann::json& j);

/// One row per observation:
/// i,x1..xd,y,bias_prob,pred_pure_mean,pred_pure_lo,pred_pure_hi,pred_corr_mean,pred_corr_lo,pred_corr_hi
std::string report_csv(const ValidationReport& report, const Dataset& data);

}  // namespace mixval
