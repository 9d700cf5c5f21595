#include "mixval/report.hpp"

#include <algorithm>
#include <cmath>

#include "mixval/errors.hpp"
#include "mixval/io.hpp"

namespace mixval {

namespace {

void require_draws(const PosteriorDraws& draws) {
    if (draws.empty()) throw InvalidArgument("no saved draws to summarize");
}

PredictionBand band_from_columns(const std::vector<std::vector<double>>& columns) {
    const auto n = static_cast<Index>(columns.size());
    PredictionBand band{VectorXd(n), VectorXd(n), VectorXd(n)};
    for (Index i = 0; i < n; ++i) {
        const ParamSummary s = summarize("", columns[static_cast<std::size_t>(i)]);
        band.mean(i) = s.mean;
        band.lo(i) = s.q025;
        band.hi(i) = s.q975;
    }
    return band;
}

nlohmann::json summary_to_json(const ParamSummary& s) {
    return {{"name", s.name}, {"mean", s.mean}, {"sd", s.sd}, {"q025", s.q025}, {"q50", s.q50}, {"q975", s.q975}};
}

ParamSummary summary_from_json(const nlohmann::json& j) {
    ParamSummary s;
    s.name = j.at("name").get<std::string>();
    s.mean = j.at("mean").get<double>();
    s.sd = j.at("sd").get<double>();
    s.q025 = j.at("q025").get<double>();
    s.q50 = j.at("q50").get<double>();
    s.q975 = j.at("q975").get<double>();
    return s;
}

nlohmann::json vec_to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vec_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

nlohmann::json band_to_json(const PredictionBand& b) {
    return {{"mean", vec_to_json(b.mean)}, {"lo", vec_to_json(b.lo)}, {"hi", vec_to_json(b.hi)}};
}

PredictionBand band_from_json(const nlohmann::json& j) {
    return {vec_from_json(j.at("mean")), vec_from_json(j.at("lo")), vec_from_json(j.at("hi"))};
}

}  // namespace

VectorXd rao_blackwell_bias_prob(const PosteriorDraws& draws, const MixtureProblem& problem) {
    require_draws(draws);
    VectorXd acc = VectorXd::Zero(problem.n());
    for (const auto& state : draws.states) acc += zeta_probabilities(problem, state);
    return acc / static_cast<double>(draws.size());
}

VectorXd zeta_frequency(const PosteriorDraws& draws) {
    require_draws(draws);
    const auto n = static_cast<Index>(draws.states.front().zeta.size());
    VectorXd acc = VectorXd::Zero(n);
    for (const auto& state : draws.states) {
        for (Index i = 0; i < n; ++i) acc(i) += state.zeta[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }
    return acc / static_cast<double>(draws.size());
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
    if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ParamSummary summarize(std::string name, std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("cannot summarize an empty sample");
    ParamSummary s;
    s.name = std::move(name);
    const double count = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= count;
    // a constant column keeps its exact value
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) mean = values.front();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.mean = mean;
    s.sd = values.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
    std::sort(values.begin(), values.end());
    s.q025 = quantile_sorted(values, 0.025);
    s.q50 = quantile_sorted(values, 0.5);
    s.q975 = quantile_sorted(values, 0.975);
    return s;
}

std::vector<ParamSummary> posterior_summaries(const PosteriorDraws& draws) {
    require_draws(draws);
    const auto& first = draws.states.front();
    const Index p = first.theta.size();
    const Index n = first.delta.size();
    const std::size_t T = draws.size();
    std::vector<ParamSummary> out;
    auto column = [&](auto get) {
        std::vector<double> v(T);
        for (std::size_t t = 0; t < T; ++t) v[t] = get(draws.states[t]);
        return v;
    };
    for (Index j = 0; j < p; ++j) {
        out.push_back(summarize("theta_" + std::to_string(j + 1), column([j](const MixtureState& s) { return s.theta(j); })));
    }
    out.push_back(summarize("lambda", column([](const MixtureState& s) { return s.lambda; })));
    out.push_back(summarize("alpha", column([](const MixtureState& s) { return s.alpha; })));
    out.push_back(summarize("k", column([](const MixtureState& s) { return s.k; })));
    out.push_back(summarize("gamma", column([](const MixtureState& s) { return s.gamma; })));
    out.push_back(summarize("m", column([](const MixtureState& s) { return static_cast<double>(s.m()); })));
    for (Index i = 0; i < n; ++i) {
        out.push_back(summarize("delta_" + std::to_string(i + 1), column([i](const MixtureState& s) { return s.delta(i); })));
    }
    return out;
}

Predictions predict(const PosteriorDraws& draws, const MixtureProblem& problem) {
    require_draws(draws);
    const Index n = problem.n();
    std::vector<std::vector<double>> pure(static_cast<std::size_t>(n)), corrected(static_cast<std::size_t>(n));
    for (const auto& state : draws.states) {
        const VectorXd fit = problem.design() * state.theta;
        for (Index i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            pure[ui].push_back(fit(i));
            corrected[ui].push_back(state.zeta[ui] ? fit(i) + state.delta(i) : fit(i));
        }
    }
    return {band_from_columns(pure), band_from_columns(corrected)};
}

ValidationReport build_report(const PosteriorDraws& draws, const MixtureProblem& problem) {
    ValidationReport r;
    r.bias_prob = rao_blackwell_bias_prob(draws, problem);
    r.summaries = posterior_summaries(draws);
    r.predictions = predict(draws, problem);
    for (const auto& s : r.summaries) {
        if (s.name == "alpha") r.alpha_summary = s;
    }
    r.accept_k = draws.accept_k;
    r.accept_gamma = draws.accept_gamma;
    r.draws = static_cast<long>(draws.size());
    return r;
}

nlohmann::json report_to_json(const ValidationReport& report) {
    nlohmann::json j;
    j["draws"] = report.draws;
    j["accept_k"] = report.accept_k;
    j["accept_gamma"] = report.accept_gamma;
    j["alpha"] = summary_to_json(report.alpha_summary);
    j["bias_prob"] = vec_to_json(report.bias_prob);
    j["summaries"] = nlohmann::json::array();
    for (const auto& s : report.summaries) j["summaries"].push_back(summary_to_json(s));
    j["pred_pure"] = band_to_json(report.predictions.pure);
    j["pred_corrected"] = band_to_json(report.predictions.corrected);
    return j;
}

ValidationReport report_from_json(const nlohmann::json& j) {
    ValidationReport r;
    r.draws = j.at("draws").get<long>();
    r.accept_k = j.at("accept_k").get<double>();
    r.accept_gamma = j.at("accept_gamma").get<double>();
    r.alpha_summary = summary_from_json(j.at("alpha"));
    r.bias_prob = vec_from_json(j.at("bias_prob"));
    for (const auto& s : j.at("summaries")) r.summaries.push_back(summary_from_json(s));
    r.predictions.pure = band_from_json(j.at("pred_pure"));
    r.predictions.corrected = band_from_json(j.at("pred_corrected"));
    return r;
}

std::string report_csv(const ValidationReport& report, const Dataset& data) {
    if (report.bias_prob.size() != data.n()) throw InvalidArgument("report and dataset disagree on n");
    std::string out = "i";
    for (Index j = 0; j < data.d(); ++j) out += ",x" + std::to_string(j + 1);
    out += ",y,bias_prob,pred_pure_mean,pred_pure_lo,pred_pure_hi,pred_corr_mean,pred_corr_lo,pred_corr_hi\n";
    const auto& pp = report.predictions.pure;
    const auto& pc = report.predictions.corrected;
    for (Index i = 0; i < data.n(); ++i) {
        out += std::to_string(i + 1);
        for (Index j = 0; j < data.d(); ++j) out += "," + format_double(data.X(i, j));
        for (double v : {data.y(i), report.bias_prob(i), pp.mean(i), pp.lo(i), pp.hi(i), pc.mean(i), pc.lo(i), pc.hi(i)}) {
            out += "," + format_double(v);
        }
        out += "\n";
    }
    return out;
}

}  // namespace mixval
