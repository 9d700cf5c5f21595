#include "mixval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "mixval/errors.hpp"
#include "mixval/io.hpp"
#include "mixval/report.hpp"

namespace mixval {

namespace {

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_number_list(text)) {
        if (v != std::floor(v)) throw InvalidArgument("expected integers in '" + text + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

BetaShape parse_beta(const std::string& text) {
    const auto v = parse_number_list(text);
    if (v.size() != 2) throw InvalidArgument("expected two Beta shapes in '" + text + "'");
    return {v[0], v[1]};
}

long parse_long(const std::string& text) {
    const double v = parse_double(text);
    if (v != std::floor(v)) throw InvalidArgument("expected an integer, got '" + text + "'");
    return static_cast<long>(v);
}

PriorConfig priors_for(const Scenario& s, double gamma_star) {
    PriorConfig p = s.priors;
    if (s.gamma_mode == GammaPriorMode::Informative && s.generator == Generator::M1) {
        p.gamma_prior = {gamma_star * s.informative_ess, (1.0 - gamma_star) * s.informative_ess};
    }
    return p;
}

ReplicateRow run_replicate(const Scenario& s, std::size_t g, double gamma_star, int n, int r, bool timing) {
    ReplicateRow row;
    row.gamma_star = gamma_star;
    row.n = n;
    row.replicate = r;
    const auto start = std::chrono::steady_clock::now();
    try {
        const std::uint64_t seed = replicate_seed(s, g, r);
        const Dataset data = replicate_dataset(s, gamma_star, n, derive_seed(seed, 0));
        McmcConfig mc = s.mcmc;
        mc.seed = derive_seed(seed, 1);
        const MixtureProblem problem(data, LinearCode::polynomial({2}), priors_for(s, gamma_star));
        const PosteriorDraws draws = run_chain(problem, mc);
        const auto summaries = posterior_summaries(draws);
        const Index p = problem.p();
        row.theta_mean.resize(p);
        row.theta_sd.resize(p);
        for (const auto& ps : summaries) {
            if (ps.name == "alpha") row.alpha_mean = ps.mean;
            if (ps.name == "lambda") row.lambda_mean = ps.mean;
            if (ps.name == "k") row.k_mean = ps.mean;
            if (ps.name == "gamma") row.gamma_mean = ps.mean;
            for (Index j = 0; j < p; ++j) {
                if (ps.name == "theta_" + std::to_string(j + 1)) {
                    row.theta_mean(j) = ps.mean;
                    row.theta_sd(j) = ps.sd;
                }
            }
        }
        const Predictions pred = predict(draws, problem);
        const double nd = static_cast<double>(n);
        row.rmse_pure = std::sqrt((pred.pure.mean - data.y).squaredNorm() / nd);
        row.rmse_corrected = std::sqrt((pred.corrected.mean - data.y).squaredNorm() / nd);
        row.ok = true;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
    if (timing) row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c == '\n' ? ' ' : c);
    return out + "\"";
}

}  // namespace

void Scenario::validate() const {
    if (replicates < 1) throw InvalidArgument("scenario needs at least one replicate");
    if (ns.empty()) throw InvalidArgument("scenario needs at least one sample size");
    for (int n : ns) {
        if (n < 4) throw InvalidArgument("sample sizes must exceed the three code parameters");
    }
    if (theta_star.size() != 3) throw InvalidArgument("theta* must have three entries for the quadratic code");
    if (!(lambda_star >= 0.0)) throw InvalidArgument("lambda* must be nonnegative");
    if (generator == Generator::M1) {
        if (gamma_stars.empty()) throw InvalidArgument("M1 scenario needs gamma* values");
        for (double g : gamma_stars) {
            if (!(g > 0.0 && g < 1.0)) throw InvalidArgument("gamma* must lie in (0,1)");
        }
        if (!(k_star > 0.0 && k_star < 1.0)) throw InvalidArgument("k* must lie in (0,1)");
    }
    if (!(informative_ess > 0.0)) throw InvalidArgument("informative_ess must be positive");
    priors.validate();
    mcmc.validate();
}

std::string Scenario::canonical() const {
    std::ostringstream os;
    os << "name=" << name << ";gen=" << (generator == Generator::M0 ? "m0" : "m1") << ";n=";
    for (int n : ns) os << n << ",";
    os << ";gamma*=";
    for (double g : gamma_stars) os << format_double(g) << ",";
    os << ";theta*=";
    for (Index j = 0; j < theta_star.size(); ++j) os << format_double(theta_star(j)) << ",";
    os << ";lambda*=" << format_double(lambda_star) << ";k*=" << format_double(k_star) << ";R=" << replicates
       << ";a0=" << format_double(priors.a0) << ";kp=" << format_double(priors.k_prior.a) << ","
       << format_double(priors.k_prior.b) << ";gp=" << format_double(priors.gamma_prior.a) << ","
       << format_double(priors.gamma_prior.b) << ";mu=" << format_double(priors.mu_delta)
       << ";gmode=" << (gamma_mode == GammaPriorMode::Fixed ? "fixed" : "informative")
       << ";ess=" << format_double(informative_ess) << ";iters=" << mcmc.iters << ";burn=" << mcmc.burn_in
       << ";thin=" << mcmc.thin << ";target=" << format_double(mcmc.target_accept)
       << ";window=" << mcmc.adapt_window << ";seed=" << seed;
    return os.str();
}

std::vector<std::pair<double, int>> Scenario::grid() const {
    std::vector<std::pair<double, int>> out;
    const std::vector<double> gs = generator == Generator::M0 ? std::vector<double>{0.0} : gamma_stars;
    for (double g : gs) {
        for (int n : ns) out.emplace_back(g, n);
    }
    return out;
}

Scenario scenario_defaults(const std::string& name) {
    Scenario s;
    s.name = name;
    s.mcmc.burn_in = 1000;
    if (name == "fig1") {
        s.generator = Generator::M0;
        s.ns = {30};
        s.gamma_stars = {};
        s.mcmc.iters = 20000;
        s.priors.k_prior = {1, 1};
        s.priors.gamma_prior = {1, 1};
    } else if (name == "fig2") {
        s.generator = Generator::M1;
        s.ns = {50};
        s.gamma_stars = {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
        s.mcmc.iters = 10000;
        s.priors.k_prior = {2, 18};
        s.priors.gamma_prior = {1, 1};
    } else if (name == "fig3") {
        s.generator = Generator::M1;
        s.ns.clear();
        for (int n = 6; n <= 98; n += 4) s.ns.push_back(n);
        s.ns.push_back(100);
        s.gamma_stars = {0.3};
        s.mcmc.iters = 10000;
        s.priors.k_prior = {2, 18};
        s.priors.gamma_prior = {1, 1};
    } else if (name == "fig4") {
        s.generator = Generator::M1;
        s.ns = {100};
        s.gamma_stars = {0.01, 0.3};
        s.replicates = 1;
        s.mcmc.iters = 20000;
        s.priors.k_prior = {2, 18};
        s.priors.gamma_prior = {1, 1};
    } else {
        throw InvalidArgument("unknown scenario '" + name + "' (expected fig1, fig2, fig3 or fig4)");
    }
    return s;
}

void apply_overrides(Scenario& s, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "replicates") {
            s.replicates = static_cast<int>(parse_long(value));
        } else if (key == "iters") {
            s.mcmc.iters = parse_long(value);
        } else if (key == "burn_in") {
            s.mcmc.burn_in = parse_long(value);
        } else if (key == "thin") {
            s.mcmc.thin = parse_long(value);
        } else if (key == "seed") {
            s.seed = static_cast<std::uint64_t>(parse_long(value));
        } else if (key == "n") {
            s.ns = parse_int_list(value);
        } else if (key == "gamma_star") {
            s.gamma_stars = parse_number_list(value);
        } else if (key == "a0") {
            s.priors.a0 = parse_double(value);
        } else if (key == "k_prior") {
            s.priors.k_prior = parse_beta(value);
        } else if (key == "gamma_prior") {
            s.priors.gamma_prior = parse_beta(value);
        } else if (key == "gamma_prior_mode") {
            if (value == "fixed") {
                s.gamma_mode = GammaPriorMode::Fixed;
            } else if (value == "informative") {
                s.gamma_mode = GammaPriorMode::Informative;
            } else {
                throw InvalidArgument("gamma_prior_mode must be fixed or informative");
            }
        } else if (key == "informative_ess") {
            s.informative_ess = parse_double(value);
        } else {
            throw InvalidArgument("unknown scenario setting '" + key + "'");
        }
    }
    s.validate();
}

std::uint64_t replicate_seed(const Scenario& s, std::size_t grid_index, int replicate) {
    const std::uint64_t base = fnv1a64(s.canonical());
    return derive_seed(derive_seed(base, grid_index), static_cast<std::uint64_t>(replicate));
}

Dataset replicate_dataset(const Scenario& s, double gamma_star, int n, std::uint64_t seed) {
    const LinearCode code = LinearCode::polynomial({2});
    Dataset data;
    data.X = unit_grid(n);
    if (s.generator == Generator::M0) {
        data.y = simulate_m0(code, s.theta_star, s.lambda_star, data.X, seed);
    } else {
        data.y = simulate_m1(code, s.theta_star, s.lambda_star, s.k_star, gamma_star, data.X, seed).y;
    }
    return data;
}

ScenarioResult run_scenario(const Scenario& s, int jobs, bool timing) {
    s.validate();
    const auto grid = s.grid();
    struct Task {
        std::size_t g;
        int r;
    };
    std::vector<Task> tasks;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (int r = 0; r < s.replicates; ++r) tasks.push_back({g, r});
    }
    std::vector<ReplicateRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            const auto& task = tasks[t];
            rows[t] = run_replicate(s, task.g, grid[task.g].first, grid[task.g].second, task.r, timing);
        }
    };
    const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    ScenarioResult result;
    result.scenario = s;
    result.rows = std::move(rows);
    for (const auto& row : result.rows) result.failures += row.ok ? 0 : 1;
    const auto total = static_cast<double>(result.rows.size());
    if (static_cast<double>(result.rows.size() - static_cast<std::size_t>(result.failures)) < 0.9 * total) {
        std::string first_error;
        for (const auto& row : result.rows) {
            if (!row.ok) {
                first_error = row.error;
                break;
            }
        }
        throw ModelError("scenario " + s.name + ": " + std::to_string(result.failures) + " of " +
                         std::to_string(result.rows.size()) + " replicates failed (first: " + first_error + ")");
    }
    return result;
}

std::string replicates_csv(const ScenarioResult& result) {
    std::string out =
        "scenario,gamma_star,n,replicate,alpha_mean,lambda_mean,theta1,theta2,theta3,k_mean,gamma_mean,seconds,"
        "theta1_sd,theta2_sd,theta3_sd,rmse_pure,rmse_corrected,status\n";
    for (const auto& row : result.rows) {
        out += result.scenario.name + "," + format_double(row.gamma_star) + "," + std::to_string(row.n) + "," +
               std::to_string(row.replicate);
        if (row.ok) {
            for (double v : {row.alpha_mean, row.lambda_mean, row.theta_mean(0), row.theta_mean(1), row.theta_mean(2),
                             row.k_mean, row.gamma_mean, row.seconds, row.theta_sd(0), row.theta_sd(1),
                             row.theta_sd(2), row.rmse_pure, row.rmse_corrected}) {
                out += "," + format_double(v);
            }
            out += ",ok\n";
        } else {
            out += ",,,,,,,," + format_double(row.seconds) + ",,,,,," + quote("failed: " + row.error) + "\n";
        }
    }
    return out;
}

std::string aggregate_csv(const ScenarioResult& result) {
    std::string out = "scenario,gamma_star,n,succeeded";
    const char* names[] = {"alpha", "lambda", "theta1", "theta2", "theta3", "k", "gamma"};
    for (const char* nm : names) {
        out += std::string(",") + nm + "_q25," + nm + "_median," + nm + "_q75";
    }
    out += "\n";
    for (const auto& [gamma_star, n] : result.scenario.grid()) {
        std::vector<std::vector<double>> cols(7);
        for (const auto& row : result.rows) {
            if (!row.ok || row.gamma_star != gamma_star || row.n != n) continue;
            const double vals[] = {row.alpha_mean,    row.lambda_mean, row.theta_mean(0), row.theta_mean(1),
                                   row.theta_mean(2), row.k_mean,      row.gamma_mean};
            for (std::size_t c = 0; c < 7; ++c) cols[c].push_back(vals[c]);
        }
        out += result.scenario.name + "," + format_double(gamma_star) + "," + std::to_string(n) + "," +
               std::to_string(cols[0].size());
        for (auto& col : cols) {
            if (col.empty()) {
                out += ",,,";
                continue;
            }
            std::sort(col.begin(), col.end());
            out += "," + format_double(quantile_sorted(col, 0.25)) + "," + format_double(quantile_sorted(col, 0.5)) +
                   "," + format_double(quantile_sorted(col, 0.75));
        }
        out += "\n";
    }
    return out;
}

M1Simulation simulate_partial_bias(const LinearCode& code, const VectorXd& theta_star, double lambda_star,
                                   double k_star, double gamma_star, const MatrixXd& X,
                                   const std::vector<std::uint8_t>& biased, std::uint64_t seed) {
    if (static_cast<Index>(biased.size()) != X.rows()) throw InvalidArgument("bias mask has the wrong length");
    M1Simulation sim = simulate_m1(code, theta_star, lambda_star, k_star, gamma_star, X, seed);
    for (Index i = 0; i < X.rows(); ++i) {
        if (!biased[static_cast<std::size_t>(i)]) {
            sim.y(i) -= sim.delta(i);
            sim.delta(i) = 0.0;
        }
    }
    return sim;
}

}  // namespace mixval
