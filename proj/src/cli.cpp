#include "mixval/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mixval/errors.hpp"
#include "mixval/harness.hpp"
#include "mixval/io.hpp"
#include "mixval/linearize.hpp"
#include "mixval/oracle.hpp"
#include "mixval/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mixval {

namespace {

struct Common {
    std::string out_dir = ".";
    int jobs = 1;
};

struct BasisOpts {
    std::string degree = "2";
    std::string design;
    bool rescale = false;
};

struct PriorOpts {
    double a0 = 0.5;
    std::string k_prior = "1,1";
    std::string gamma_prior = "1,1";
    double mu_delta = 0.0;
};

struct McmcOpts {
    long iters = 10000;
    long burn_in = 1000;
    std::uint64_t seed = 1;
    long thin = 1;
    double target_accept = 0.44;
    long adapt_window = 20;
    bool random_init = false;
};

/// Everything a run leaves behind for its manifest.
struct RunRecord {
    std::vector<std::pair<std::string, std::string>> outputs;  ///< file name, content
    json seeds = json::object();
    json extra = json::object();
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--out-dir", c.out_dir, "Directory for every output file and the manifest");
    app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void add_basis(CLI::App* app, BasisOpts& b) {
    app->add_option("--degree", b.degree, "Polynomial degree per input (one value, or one per input)");
    app->add_option("--design", b.design, "CSV of a tabulated design matrix G (n rows) instead of a polynomial");
    app->add_flag("--rescale", b.rescale, "Map each input column affinely onto [0,1] first");
}

void add_priors(CLI::App* app, PriorOpts& p) {
    app->add_option("--a0", p.a0, "Beta(a0, a0) prior on alpha");
    app->add_option("--k-prior", p.k_prior, "Beta shapes for k, e.g. 2,18");
    app->add_option("--gamma-prior", p.gamma_prior, "Beta shapes for the correlation length");
    app->add_option("--mu-delta", p.mu_delta, "Constant discrepancy prior mean");
}

void add_mcmc(CLI::App* app, McmcOpts& m) {
    app->add_option("--iters", m.iters, "Total iterations, burn-in included");
    app->add_option("--burn-in", m.burn_in, "Burn-in iterations (proposal scales adapt here)");
    app->add_option("--seed", m.seed, "Random seed");
    app->add_option("--thin", m.thin, "Keep every thin-th post-burn-in state");
    app->add_option("--target-accept", m.target_accept, "Target Metropolis acceptance rate");
    app->add_option("--adapt-window", m.adapt_window, "Iterations per adaptation batch");
    app->add_flag("--random-init", m.random_init, "Start from a prior draw instead of the OLS point");
}

BetaShape beta_from(const std::string& text, const char* what) {
    const auto v = parse_number_list(text);
    if (v.size() != 2) throw UsageError(std::string(what) + " needs two shapes, got '" + text + "'");
    return {v[0], v[1]};
}

PriorConfig make_priors(const PriorOpts& p) {
    PriorConfig pr;
    pr.a0 = p.a0;
    pr.k_prior = beta_from(p.k_prior, "--k-prior");
    pr.gamma_prior = beta_from(p.gamma_prior, "--gamma-prior");
    pr.mu_delta = p.mu_delta;
    try {
        pr.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    return pr;
}

McmcConfig make_mcmc(const McmcOpts& m) {
    McmcConfig c;
    c.iters = m.iters;
    c.burn_in = m.burn_in;
    c.seed = m.seed;
    c.thin = m.thin;
    c.target_accept = m.target_accept;
    c.adapt_window = m.adapt_window;
    c.random_init = m.random_init;
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    return c;
}

Dataset load_dataset(const std::string& path, const BasisOpts& b, RunRecord& rec) {
    Dataset data = read_dataset_csv(path);
    if (b.rescale) {
        const UnitScaler s = UnitScaler::fit(data.X);
        data.X = s.apply(data.X);
        rec.extra["input_offset"] = std::vector<double>(s.offset.data(), s.offset.data() + s.offset.size());
        rec.extra["input_scale"] = std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size());
    }
    data.validate();
    return data;
}

LinearCode make_code(const BasisOpts& b, const Dataset& data) {
    if (!b.design.empty()) return LinearCode::tabulated(read_matrix_csv(b.design));
    std::vector<int> degrees;
    for (double v : parse_number_list(b.degree)) {
        if (v < 0 || v != static_cast<int>(v)) throw UsageError("--degree expects nonnegative integers");
        degrees.push_back(static_cast<int>(v));
    }
    if (degrees.size() == 1 && data.d() > 1) degrees.assign(static_cast<std::size_t>(data.d()), degrees.front());
    if (static_cast<Index>(degrees.size()) != data.d()) {
        throw UsageError("--degree lists " + std::to_string(degrees.size()) + " degrees for " +
                         std::to_string(data.d()) + " inputs");
    }
    return LinearCode::polynomial(degrees);
}

/// Rank check that names the dependent basis columns.
void check_design(const LinearCode& code, const Dataset& data) {
    const MatrixXd G = code.design(data.X);
    const auto dependent = dependent_columns(G);
    if (dependent.empty()) return;
    const auto names = code.column_names();
    std::string list;
    for (Index j : dependent) list += (list.empty() ? "" : ", ") + names[static_cast<std::size_t>(j)];
    throw ModelError("design is rank-deficient: basis column(s) " + list +
                     " are linear combinations of earlier columns at the observed inputs");
}

json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void cmd_simulate(const std::string& model, int n, const std::string& theta_text, double lambda, double k,
                  double gamma, int degree, std::uint64_t seed, RunRecord& rec) {
    if (n < 1) throw UsageError("--n must be positive");
    const LinearCode code = LinearCode::polynomial({degree});
    const auto th = parse_number_list(theta_text);
    const VectorXd theta = Eigen::Map<const VectorXd>(th.data(), static_cast<Index>(th.size()));
    if (theta.size() != code.p()) {
        throw UsageError("--theta has " + std::to_string(theta.size()) + " entries, degree " +
                         std::to_string(degree) + " needs " + std::to_string(code.p()));
    }
    Dataset data;
    data.X = unit_grid(n);
    json truth;
    truth["generator"] = model;
    truth["theta"] = th;
    truth["lambda"] = lambda;
    truth["degree"] = degree;
    truth["seed"] = seed;
    if (model == "m0") {
        data.y = simulate_m0(code, theta, lambda, data.X, seed);
    } else if (model == "m1") {
        const M1Simulation sim = simulate_m1(code, theta, lambda, k, gamma, data.X, seed);
        data.y = sim.y;
        truth["k"] = k;
        truth["gamma"] = gamma;
        truth["delta"] = vec_json(sim.delta);
    } else {
        throw UsageError("--model must be m0 or m1");
    }
    rec.outputs.emplace_back("data.csv", dataset_csv(data));
    rec.outputs.emplace_back("truth.json", truth.dump(2) + "\n");
    rec.seeds["simulate"] = seed;
}

void cmd_fit(const std::string& data_path, const BasisOpts& b, const PriorOpts& po, const McmcOpts& mo, RunRecord& rec) {
    const PriorConfig priors = make_priors(po);
    const McmcConfig mcmc = make_mcmc(mo);
    const Dataset data = load_dataset(data_path, b, rec);
    const LinearCode code = make_code(b, data);
    check_design(code, data);
    const MixtureProblem problem(data, code, priors);
    const PosteriorDraws draws = run_chain(problem, mcmc);
    const ValidationReport report = build_report(draws, problem);
    rec.outputs.emplace_back("draws.csv", draws_csv(draws));
    rec.outputs.emplace_back("report.json", report_to_json(report).dump(2) + "\n");
    rec.outputs.emplace_back("report.csv", report_csv(report, data));
    rec.seeds["chain"] = mcmc.seed;
    std::cout << "alpha posterior mean " << format_double(report.alpha_summary.mean) << " (95% interval "
              << format_double(report.alpha_summary.q025) << " to " << format_double(report.alpha_summary.q975)
              << "), " << report.draws << " draws\n";
}

void cmd_report(const std::string& draws_path, const std::string& data_path, const BasisOpts& b, const PriorOpts& po,
                RunRecord& rec) {
    const Dataset data = load_dataset(data_path, b, rec);
    const LinearCode code = make_code(b, data);
    check_design(code, data);
    const MixtureProblem problem(data, code, make_priors(po));
    const PosteriorDraws draws = parse_draws_csv(read_text_file(draws_path));
    if (draws.empty()) throw ModelError(draws_path + " holds no draws");
    if (draws.states.front().delta.size() != data.n() || draws.states.front().theta.size() != code.p()) {
        throw ModelError("draws do not match the dataset and basis dimensions");
    }
    const ValidationReport report = build_report(draws, problem);
    rec.outputs.emplace_back("report.json", report_to_json(report).dump(2) + "\n");
    rec.outputs.emplace_back("report.csv", report_csv(report, data));
}

int cmd_oracle(const std::string& data_path, const BasisOpts& b, const PriorOpts& po, const McmcOpts& mo,
               int resolution, bool crosscheck, double tolerance, int jobs, RunRecord& rec) {
    const PriorConfig priors = make_priors(po);
    const Dataset data = load_dataset(data_path, b, rec);
    if (data.n() > kOracleMaxN) {
        throw InvalidArgument("the enumeration oracle is capped at n = " + std::to_string(kOracleMaxN) +
                              " observations (2^n allocation terms); this dataset has n = " + std::to_string(data.n()));
    }
    if (resolution < 2) throw UsageError("--resolution must be at least 2");
    const LinearCode code = make_code(b, data);
    const OracleReport orc = run_oracle(data, code, priors, resolution, jobs);
    json out;
    out["n"] = data.n();
    out["p"] = code.p();
    out["log_marginal"] = orc.fine.log_marginal;
    out["alpha_mean"] = orc.fine.alpha_mean;
    out["size_mass"] = orc.fine.size_mass;
    out["resolution"] = orc.fine.resolution;
    out["coarse_log_marginal"] = orc.coarse.log_marginal;
    out["coarse_resolution"] = orc.coarse.resolution;
    out["relative_change"] = orc.relative_change;
    int code_out = 0;
    std::cout << "log marginal " << format_double(orc.fine.log_marginal) << ", exact E[alpha|Y] "
              << format_double(orc.fine.alpha_mean) << "\n";
    if (crosscheck) {
        const McmcConfig mcmc = make_mcmc(mo);
        const PosteriorDraws draws = run_chain(data, code, priors, mcmc);
        double mean = 0.0;
        for (const auto& s : draws.states) mean += s.alpha;
        mean /= static_cast<double>(draws.size());
        const double diff = std::abs(mean - orc.fine.alpha_mean);
        out["crosscheck"] = {{"mcmc_alpha_mean", mean}, {"abs_diff", diff}, {"tolerance", tolerance},
                             {"passed", diff <= tolerance}};
        rec.seeds["chain"] = mcmc.seed;
        std::cout << "|E_mcmc - E_exact| = " << format_double(diff) << (diff <= tolerance ? " (ok)" : " (FAILED)")
                  << "\n";
        if (diff > tolerance) code_out = 3;
    }
    rec.outputs.emplace_back("oracle.json", out.dump(2) + "\n");
    return code_out;
}

void cmd_experiment(const std::string& name, const std::vector<std::string>& settings, int jobs, bool timing,
                    RunRecord& rec) {
    Scenario s;
    try {
        s = scenario_defaults(name);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    std::map<std::string, std::string> kv;
    for (const auto& item : settings) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    try {
        apply_overrides(s, kv);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    const ScenarioResult result = run_scenario(s, jobs, timing);
    rec.outputs.emplace_back("replicates.csv", replicates_csv(result));
    rec.outputs.emplace_back("aggregate.csv", aggregate_csv(result));
    rec.seeds["scenario"] = s.seed;
    rec.seeds["scenario_hash"] = hash_hex(s.canonical());
    rec.extra["failures"] = result.failures;
    std::cout << result.rows.size() - static_cast<std::size_t>(result.failures) << " of " << result.rows.size()
              << " replicates succeeded\n";
}

void cmd_linearize(const std::string& command, const std::string& table, const std::string& box_path,
                   const std::string& obs_path, const std::string& fit_text, double step_fraction, int restarts,
                   long max_evals, int jobs, RunRecord& rec) {
    if (command.empty() == table.empty()) throw UsageError("give exactly one of --blackbox or --table");
    const Box box = read_box_csv(box_path);
    const Dataset obs = read_dataset_csv(obs_path);
    std::unique_ptr<BlackBox> bb;
    if (!command.empty()) {
        bb = std::make_unique<SubprocessBlackBox>(command);
    } else {
        bb = TableBlackBox::from_csv(table);
    }
    NelderMeadOptions nm;
    nm.restarts = restarts;
    nm.max_evaluations = max_evals;
    const LinearSurrogate sur = build_surrogate(*bb, box, obs.y, nm, step_fraction, jobs);
    rec.outputs.emplace_back("surrogate.json", surrogate_to_json(sur).dump(2) + "\n");
    if (sur.budget_exhausted) std::cerr << "warning: evaluation budget exhausted; returning the best point found\n";
    if (!fit_text.empty()) {
        std::vector<Index> fit;
        for (double v : parse_number_list(fit_text)) {
            if (v < 1 || v != static_cast<Index>(v)) throw UsageError("--fit-indices are 1-based integers");
            fit.push_back(static_cast<Index>(v) - 1);
        }
        const LinearizedProblem lp = to_linear_code(sur, fit, obs.y);
        Dataset lin{obs.X, lp.y};
        rec.outputs.emplace_back("linear_data.csv", dataset_csv(lin));
        rec.outputs.emplace_back("linear_design.csv", matrix_csv(lp.code.table(), lp.code.column_names()));
    }
    std::cout << "K_hat";
    for (Index j = 0; j < sur.K_hat.size(); ++j) std::cout << " " << format_double(sur.K_hat(j));
    std::cout << " (objective " << format_double(sur.objective) << ", " << sur.evaluations << " evaluations)\n";
}

void write_outputs(const std::string& out_dir, const std::vector<std::string>& args, const std::string& command,
                   const std::string& resolved_config, const RunRecord& rec) {
    fs::create_directories(out_dir);
    json manifest;
    manifest["tool"] = "mixval";
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["argv"] = args;
    manifest["cwd"] = fs::current_path().string();
    manifest["config_hash"] = hash_hex(resolved_config);
    manifest["seeds"] = rec.seeds;
    manifest["outputs"] = json::object();
    for (const auto& [name, content] : rec.outputs) {
        write_text_file((fs::path(out_dir) / name).string(), content);
        manifest["outputs"][name] = hash_hex(content);
    }
    if (!rec.extra.empty()) manifest["extra"] = rec.extra;
    write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

/// Adds `--key=value` for every config entry not already given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::vector<std::string> merged = args;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        }
        if (!given) merged.push_back(flag + "=" + value);
    }
    return merged;
}

int replay(const std::string& manifest_path, const std::string& out_dir) {
    const json manifest = json::parse(read_text_file(manifest_path));
    auto args = manifest.at("argv").get<std::vector<std::string>>();
    const std::string abs_out = fs::absolute(out_dir).string();
    bool replaced = false;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--out-dir" && i + 1 < args.size()) {
            args[i + 1] = abs_out;
            replaced = true;
        } else if (args[i].rfind("--out-dir=", 0) == 0) {
            args[i] = "--out-dir=" + abs_out;
            replaced = true;
        }
    }
    if (!replaced) {
        args.push_back("--out-dir");
        args.push_back(abs_out);
    }
    const fs::path here = fs::current_path();
    fs::current_path(manifest.at("cwd").get<std::string>());
    const int rc = run_cli(args);
    fs::current_path(here);
    if (rc != 0) return rc;
    int mismatches = 0;
    for (const auto& [name, hash] : manifest.at("outputs").items()) {
        const std::string now = hash_hex(read_text_file((fs::path(abs_out) / name).string()));
        const bool same = now == hash.get<std::string>();
        std::cout << name << ": " << (same ? "identical" : "DIFFERS") << "\n";
        mismatches += same ? 0 : 1;
    }
    return mismatches == 0 ? 0 : 3;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args) {
    CLI::App app{"Bayesian validation of a linear computer code against field data"};
    app.set_version_flag("--version", std::string("mixval ") + kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "Flat key=value file; command-line flags take precedence");

    Common common;
    BasisOpts basis;
    PriorOpts priors;
    McmcOpts mcmc;

    auto* sim = app.add_subcommand("simulate", "Simulate a dataset from the pure or discrepancy model");
    std::string model = "m0", theta = "4,1,2";
    int n = 30, degree = 2;
    double lambda = 0.1, k = 0.1, gamma = 0.3;
    std::uint64_t sim_seed = 1;
    sim->add_option("--model", model, "m0 (pure code) or m1 (code plus GP discrepancy)");
    sim->add_option("--n", n, "Number of observations on the grid x_i = i/n");
    sim->add_option("--theta", theta, "True code parameters");
    sim->add_option("--lambda", lambda, "Noise standard deviation");
    sim->add_option("--k", k, "Variance ratio: discrepancy variance is lambda^2/k");
    sim->add_option("--gamma", gamma, "Discrepancy correlation length");
    sim->add_option("--degree", degree, "Polynomial degree of the code");
    sim->add_option("--seed", sim_seed, "Random seed");
    add_common(sim, common);

    auto* fit = app.add_subcommand("fit", "Run the mixture sampler and write draws plus a validation report");
    std::string data_path;
    fit->add_option("--data", data_path, "Dataset CSV (x1..xd,y)")->required();
    add_basis(fit, basis);
    add_priors(fit, priors);
    add_mcmc(fit, mcmc);
    add_common(fit, common);

    auto* rep = app.add_subcommand("report", "Rebuild the validation report from saved draws");
    std::string draws_path;
    rep->add_option("--draws", draws_path, "Draws CSV written by fit")->required();
    rep->add_option("--data", data_path, "Dataset CSV")->required();
    add_basis(rep, basis);
    add_priors(rep, priors);
    add_common(rep, common);

    auto* orc = app.add_subcommand("oracle", "Exact marginal likelihood and E[alpha|Y] by enumeration (n <= 12)");
    int resolution = 32;
    bool crosscheck = false;
    double tolerance = 0.03;
    orc->add_option("--data", data_path, "Dataset CSV")->required();
    orc->add_option("--resolution", resolution, "Gauss-Legendre nodes per axis; also run at twice this");
    orc->add_flag("--crosscheck", crosscheck, "Also run the sampler and compare E[alpha|Y]");
    orc->add_option("--tolerance", tolerance, "Largest accepted |E_mcmc - E_exact|");
    add_basis(orc, basis);
    add_priors(orc, priors);
    add_mcmc(orc, mcmc);
    add_common(orc, common);

    auto* exp = app.add_subcommand("experiment", "Run a replicated simulation scenario (fig1..fig4)");
    std::string name;
    std::vector<std::string> settings;
    bool timing = false;
    exp->add_option("--name", name, "Scenario name")->required();
    exp->add_option("--set", settings, "Override a scenario setting, key=value (repeatable)");
    exp->add_flag("--timing", timing, "Record wall time per replicate (makes outputs run-dependent)");
    add_common(exp, common);

    auto* lin = app.add_subcommand("linearize", "Build an affine surrogate of a black-box model");
    std::string bb_cmd, table, box_path, obs_path, fit_indices;
    double step_fraction = 1e-4;
    int restarts = 5;
    long max_evals = 20000;
    lin->add_option("--blackbox", bb_cmd, "Command reading parameter lines and writing output lines");
    lin->add_option("--table", table, "CSV design table k1..kq,out1..outs on a full grid");
    lin->add_option("--box", box_path, "Box CSV with lower,upper per parameter")->required();
    lin->add_option("--observations", obs_path, "Dataset CSV of operating points and observed outputs")->required();
    lin->add_option("--fit-indices", fit_indices, "1-based parameters to fit; the rest stay at the reference");
    lin->add_option("--step-fraction", step_fraction, "Finite-difference step as a fraction of the box width");
    lin->add_option("--restarts", restarts, "Nelder-Mead starts");
    lin->add_option("--max-evals", max_evals, "Evaluation budget for the least-squares search");
    add_common(lin, common);

    auto* rpl = app.add_subcommand("replay", "Re-run a manifest and compare every output byte for byte");
    std::string manifest_path, replay_out;
    rpl->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
    rpl->add_option("--out-dir", replay_out, "Directory for the re-run outputs")->required();

    std::vector<std::string> args;
    try {
        args = merge_config(raw_args);
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        RunRecord rec;
        int rc = 0;
        CLI::App* used = app.get_subcommands().front();
        if (used == rpl) return replay(manifest_path, replay_out);
        if (used == sim) {
            cmd_simulate(model, n, theta, lambda, k, gamma, degree, sim_seed, rec);
        } else if (used == fit) {
            cmd_fit(data_path, basis, priors, mcmc, rec);
        } else if (used == rep) {
            cmd_report(draws_path, data_path, basis, priors, rec);
        } else if (used == orc) {
            rc = cmd_oracle(data_path, basis, priors, mcmc, resolution, crosscheck, tolerance, common.jobs, rec);
        } else if (used == exp) {
            cmd_experiment(name, settings, common.jobs, timing, rec);
        } else if (used == lin) {
            cmd_linearize(bb_cmd, table, box_path, obs_path, fit_indices, step_fraction, restarts, max_evals,
                          common.jobs, rec);
        }
        write_outputs(common.out_dir, raw_args, used->get_name(), used->config_to_str(true, false), rec);
        return rc;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace mixval
