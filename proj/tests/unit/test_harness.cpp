#include <cmath>
#include <set>

#include "doctest.h"
#include "mixval/errors.hpp"
#include "mixval/harness.hpp"

using namespace mixval;

namespace {

Scenario small_scenario() {
    Scenario s = scenario_defaults("fig2");
    apply_overrides(s, {{"replicates", "3"}, {"iters", "600"}, {"burn_in", "200"}, {"gamma_star", "0.1,0.5"},
                        {"n", "12"}});
    return s;
}

}  // namespace

TEST_CASE("scenario defaults") {
    const auto f1 = scenario_defaults("fig1");
    CHECK(f1.generator == Generator::M0);
    CHECK(f1.ns == std::vector<int>{30});
    CHECK(f1.replicates == 50);
    CHECK(f1.mcmc.iters == 20000);
    CHECK(f1.mcmc.burn_in == 1000);
    CHECK(f1.lambda_star == 0.1);
    CHECK(f1.theta_star == (VectorXd(3) << 4.0, 1.0, 2.0).finished());
    const auto f2 = scenario_defaults("fig2");
    CHECK(f2.gamma_stars.front() == 0.01);
    CHECK(f2.gamma_stars.back() == 0.9);
    CHECK(f2.k_star == 0.1);
    CHECK(f2.mcmc.iters == 10000);
    const auto f3 = scenario_defaults("fig3");
    CHECK(f3.ns.front() == 6);
    CHECK(f3.ns.back() == 100);
    CHECK(f3.gamma_stars == std::vector<double>{0.3});
    const auto f4 = scenario_defaults("fig4");
    CHECK(f4.ns == std::vector<int>{100});
    CHECK(f4.gamma_stars == std::vector<double>{0.01, 0.3});
    CHECK_THROWS_AS(scenario_defaults("fig5"), InvalidArgument);
    for (const char* n : {"fig1", "fig2", "fig3", "fig4"}) CHECK_NOTHROW(scenario_defaults(n).validate());
}

TEST_CASE("overrides") {
    Scenario s = scenario_defaults("fig2");
    apply_overrides(s, {{"replicates", "7"}, {"k_prior", "1,3"}, {"gamma_prior_mode", "informative"},
                        {"informative_ess", "20"}, {"seed", "99"}, {"thin", "2"}});
    CHECK(s.replicates == 7);
    CHECK(s.priors.k_prior.a == 1.0);
    CHECK(s.priors.k_prior.b == 3.0);
    CHECK(s.gamma_mode == GammaPriorMode::Informative);
    CHECK(s.informative_ess == 20.0);
    CHECK(s.seed == 99);
    CHECK(s.mcmc.thin == 2);
    CHECK_THROWS_AS(apply_overrides(s, {{"bogus", "1"}}), InvalidArgument);
    CHECK_THROWS_AS(apply_overrides(s, {{"replicates", "x"}}), InvalidArgument);
    Scenario bad = scenario_defaults("fig3");
    CHECK_THROWS_AS(apply_overrides(bad, {{"n", "3"}}), InvalidArgument);
    bad.ns = {3};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("replicate seeds are distinct and depend on every setting") {
    const auto s = scenario_defaults("fig2");
    std::set<std::uint64_t> seen;
    for (std::size_t g = 0; g < 11; ++g) {
        for (int r = 0; r < 50; ++r) seen.insert(replicate_seed(s, g, r));
    }
    CHECK(seen.size() == 550);
    Scenario t = s;
    t.seed = 2;
    CHECK(replicate_seed(t, 0, 0) != replicate_seed(s, 0, 0));
    Scenario u = s;
    u.mcmc.iters = 9999;
    CHECK(u.canonical() != s.canonical());
    CHECK(replicate_seed(u, 3, 4) != replicate_seed(s, 3, 4));
    CHECK(replicate_seed(s, 3, 4) == replicate_seed(scenario_defaults("fig2"), 3, 4));
}

TEST_CASE("replicate datasets follow the scenario generator") {
    Scenario s = scenario_defaults("fig1");
    const Dataset d = replicate_dataset(s, 0.0, 30, 5);
    CHECK(d.n() == 30);
    CHECK(d.X(29, 0) == 1.0);
    CHECK(d.y == replicate_dataset(s, 0.0, 30, 5).y);
    s.lambda_star = 0.0;
    const Dataset exact = replicate_dataset(s, 0.0, 30, 5);
    CHECK(exact.y(0) == doctest::Approx(4.0 + 1.0 / 30 + 2.0 / 900));
}

TEST_CASE("scenario runs are deterministic and independent of the thread count") {
    const auto s = small_scenario();
    const auto a = run_scenario(s, 1);
    const auto b = run_scenario(s, 1);
    const auto c = run_scenario(s, 3);
    CHECK(a.rows.size() == 6);
    CHECK(a.failures == 0);
    CHECK(replicates_csv(a) == replicates_csv(b));
    CHECK(replicates_csv(a) == replicates_csv(c));
    CHECK(aggregate_csv(a) == aggregate_csv(c));
    for (const auto& row : a.rows) {
        CHECK(row.ok);
        CHECK(row.seconds == 0.0);
        CHECK(std::isfinite(row.alpha_mean));
    }
    CHECK(a.rows[0].gamma_star == 0.1);
    CHECK(a.rows[5].gamma_star == 0.5);
    CHECK(replicates_csv(a).rfind(
              "scenario,gamma_star,n,replicate,alpha_mean,lambda_mean,theta1,theta2,theta3,k_mean,gamma_mean,seconds",
              0) == 0);
    const auto timed = run_scenario(s, 1, true);
    CHECK(timed.rows[0].seconds > 0.0);
    CHECK(timed.rows[0].alpha_mean == a.rows[0].alpha_mean);
}

TEST_CASE("a scenario with too many failed replicates is an error") {
    Scenario s = small_scenario();
    s.theta_star = VectorXd::Constant(3, 1e308);  // responses overflow, every replicate fails
    CHECK_THROWS_AS(run_scenario(s, 1), ModelError);
}

TEST_CASE("partial-bias simulation only perturbs flagged observations") {
    const LinearCode code = LinearCode::polynomial({2});
    const MatrixXd X = unit_grid(20);
    std::vector<std::uint8_t> biased(20, 0);
    for (int i = 10; i < 20; ++i) biased[static_cast<std::size_t>(i)] = 1;
    const VectorXd th = (VectorXd(3) << 4.0, 1.0, 2.0).finished();
    const auto sim = simulate_partial_bias(code, th, 0.0, 0.1, 0.3, X, biased, 3);
    const VectorXd curve = code.design(X) * th;
    for (Index i = 0; i < 10; ++i) CHECK(sim.y(i) == curve(i));
    for (Index i = 10; i < 20; ++i) CHECK(sim.y(i) == curve(i) + sim.delta(i));
}
