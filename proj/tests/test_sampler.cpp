#include "homsim/rates.hpp"
#include "homsim/rng.hpp"
#include "homsim/sampler.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>

using namespace homsim;

namespace {

ExperimentConfig ideal_config(double s2) {
    ExperimentConfig ec;
    for (EnsembleParams* site : {&ec.site_a, &ec.site_b}) {
        site->chi = std::asinh(std::sqrt(s2)) / site->cos_eta;
        site->epsilon = 1.0;
        site->retrieval_efficiency = 1.0;
        site->idler_epsilon = 1.0;
    }
    ec.delta_t = 0.0;
    return ec;
}

TrialPlan ideal_plan(double s2, std::uint64_t n, std::uint64_t seed,
                     Scenario scenario = Scenario::parallel) {
    TrialPlan plan;
    plan.config = ideal_config(s2);
    plan.scenario = scenario;
    plan.n_trials = n;
    plan.seed = seed;
    plan.cutoff = 5;
    return plan;
}

bool within_sigma(double observed, double expected, std::uint64_t n,
                  double n_sigma) {
    const double sigma = binomial_error(expected, n);
    return std::abs(observed - expected) <= n_sigma * std::max(sigma, 1e-12);
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("counter stream is deterministic and uniform-ish") {
    const CounterStream s(123, 7, StreamPurpose::pattern);
    const CounterStream same(123, 7, StreamPurpose::pattern);
    CHECK(s.uniform(0) == same.uniform(0));
    CHECK(s.uniform(0) != s.uniform(1));
    CHECK(s.uniform(0, 0) != s.uniform(0, 1));
    const CounterStream other(123, 7, StreamPurpose::dark);
    CHECK(s.uniform(5) != other.uniform(5));
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform(i);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 10000.0 == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("results are bit-identical across thread counts") {
    for (int threads : {2, 4, 7}) {
        TrialPlan single = ideal_plan(0.02, 50000, 42);
        single.run_tag = 9;
        single.dark_rate = {1e-3, 2e-3, 0.0, 5e-4};
        TrialPlan multi = single;
        multi.n_threads = threads;
        const CountsReport a = run_trials(single);
        const CountsReport b = run_trials(multi);
        CHECK(a.singles == b.singles);
        CHECK(a.pair_12 == b.pair_12);
        CHECK(a.pair_34 == b.pair_34);
        CHECK(a.quad_1234 == b.quad_1234);
        CHECK(a.p1_hat == b.p1_hat);
        CHECK(a.quad_rate == b.quad_rate);
    }
}

TEST_CASE("tallies follow the exact sampling distribution") {
    for (Scenario sc : {Scenario::parallel, Scenario::perpendicular,
                        Scenario::blocked_a}) {
        CAPTURE(scenario_name(sc));
        TrialPlan plan = ideal_plan(0.05, 200000, 3, sc);
        const CountsReport report = run_trials(plan);
        const ClickDistribution& truth = report.distribution;
        const std::uint64_t n = plan.n_trials;
        for (int k = 0; k < 4; ++k) {
            CAPTURE(k);
            CHECK(within_sigma(double(report.singles[k]) / double(n),
                               truth.at_least(1u << k), n, 5.0));
        }
        CHECK(within_sigma(report.pair_12_rate, truth.at_least(0x3), n, 5.0));
        CHECK(within_sigma(double(report.pair_34) / double(n),
                           truth.at_least(0xC), n, 5.0));
        CHECK(within_sigma(report.quad_rate, truth.at_least(0xF), n, 5.0));
    }
}

TEST_CASE("signal singles estimate the heralding probability") {
    TrialPlan plan = ideal_plan(0.02, 400000, 8);
    const CountsReport report = run_trials(plan);
    const double expected = p1(plan.config);
    // p1_hat carries a multiphoton saturation bias of order s^2 on top of
    // the sampling noise
    CHECK(std::abs(report.p1_hat - expected) <
          5.0 * report.p1_hat_err + 0.05 * expected);
    CHECK(report.p1_hat_err > 0.0);
    CHECK(report.p1_hat_err < 1e-3);
}

TEST_CASE("dark counts alone produce independent clicks") {
    TrialPlan plan;
    plan.config = ideal_config(0.0);
    plan.n_trials = 100000;
    plan.seed = 17;
    plan.dark_rate = {0.3, 0.2, 0.1, 0.05};
    const CountsReport report = run_trials(plan);
    for (int k = 0; k < 4; ++k)
        CHECK(within_sigma(double(report.singles[k]) / double(plan.n_trials),
                           plan.dark_rate[k], plan.n_trials, 5.0));
    CHECK(within_sigma(report.pair_12_rate, 0.3 * 0.2, plan.n_trials, 5.0));
}

TEST_CASE("a silent experiment yields no counts") {
    TrialPlan plan;
    plan.config = ideal_config(0.0);
    plan.n_trials = 5000;
    const CountsReport report = run_trials(plan);
    for (int k = 0; k < 4; ++k) CHECK(report.singles[k] == 0);
    CHECK(report.quad_1234 == 0);
    CHECK(report.p1_hat == 0.0);
}

TEST_CASE("blocking a site silences its idler detector") {
    TrialPlan plan = ideal_plan(0.05, 20000, 5, Scenario::blocked_a);
    const CountsReport report = run_trials(plan);
    CHECK(report.singles[2] == 0);  // D3 watches the blocked site's memory
    CHECK(report.singles[3] > 0);
    CHECK(report.quad_1234 == 0);
    const CountsReport other =
        run_trials(ideal_plan(0.05, 20000, 5, Scenario::blocked_b));
    CHECK(other.singles[3] == 0);
    CHECK(other.singles[2] > 0);
}

TEST_CASE("polarization cannot matter without port mixing") {
    for (double R : {0.0, 1.0}) {
        ExperimentConfig ec = ideal_config(0.04);
        ec.reflectance = R;
        const ClickDistribution par =
            exact_click_distribution(ec, Scenario::parallel, 5);
        const ClickDistribution perp =
            exact_click_distribution(ec, Scenario::perpendicular, 5);
        for (int q = 0; q < 16; ++q)
            CHECK(std::abs(par.probability[q] - perp.probability[q]) < 1e-12);
    }
}

TEST_CASE("under-truncated sampling is refused") {
    TrialPlan plan = ideal_plan(0.96, 100, 1);
    plan.cutoff = 4;
    bool refused = false;
    try {
        run_trials(plan);
    } catch (const NumericRefusal& err) {
        refused = true;
        CHECK(std::string(err.what()).find("Raise the cutoff") !=
              std::string::npos);
    }
    CHECK(refused);
    // the exact distribution itself still reports its leakage
    const ClickDistribution dist =
        exact_click_distribution(plan.config, plan.scenario, plan.cutoff);
    CHECK(dist.leakage > 1e-4);
}

TEST_CASE("trial plans validate their sizes") {
    TrialPlan plan = ideal_plan(0.02, 1, 1);
    plan.n_trials = 0;
    CHECK_THROWS_AS(run_trials(plan), std::invalid_argument);
}

TEST_CASE("dark overlay moves mass only to supersets") {
    ExperimentConfig ec = ideal_config(0.03);
    const ClickDistribution base =
        exact_click_distribution(ec, Scenario::parallel, 5);
    const std::array<double, 4> darks = {0.01, 0.02, 0.0, 0.005};
    const ClickDistribution shifted = base.with_darks(darks);
    double before = 0.0, after = 0.0;
    for (int q = 0; q < 16; ++q) {
        before += base.probability[q];
        after += shifted.probability[q];
    }
    CHECK(after == doctest::Approx(before).epsilon(1e-12));
    CHECK(shifted.leakage == base.leakage);
    // with no source light the overlay is an independent product
    const ClickDistribution darks_only =
        exact_click_distribution(ideal_config(0.0), Scenario::parallel, 4)
            .with_darks(darks);
    for (unsigned q = 0; q < 16; ++q) {
        double expected = 1.0;
        for (unsigned k = 0; k < 4; ++k)
            expected *= (q & (1u << k)) ? darks[k] : 1.0 - darks[k];
        CHECK(darks_only.probability[q] ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("at_least marginalizes over the unconstrained detectors") {
    ClickDistribution dist;
    for (int q = 0; q < 16; ++q) dist.probability[q] = (q + 1) / 136.0;
    double manual = 0.0;
    for (int q = 0; q < 16; ++q)
        if ((q & 0x5) == 0x5) manual += dist.probability[q];
    CHECK(dist.at_least(0x5) == doctest::Approx(manual).epsilon(1e-15));
    CHECK(dist.at_least(0x0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("error helpers") {
    CHECK(binomial_error(0.5, 100) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(binomial_error(0.0, 100) == 0.0);
    CHECK(binomial_error(0.5, 0) == 0.0);
    CHECK(ratio_error(2.0, 0.2, 4.0, 0.4) ==
          doctest::Approx(0.5 * std::sqrt(0.02)).epsilon(1e-12));
    CHECK(ratio_error(1.0, 0.1, 0.0, 0.1) == 0.0);
}

TEST_CASE("benchmark estimator validates its inputs") {
    const CountsReport par = run_trials(ideal_plan(0.05, 1000, 2));
    const CountsReport blocked_a =
        run_trials(ideal_plan(0.05, 1000, 2, Scenario::blocked_a));
    const CountsReport blocked_b =
        run_trials(ideal_plan(0.05, 1000, 2, Scenario::blocked_b));
    CHECK_THROWS_AS(estimate_w_perp(par, blocked_b), std::invalid_argument);
    CHECK_THROWS_AS(estimate_w_perp(blocked_a, blocked_a),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_w_perp(blocked_a, blocked_b, 1),
                    std::invalid_argument);
    const CountsReport longer =
        run_trials(ideal_plan(0.05, 2000, 2, Scenario::blocked_b));
    CHECK_THROWS_AS(estimate_w_perp(blocked_a, longer), std::invalid_argument);
}

TEST_CASE("benchmark estimator is symmetric in its arguments") {
    TrialPlan plan_a = ideal_plan(0.1, 20000, 21, Scenario::blocked_a);
    TrialPlan plan_b = ideal_plan(0.1, 20000, 22, Scenario::blocked_b);
    plan_b.run_tag = 3;
    const CountsReport run_a = run_trials(plan_a);
    const CountsReport run_b = run_trials(plan_b);
    const WperpEstimate fwd = estimate_w_perp(run_a, run_b);
    const WperpEstimate rev = estimate_w_perp(run_b, run_a);
    CHECK(fwd.value == rev.value);
    CHECK(fwd.error == rev.error);
    CHECK(fwd.quad_count == rev.quad_count);
    CHECK(fwd.n_pairs == rev.n_pairs);
}

TEST_CASE("benchmark estimator flags runs without four-fold events") {
    const CountsReport run_a =
        run_trials(ideal_plan(0.001, 200, 4, Scenario::blocked_a));
    const CountsReport run_b =
        run_trials(ideal_plan(0.001, 200, 4, Scenario::blocked_b));
    const WperpEstimate est = estimate_w_perp(run_a, run_b);
    CHECK(est.degenerate);
    CHECK(est.quad_count == 0);
    CHECK(est.value == 0.0);
}

TEST_CASE("benchmark estimator recovers the exact overlay rate") {
    TrialPlan plan_a = ideal_plan(0.1, 200000, 31, Scenario::blocked_a);
    TrialPlan plan_b = ideal_plan(0.1, 200000, 31, Scenario::blocked_b);
    plan_b.run_tag = 1;
    const CountsReport run_a = run_trials(plan_a);
    const CountsReport run_b = run_trials(plan_b);
    const WperpEstimate est = estimate_w_perp(run_a, run_b);
    REQUIRE_FALSE(est.degenerate);
    CHECK(est.n_pairs == 200000);
    const double exact =
        w_perp_exact(run_a.distribution, run_b.distribution);
    CHECK(std::abs(est.value - exact) < 5.0 * est.error);
    // bootstrap error against the plain binomial scale of the pair count
    const double binom = binomial_error(exact, est.n_pairs);
    CHECK(est.error / binom > 0.5);
    CHECK(est.error / binom < 2.0);
}

TEST_CASE("bootstrap error shrinks with the run length") {
    WperpEstimate small, big;
    {
        TrialPlan a = ideal_plan(0.1, 50000, 13, Scenario::blocked_a);
        TrialPlan b = ideal_plan(0.1, 50000, 13, Scenario::blocked_b);
        b.run_tag = 1;
        small = estimate_w_perp(run_trials(a), run_trials(b), 400);
    }
    {
        TrialPlan a = ideal_plan(0.1, 100000, 13, Scenario::blocked_a);
        TrialPlan b = ideal_plan(0.1, 100000, 13, Scenario::blocked_b);
        b.run_tag = 1;
        big = estimate_w_perp(run_trials(a), run_trials(b), 400);
    }
    REQUIRE_FALSE(small.degenerate);
    REQUIRE_FALSE(big.degenerate);
    const double ratio = big.error / small.error;
    CHECK(ratio > 0.5);
    CHECK(ratio < 0.95);
}

TEST_CASE("exact overlay agrees with the geometric benchmark") {
    ExperimentConfig ec = ideal_config(0.01);
    ec.site_a.epsilon = 0.5;
    ec.site_b.epsilon = 0.4;
    ec.site_a.retrieval_efficiency = 0.6;
    ec.site_b.retrieval_efficiency = 0.7;
    const ClickDistribution da =
        exact_click_distribution(ec, Scenario::blocked_a, 6);
    const ClickDistribution db =
        exact_click_distribution(ec, Scenario::blocked_b, 6);
    const double overlay = w_perp_exact(da, db);
    const double geometric = w_perp_benchmark(ec);
    CHECK(overlay == doctest::Approx(geometric).epsilon(1e-8));
}

TEST_CASE("run_sweep preserves the plan order") {
    std::vector<TrialPlan> plans;
    plans.push_back(ideal_plan(0.02, 1000, 1));
    plans.push_back(ideal_plan(0.05, 2000, 2, Scenario::blocked_a));
    const auto reports = run_sweep(plans);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].plan.n_trials == 1000);
    CHECK(reports[1].plan.scenario == Scenario::blocked_a);
    CHECK(reports[1].singles[2] == 0);
}

} // TEST_SUITE
