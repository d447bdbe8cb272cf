#pragma once

#include "homsim/experiment.hpp"
#include "homsim/rng.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace homsim {

// The engine declines to produce numbers it cannot stand behind, distinct
// from configuration errors; the CLI maps it to its own exit code.
struct NumericRefusal : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One Monte Carlo run: scenario, statistics and reproducibility contract.
// Two plans with the same (seed, run_tag) draw the same variates; run_tag
// separates runs sharing a master seed (sweep point, scenario).
struct TrialPlan {
    std::uint64_t n_trials = 1;
    std::uint64_t seed = 0;
    Scenario scenario = Scenario::parallel;
    ExperimentConfig config;
    int cutoff = 4;
    int n_threads = 1;
    std::array<double, 4> dark_rate{0.0, 0.0, 0.0, 0.0};
    std::uint64_t run_tag = 0;
};

// Joint threshold-click distribution of detectors D1..D4 for one circuit.
// Pattern bit k set means detector Dk+1 clicked. leakage is the truncation
// mass unaccounted for by the 16 patterns.
struct ClickDistribution {
    std::array<double, 16> probability{};
    double leakage = 0.0;

    // P(every detector in `mask` clicked), other detectors unconstrained.
    double at_least(unsigned mask) const;

    // Distribution after independently ORing a dark click onto each
    // detector with the given per-detector probability.
    ClickDistribution with_darks(const std::array<double, 4>& dark_rate) const;
};

// Exact engine evaluation of the folded circuit for one scenario. This is
// the sampling distribution of run_trials before dark counts.
ClickDistribution exact_click_distribution(const ExperimentConfig& config,
                                           Scenario scenario, int cutoff);

// Same overlay of two blocked-run distributions that estimate_w_perp
// applies to sampled trials: a four-fold counts when the pair of trials
// jointly covers all four detectors.
double w_perp_exact(const ClickDistribution& blocked_a,
                    const ClickDistribution& blocked_b);

// Tallies of one run. Rates carry binomial standard errors; p1_hat is the
// mean number of signal detectors fired per trial (N1 + N2) / n, which
// estimates the single-photon detection probability per trial at small
// occupation.
struct CountsReport {
    TrialPlan plan;
    std::array<std::uint64_t, 4> singles{};
    std::uint64_t pair_12 = 0;
    std::uint64_t pair_34 = 0;
    std::uint64_t quad_1234 = 0;
    double p1_hat = 0.0;
    double p1_hat_err = 0.0;
    double pair_12_rate = 0.0;
    double pair_12_err = 0.0;
    double quad_rate = 0.0;
    double quad_err = 0.0;
    // Sampling truth for this run, dark counts included.
    ClickDistribution distribution;
};

// Threshold-click Monte Carlo over the folded circuit. The click-pattern
// table is computed once; trials invert its CDF with counter-based
// variates, so results are bit-identical for any n_threads. Throws
// NumericRefusal when the truncation leakage exceeds 1e-4.
CountsReport run_trials(const TrialPlan& plan);

// Runs each plan in order.
std::vector<CountsReport> run_sweep(const std::vector<TrialPlan>& plans);

// W_perp estimate from two blocked runs. error is a bootstrap standard
// error; degenerate flags a run pair with no four-fold events, where the
// relative error is unbounded and callers must not divide.
struct WperpEstimate {
    double value = 0.0;
    double error = 0.0;
    std::uint64_t quad_count = 0;
    std::uint64_t n_pairs = 0;
    bool degenerate = false;
};

// Pairs trial i of the blocked-A run with trial perm(i) of the blocked-B
// run under a fixed pseudorandom permutation, counts pairs whose combined
// clicks cover D1..D4, and bootstraps the rate. The reports must hold one
// blocked_a and one blocked_b run (either order) with equal n_trials.
// Per-trial patterns are regenerated from the plans' streams, so the
// estimate is a pure function of the two plans.
WperpEstimate estimate_w_perp(const CountsReport& first,
                              const CountsReport& second,
                              int bootstrap_rounds = 200);

// sqrt(p (1 - p) / n), clamped against round-off.
double binomial_error(double p, std::uint64_t n);

// Standard error of a/b from independent absolute errors on a and b.
double ratio_error(double a, double a_err, double b, double b_err);

} // namespace homsim
