#include "homsim/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace homsim {

double binomial_error(double p, std::uint64_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

double ratio_error(double a, double a_err, double b, double b_err) {
    if (b == 0.0) return 0.0;
    const double da = a_err / b;
    const double db = a * b_err / (b * b);
    return std::sqrt(da * da + db * db);
}

double ClickDistribution::at_least(unsigned mask) const {
    double p = 0.0;
    for (unsigned q = 0; q < 16; ++q)
        if ((q & mask) == mask) p += probability[q];
    return p;
}

ClickDistribution ClickDistribution::with_darks(
    const std::array<double, 4>& dark_rate) const {
    bool any = false;
    for (double d : dark_rate) any = any || d > 0.0;
    if (!any) return *this;
    ClickDistribution out;
    out.leakage = leakage;
    for (unsigned q = 0; q < 16; ++q) {
        const double pq = probability[q];
        if (pq == 0.0) continue;
        // Darks only add clicks: mass moves from q to its supersets.
        for (unsigned p = q; p < 16; ++p) {
            if ((p & q) != q) continue;
            double w = pq;
            for (unsigned k = 0; k < 4; ++k) {
                if (q & (1u << k)) continue;
                w *= (p & (1u << k)) ? dark_rate[k] : 1.0 - dark_rate[k];
            }
            out.probability[p] += w;
        }
    }
    return out;
}

ClickDistribution exact_click_distribution(const ExperimentConfig& config,
                                           Scenario scenario, int cutoff) {
    ExperimentSetup setup = build_folded(config, scenario, cutoff);
    const std::vector<double> probs = setup.state.click_pattern_probabilities(
        setup.detectors, setup.shared_mode_detectors);
    ClickDistribution dist;
    double total = 0.0;
    for (unsigned q = 0; q < 16; ++q) {
        dist.probability[q] = std::max(0.0, probs[q]);
        total += dist.probability[q];
    }
    dist.leakage = std::max(0.0, 1.0 - total);
    return dist;
}

double w_perp_exact(const ClickDistribution& blocked_a,
                    const ClickDistribution& blocked_b) {
    double w = 0.0;
    for (unsigned qa = 0; qa < 16; ++qa) {
        const double pa = blocked_a.probability[qa];
        if (pa == 0.0) continue;
        for (unsigned qb = 0; qb < 16; ++qb) {
            if (((qa | qb) & 0xFu) == 0xFu) w += pa * blocked_b.probability[qb];
        }
    }
    return w;
}

namespace {

constexpr double kLeakageLimit = 1e-4;

// Shared per-run sampling machinery: CDF of the 16 base patterns plus the
// dark streams. sample(i) is a pure function of (plan, i).
struct PatternContext {
    std::array<double, 16> cdf{};
    CounterStream pattern_stream;
    CounterStream dark_stream;
    std::array<double, 4> dark_rate{};
    bool any_dark = false;
    ClickDistribution base;

    int sample(std::uint64_t trial) const {
        const double u = pattern_stream.uniform(trial);
        int pattern = 0;
        for (int q = 0; q < 16; ++q) {
            if (u < cdf[q]) {
                pattern = q;
                break;
            }
        }
        // u beyond cdf[15] lands in the truncation leakage; counted as
        // all-silent, an error bounded by the refusal threshold.
        if (any_dark) {
            for (unsigned k = 0; k < 4; ++k) {
                if (dark_rate[k] > 0.0 &&
                    dark_stream.uniform(trial, k + 1) < dark_rate[k])
                    pattern |= 1 << k;
            }
        }
        return pattern;
    }
};

PatternContext make_context(const TrialPlan& plan) {
    PatternContext ctx;
    ctx.base = exact_click_distribution(plan.config, plan.scenario, plan.cutoff);
    if (ctx.base.leakage > kLeakageLimit) {
        std::ostringstream msg;
        msg << "truncation leakage " << ctx.base.leakage << " at cutoff "
            << plan.cutoff << " exceeds " << kLeakageLimit
            << "; sampled patterns would misrepresent the state. Raise the "
               "cutoff or reduce the squeezing.";
        throw NumericRefusal(msg.str());
    }
    double cum = 0.0;
    for (int q = 0; q < 16; ++q) {
        cum += ctx.base.probability[q];
        ctx.cdf[q] = cum;
    }
    ctx.pattern_stream = CounterStream(plan.seed, plan.run_tag, StreamPurpose::pattern);
    ctx.dark_stream = CounterStream(plan.seed, plan.run_tag, StreamPurpose::dark);
    ctx.dark_rate = plan.dark_rate;
    for (double d : plan.dark_rate) ctx.any_dark = ctx.any_dark || d > 0.0;
    return ctx;
}

struct Tally {
    std::array<std::uint64_t, 4> singles{};
    std::uint64_t pair_12 = 0;
    std::uint64_t pair_34 = 0;
    std::uint64_t quad = 0;

    void add(int pattern) {
        for (int k = 0; k < 4; ++k)
            if (pattern & (1 << k)) ++singles[k];
        if ((pattern & 0x3) == 0x3) ++pair_12;
        if ((pattern & 0xC) == 0xC) ++pair_34;
        if (pattern == 0xF) ++quad;
    }

    void merge(const Tally& other) {
        for (int k = 0; k < 4; ++k) singles[k] += other.singles[k];
        pair_12 += other.pair_12;
        pair_34 += other.pair_34;
        quad += other.quad;
    }
};

// Splits [0, n) into even chunks and runs fn(chunk_index, lo, hi) on worker
// threads. With one thread, runs inline.
template <typename Fn>
void parallel_chunks(std::uint64_t n, int n_threads, Fn fn) {
    const int workers = std::max(1, n_threads);
    if (workers == 1 || n < 2) {
        fn(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int b = 0; b < workers; ++b) {
        const std::uint64_t lo = n * static_cast<std::uint64_t>(b) / workers;
        const std::uint64_t hi = n * static_cast<std::uint64_t>(b + 1) / workers;
        pool.emplace_back([fn, b, lo, hi] { fn(b, lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

CountsReport run_trials(const TrialPlan& plan) {
    if (plan.n_trials < 1)
        throw std::invalid_argument("run_trials: n_trials must be at least 1");
    const PatternContext ctx = make_context(plan);

    const std::uint64_t n = plan.n_trials;
    const int workers = std::max(1, plan.n_threads);
    std::vector<Tally> blocks(static_cast<std::size_t>(workers));
    parallel_chunks(n, workers, [&](int b, std::uint64_t lo, std::uint64_t hi) {
        Tally t;
        for (std::uint64_t i = lo; i < hi; ++i) t.add(ctx.sample(i));
        blocks[static_cast<std::size_t>(b)] = t;
    });
    Tally total;
    for (const Tally& t : blocks) total.merge(t);

    CountsReport report;
    report.plan = plan;
    report.singles = total.singles;
    report.pair_12 = total.pair_12;
    report.pair_34 = total.pair_34;
    report.quad_1234 = total.quad;
    const double dn = static_cast<double>(n);
    const double r1 = static_cast<double>(total.singles[0]) / dn;
    const double r2 = static_cast<double>(total.singles[1]) / dn;
    report.p1_hat = r1 + r2;
    report.p1_hat_err = std::sqrt(std::max(0.0, r1 * (1.0 - r1)) +
                                  std::max(0.0, r2 * (1.0 - r2))) /
                        std::sqrt(dn);
    report.pair_12_rate = static_cast<double>(total.pair_12) / dn;
    report.pair_12_err = binomial_error(report.pair_12_rate, n);
    report.quad_rate = static_cast<double>(total.quad) / dn;
    report.quad_err = binomial_error(report.quad_rate, n);
    report.distribution = ctx.base.with_darks(plan.dark_rate);
    return report;
}

std::vector<CountsReport> run_sweep(const std::vector<TrialPlan>& plans) {
    std::vector<CountsReport> reports;
    reports.reserve(plans.size());
    for (const TrialPlan& plan : plans) reports.push_back(run_trials(plan));
    return reports;
}

WperpEstimate estimate_w_perp(const CountsReport& first,
                              const CountsReport& second,
                              int bootstrap_rounds) {
    const bool forward = first.plan.scenario == Scenario::blocked_a &&
                         second.plan.scenario == Scenario::blocked_b;
    const bool backward = first.plan.scenario == Scenario::blocked_b &&
                          second.plan.scenario == Scenario::blocked_a;
    if (!forward && !backward)
        throw std::invalid_argument(
            "estimate_w_perp: needs one blocked_a and one blocked_b run");
    const CountsReport& run_a = forward ? first : second;
    const CountsReport& run_b = forward ? second : first;
    if (run_a.plan.n_trials != run_b.plan.n_trials)
        throw std::invalid_argument(
            "estimate_w_perp: blocked runs must have equal n_trials");
    if (bootstrap_rounds < 2)
        throw std::invalid_argument(
            "estimate_w_perp: needs at least 2 bootstrap rounds");

    const std::uint64_t n = run_a.plan.n_trials;
    if (n > 0xFFFFFFFFull)
        throw std::invalid_argument(
            "estimate_w_perp: pairing supports at most 2^32 trials");

    auto regenerate = [](const TrialPlan& plan) {
        const PatternContext ctx = make_context(plan);
        std::vector<std::uint8_t> out(plan.n_trials);
        parallel_chunks(plan.n_trials, plan.n_threads,
                        [&](int, std::uint64_t lo, std::uint64_t hi) {
                            for (std::uint64_t i = lo; i < hi; ++i)
                                out[i] = static_cast<std::uint8_t>(ctx.sample(i));
                        });
        return out;
    };
    const std::vector<std::uint8_t> pat_a = regenerate(run_a.plan);
    const std::vector<std::uint8_t> pat_b = regenerate(run_b.plan);

    // Canonical streams: keyed by the blocked_a run's seed and the XOR of
    // the two run tags, so the estimate ignores argument order.
    const std::uint64_t joint_tag = run_a.plan.run_tag ^ run_b.plan.run_tag;
    CounterStream pair_stream(run_a.plan.seed, joint_tag, StreamPurpose::pairing);
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::uint64_t i = n - 1; i > 0; --i) {
        const double u = pair_stream.uniform(i);
        std::uint64_t j = static_cast<std::uint64_t>(u * static_cast<double>(i + 1));
        if (j > i) j = i;
        std::swap(perm[i], perm[j]);
    }

    std::uint64_t quad = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        if (((pat_a[i] | pat_b[perm[i]]) & 0xFu) == 0xFu) ++quad;
    }

    WperpEstimate est;
    est.n_pairs = n;
    est.quad_count = quad;
    est.value = static_cast<double>(quad) / static_cast<double>(n);
    if (quad == 0) {
        est.degenerate = true;
        return est;
    }

    // Parametric bootstrap of the pair rate: Bernoulli resampling with the
    // observed rate, one counter range per round.
    CounterStream boot_stream(run_a.plan.seed, joint_tag, StreamPurpose::bootstrap);
    const int rounds = bootstrap_rounds;
    const double p_hat = est.value;
    std::vector<double> rates(static_cast<std::size_t>(rounds));
    parallel_chunks(static_cast<std::uint64_t>(rounds), run_a.plan.n_threads,
                    [&](int, std::uint64_t lo, std::uint64_t hi) {
                        for (std::uint64_t r = lo; r < hi; ++r) {
                            std::uint64_t k = 0;
                            for (std::uint64_t i = 0; i < n; ++i)
                                if (boot_stream.uniform(r * n + i) < p_hat) ++k;
                            rates[r] = static_cast<double>(k) / static_cast<double>(n);
                        }
                    });
    double mean = 0.0;
    for (double r : rates) mean += r;
    mean /= rounds;
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    est.error = std::sqrt(var / rounds);
    return est;
}

} // namespace homsim
