#include "homsim/driver.hpp"

#include "homsim/experiment.hpp"
#include "homsim/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

namespace homsim {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9e", v);
    return buf;
}

std::string cell(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string();
}

struct GridPoint {
    double p1_value = 0.0;
    double chi_a = 0.0;
    double chi_b = 0.0;
};

// chi_a with chi_b = ratio * chi_a such that p1 hits the target.
double solve_chi(const ExperimentConfig& ex, double ratio, double target) {
    const EnsembleParams& a = ex.site_a;
    const EnsembleParams& b = ex.site_b;
    auto p1_of = [&](double chi) {
        const double sa = std::sinh(chi * a.cos_eta);
        const double sb = std::sinh(chi * ratio * b.cos_eta);
        return a.epsilon * sa * sa + b.epsilon * sb * sb;
    };
    double hi = 1e-3;
    while (p1_of(hi) < target) {
        hi *= 2.0;
        if (hi > 64.0)
            throw ConfigError(
                "sweep cannot reach p1 = " + fmt(target) +
                "; check epsilon and cos2_eta (a zero detection efficiency or "
                "mixing angle makes p1 vanish)");
    }
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (p1_of(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<GridPoint> build_grid(const RunConfig& cfg) {
    const ExperimentConfig& ex = cfg.experiment;
    std::vector<GridPoint> grid;
    const bool sweeping = cfg.sweep.explicit_section || !cfg.chi_given;
    if (!sweeping) {
        GridPoint pt{p1(ex), ex.site_a.chi, ex.site_b.chi};
        grid.push_back(pt);
        return grid;
    }
    const double ratio = (ex.site_a.chi > 0.0 && ex.site_b.chi > 0.0)
                             ? ex.site_b.chi / ex.site_a.chi
                             : 1.0;
    for (int i = 0; i < cfg.sweep.points; ++i) {
        double v = cfg.sweep.min;
        if (cfg.sweep.points > 1) {
            const double f =
                static_cast<double>(i) / static_cast<double>(cfg.sweep.points - 1);
            v = cfg.sweep.log_scale
                    ? cfg.sweep.min * std::pow(cfg.sweep.max / cfg.sweep.min, f)
                    : cfg.sweep.min + f * (cfg.sweep.max - cfg.sweep.min);
        }
        GridPoint pt;
        if (cfg.sweep.parameter == "chi") {
            pt.chi_a = v;
            pt.chi_b = v * ratio;
        } else {
            pt.chi_a = solve_chi(ex, ratio, v);
            pt.chi_b = pt.chi_a * ratio;
        }
        ExperimentConfig ec = ex;
        ec.site_a.chi = pt.chi_a;
        ec.site_b.chi = pt.chi_b;
        pt.p1_value = p1(ec);
        grid.push_back(pt);
    }
    return grid;
}

struct PointResult {
    double p1_value = 0.0;
    double s2_max = 0.0;
    std::optional<double> mc2_ratio, mc2_err;
    std::optional<double> analytic2, fock2;
    std::optional<double> mc4_par, mc4_par_err, mc4_perp, mc4_perp_err;
    std::optional<double> a4_par, a4_perp;
};

PointResult compute_point(const RunConfig& cfg, const GridPoint& pt,
                          std::size_t index, std::vector<std::string>& warnings) {
    ExperimentConfig ec = cfg.experiment;
    ec.site_a.chi = pt.chi_a;
    ec.site_b.chi = pt.chi_b;

    PointResult res;
    res.p1_value = pt.p1_value;
    res.s2_max = std::max(ec.site_a.s2(), ec.site_b.s2());
    res.analytic2 = integrated_two_fold_ratio(ec);
    const RatePrediction pred = predict(ec);
    if (pred.four_fold_valid && pred.w_perp > 0.0) {
        res.a4_par = pred.four_fold_parallel / pred.w_perp;
        res.a4_perp = pred.four_fold_perp / pred.w_perp;
    }

    const bool want_fock = cfg.mode == RunMode::fock || cfg.mode == RunMode::compare;
    const bool want_mc =
        cfg.mode == RunMode::montecarlo || cfg.mode == RunMode::compare;
    if ((want_fock || want_mc) && cutoff_too_small(ec, cfg.cutoff)) {
        std::ostringstream w;
        w << "point p1 = " << fmt(pt.p1_value) << ": cutoff " << cfg.cutoff
          << " is small for the requested squeezing; engine results carry "
             "extra truncation error";
        warnings.push_back(w.str());
    }

    if (want_fock) {
        ExperimentSetup par = build_folded(ec, Scenario::parallel, cfg.cutoff);
        ExperimentSetup perp = build_folded(ec, Scenario::perpendicular, cfg.cutoff);
        const double f_par = par.state.flux_correlation(
            {par.flux_groups[0], par.flux_groups[1]});
        const double f_perp = perp.state.flux_correlation(
            {perp.flux_groups[0], perp.flux_groups[1]});
        if (f_perp > 0.0) res.fock2 = f_par / f_perp;
    }

    if (want_mc) {
        auto make_plan = [&](Scenario s, unsigned ordinal) {
            TrialPlan plan;
            plan.n_trials = cfg.n_trials;
            plan.seed = cfg.seed;
            plan.scenario = s;
            plan.config = ec;
            plan.cutoff = cfg.cutoff;
            plan.n_threads = cfg.n_threads;
            plan.dark_rate = cfg.dark_rate;
            plan.run_tag = index * 4 + ordinal;
            return plan;
        };
        const CountsReport par = run_trials(make_plan(Scenario::parallel, 0));
        const CountsReport perp = run_trials(make_plan(Scenario::perpendicular, 1));
        const CountsReport blocked_a = run_trials(make_plan(Scenario::blocked_a, 2));
        const CountsReport blocked_b = run_trials(make_plan(Scenario::blocked_b, 3));
        if (perp.pair_12 > 0) {
            res.mc2_ratio = par.pair_12_rate / perp.pair_12_rate;
            res.mc2_err = ratio_error(par.pair_12_rate, par.pair_12_err,
                                      perp.pair_12_rate, perp.pair_12_err);
        }
        const WperpEstimate w = estimate_w_perp(blocked_a, blocked_b);
        if (!w.degenerate) {
            res.mc4_par = par.quad_rate / w.value;
            res.mc4_par_err =
                ratio_error(par.quad_rate, par.quad_err, w.value, w.error);
            res.mc4_perp = perp.quad_rate / w.value;
            res.mc4_perp_err =
                ratio_error(perp.quad_rate, perp.quad_err, w.value, w.error);
        }
    }
    return res;
}

std::string two_fold_csv(const std::vector<PointResult>& points) {
    std::string out = "p1,ratio_parallel_over_perp,err,analytic_ratio,fock_ratio\n";
    for (const PointResult& r : points) {
        out += fmt(r.p1_value) + "," + cell(r.mc2_ratio) + "," + cell(r.mc2_err) +
               "," + cell(r.analytic2) + "," + cell(r.fock2) + "\n";
    }
    return out;
}

std::string four_fold_csv(const std::vector<PointResult>& points) {
    std::string out =
        "p1,R_par_over_Wperp,err,R_perp_over_Wperp,err,analytic_par,analytic_perp\n";
    for (const PointResult& r : points) {
        out += fmt(r.p1_value) + "," + cell(r.mc4_par) + "," + cell(r.mc4_par_err) +
               "," + cell(r.mc4_perp) + "," + cell(r.mc4_perp_err) + "," +
               cell(r.a4_par) + "," + cell(r.a4_perp) + "\n";
    }
    return out;
}

void echo_site(std::ostream& out, const char* name, const EnsembleParams& site) {
    out << "[" << name << "]\n";
    out << "chi = " << fmt(site.chi) << "\n";
    out << "cos2_eta = " << fmt(site.cos_eta * site.cos_eta) << "\n";
    out << "epsilon = " << fmt(site.epsilon) << "\n";
    out << "retrieval_efficiency = " << fmt(site.retrieval_efficiency) << "\n";
    out << "idler_epsilon = " << fmt(site.idler_epsilon) << "\n";
    out << "tau_c = " << fmt(site.tau_c) << "\n";
    out << "mode_amplitude = " << fmt(site.mode_amplitude) << "\n";
    const Wavepacket& w = site.wavepacket;
    const char* shape = w.shape() == Wavepacket::Shape::gaussian ? "gaussian"
                        : w.shape() == Wavepacket::Shape::square ? "square"
                                                                 : "custom";
    out << "wavepacket = " << shape << " center " << fmt(w.center()) << " width "
        << fmt(w.width()) << "\n";
}

// Derived values are printed as "1 - <cell> = <value>" so every number in
// the report traces to a CSV cell, a config echo, or an arithmetic
// transform cited on its own line.
void print_visibility(std::ostream& out, const char* label, double ratio) {
    out << label << " = 1 - " << fmt(ratio) << " = " << fmt(1.0 - ratio) << "\n";
}

std::string report_text(const RunConfig& cfg, const std::vector<GridPoint>& grid,
                        const std::vector<PointResult>& points) {
    std::ostringstream out;
    out << "homsim run report\n";
    out << "\n[run]\n";
    out << "mode = " << run_mode_name(cfg.mode) << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "cutoff = " << cfg.cutoff << "\n";
    out << "trials = " << cfg.n_trials << "\n";
    out << "threads = " << cfg.n_threads << "\n";
    out << "out = " << cfg.out_dir << "\n";
    for (int k = 0; k < 4; ++k)
        out << "dark_rate_d" << (k + 1) << " = " << fmt(cfg.dark_rate[k]) << "\n";
    out << "\n[experiment]\n";
    out << "reflectance = " << fmt(cfg.experiment.reflectance) << "\n";
    out << "polarization = "
        << (cfg.experiment.polarization == PolarizationConfig::parallel
                ? "parallel"
                : "perpendicular")
        << "\n";
    out << "delta_t = " << fmt(cfg.experiment.delta_t) << "\n";
    out << "\n";
    echo_site(out, "site_a", cfg.experiment.site_a);
    out << "\n";
    echo_site(out, "site_b", cfg.experiment.site_b);
    const bool sweeping = cfg.sweep.explicit_section || !cfg.chi_given;
    out << "\n[sweep]\n";
    if (sweeping) {
        out << "parameter = " << cfg.sweep.parameter << "\n";
        out << "min = " << fmt(cfg.sweep.min) << "\n";
        out << "max = " << fmt(cfg.sweep.max) << "\n";
        out << "points = " << cfg.sweep.points << "\n";
        out << "scale = " << (cfg.sweep.log_scale ? "log" : "linear") << "\n";
    } else {
        out << "single point at the configured chi\n";
    }

    out << "\n[two_fold]\n";
    for (const PointResult& r : points) {
        out << "p1 = " << fmt(r.p1_value) << "\n";
        if (r.mc2_ratio)
            out << "  ratio_parallel_over_perp = " << fmt(*r.mc2_ratio) << " +- "
                << fmt(*r.mc2_err) << "\n";
        if (r.analytic2) {
            out << "  analytic_ratio = " << fmt(*r.analytic2) << "\n";
            print_visibility(out, "  visibility_two_fold(analytic)", *r.analytic2);
        }
        if (r.fock2) out << "  fock_ratio = " << fmt(*r.fock2) << "\n";
        if (r.mc2_ratio)
            print_visibility(out, "  visibility_two_fold(montecarlo)", *r.mc2_ratio);
    }

    out << "\n[four_fold]\n";
    for (const PointResult& r : points) {
        out << "p1 = " << fmt(r.p1_value) << "\n";
        if (r.mc4_par)
            out << "  R_par_over_Wperp = " << fmt(*r.mc4_par) << " +- "
                << fmt(*r.mc4_par_err) << "\n";
        if (r.mc4_perp)
            out << "  R_perp_over_Wperp = " << fmt(*r.mc4_perp) << " +- "
                << fmt(*r.mc4_perp_err) << "\n";
        if (r.a4_par) {
            out << "  analytic_par = " << fmt(*r.a4_par) << "\n";
            print_visibility(out, "  visibility_four_fold(analytic)", *r.a4_par);
        }
        if (r.a4_perp) out << "  analytic_perp = " << fmt(*r.a4_perp) << "\n";
        if (r.mc4_par)
            print_visibility(out, "  visibility_four_fold(montecarlo)", *r.mc4_par);
    }

    out << "\n[oracle]\n";
    bool all_within = true;
    bool any = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const PointResult& r = points[i];
        if (!(r.fock2 && r.analytic2)) continue;
        any = true;
        out << "p1 = " << fmt(r.p1_value) << ": fock_ratio = " << fmt(*r.fock2)
            << " vs analytic_ratio = " << fmt(*r.analytic2) << "\n";
        const double dev = std::abs(*r.fock2 / *r.analytic2 - 1.0);
        if (dev > 3.0 * points[i].s2_max) all_within = false;
    }
    if (!any)
        out << "no engine cross-check in this mode\n";
    else
        out << "all points within the truncation bound: " << (all_within ? "yes" : "NO")
            << "\n";
    (void)grid;
    return out.str();
}

void write_outputs(const RunConfig& cfg,
                   const std::vector<std::pair<std::string, std::string>>& files) {
    const fs::path dir(cfg.out_dir.empty() ? "." : cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir))
        throw ConfigError("cannot create output directory " + dir.string() + ": " +
                          ec.message());

    std::vector<fs::path> cleanup;
    try {
        std::vector<fs::path> temps;
        for (const auto& [name, content] : files) {
            const fs::path tmp = dir / (name + ".tmp");
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw ConfigError("cannot write " + tmp.string() +
                                  "; is the output directory writable?");
            out << content;
            out.flush();
            if (!out) throw ConfigError("write failed for " + tmp.string());
            cleanup.push_back(tmp);
            temps.push_back(tmp);
        }
        for (std::size_t i = 0; i < files.size(); ++i) {
            const fs::path final_path = dir / files[i].first;
            std::error_code rec;
            fs::rename(temps[i], final_path, rec);
            if (rec)
                throw ConfigError("cannot move " + temps[i].string() + " to " +
                                  final_path.string() + ": " + rec.message());
            cleanup[i] = final_path;
        }
    } catch (...) {
        for (const fs::path& p : cleanup) {
            std::error_code rec;
            fs::remove(p, rec);
        }
        throw;
    }
}

}  // namespace

void run(const RunConfig& config) {
    try {
        config.experiment.validate();
    } catch (const std::exception& err) {
        throw ConfigError(err.what());
    }

    const std::vector<GridPoint> grid = build_grid(config);
    std::vector<PointResult> points;
    points.reserve(grid.size());
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < grid.size(); ++i)
        points.push_back(compute_point(config, grid[i], i, warnings));

    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

    write_outputs(config, {{"two_fold.csv", two_fold_csv(points)},
                           {"four_fold.csv", four_fold_csv(points)},
                           {"report.txt", report_text(config, grid, points)}});
}

} // namespace homsim
