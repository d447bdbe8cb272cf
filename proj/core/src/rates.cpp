#include "homsim/rates.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace homsim {

double EnsembleParams::squeeze_parameter() const { return chi * cos_eta; }

double EnsembleParams::s() const { return std::sinh(squeeze_parameter()); }

double EnsembleParams::s2() const {
    const double v = s();
    return v * v;
}

double EnsembleParams::signal_weight() const {
    return mode_amplitude * mode_amplitude * s2();
}

namespace {

void check_probability(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0))
        throw std::domain_error(std::string(name) + " must lie in [0,1], got " +
                                std::to_string(value));
}

} // namespace

void EnsembleParams::validate() const {
    if (!(chi >= 0.0) || !std::isfinite(chi))
        throw std::domain_error("chi must be finite and >= 0");
    if (!(cos_eta >= 0.0 && cos_eta <= 1.0))
        throw std::domain_error("cos_eta must lie in [0,1]");
    check_probability(epsilon, "epsilon");
    check_probability(retrieval_efficiency, "retrieval_efficiency");
    check_probability(idler_epsilon, "idler_epsilon");
    if (!(tau_c > 0.0)) throw std::domain_error("tau_c must be > 0");
    if (!(mode_amplitude > 0.0))
        throw std::domain_error("mode_amplitude must be > 0");
}

void ExperimentConfig::validate() const {
    if (!(reflectance >= 0.0 && reflectance <= 1.0))
        throw std::domain_error("reflectance must lie in [0,1]");
    if (!(delta_t >= 0.0)) throw std::domain_error("delta_t must be >= 0");
    site_a.validate();
    site_b.validate();
}

double g12_hom_term(const ExperimentConfig& config, double t, double tau) {
    const double T = config.transmittance();
    const double R = config.reflectance;
    const EnsembleParams& A = config.site_a;
    const EnsembleParams& B = config.site_b;
    const double amp = T * A.wavepacket.amplitude(t + tau) * B.wavepacket.amplitude(t) -
                       R * B.wavepacket.amplitude(t + tau) * A.wavepacket.amplitude(t);
    const double ea2 = A.mode_amplitude * A.mode_amplitude;
    const double eb2 = B.mode_amplitude * B.mode_amplitude;
    return ea2 * eb2 * amp * amp * A.s2() * B.s2();
}

double g12_multiphoton_term(const ExperimentConfig& config, double t, double tau) {
    const double T = config.transmittance();
    const double R = config.reflectance;
    const EnsembleParams& A = config.site_a;
    const EnsembleParams& B = config.site_b;
    const double fa = A.wavepacket.amplitude(t + tau) * A.wavepacket.amplitude(t);
    const double fb = B.wavepacket.amplitude(t + tau) * B.wavepacket.amplitude(t);
    const double wa = A.signal_weight();
    const double wb = B.signal_weight();
    return 2.0 * R * T * (wa * wa * fa * fa + wb * wb * fb * fb);
}

double g12_parallel(const ExperimentConfig& config, double t, double tau) {
    return g12_hom_term(config, t, tau) + g12_multiphoton_term(config, t, tau);
}

double g12_perpendicular(const ExperimentConfig& config, double t, double tau) {
    const double T = config.transmittance();
    const double R = config.reflectance;
    const EnsembleParams& A = config.site_a;
    const EnsembleParams& B = config.site_b;
    const double ab = A.wavepacket.amplitude(t + tau) * B.wavepacket.amplitude(t);
    const double ba = B.wavepacket.amplitude(t + tau) * A.wavepacket.amplitude(t);
    const double ea2 = A.mode_amplitude * A.mode_amplitude;
    const double eb2 = B.mode_amplitude * B.mode_amplitude;
    const double no_interference =
        ea2 * eb2 * (T * T * ab * ab + R * R * ba * ba) * A.s2() * B.s2();
    return no_interference + g12_multiphoton_term(config, t, tau);
}

namespace {

struct Window {
    double t_lo, t_hi;
    double tau_lo, tau_hi;
};

Window integration_window(const ExperimentConfig& config) {
    const double lo = std::min(config.site_a.wavepacket.support_lo(),
                               config.site_b.wavepacket.support_lo());
    const double hi = std::max(config.site_a.wavepacket.support_hi(),
                               config.site_b.wavepacket.support_hi());
    return {lo, hi, lo - hi, hi - lo};
}

// Magnitude of the integrated rates; sets the absolute quadrature tolerance.
double rate_scale(const ExperimentConfig& config) {
    const double wa = config.site_a.signal_weight();
    const double wb = config.site_b.signal_weight();
    const double R = config.reflectance, T = config.transmittance();
    return wa * wb + 2.0 * R * T * (wa * wa + wb * wb);
}

template <typename Density>
double integrate_density(const ExperimentConfig& config, Density&& density) {
    const Window w = integration_window(config);
    if (!(w.t_hi > w.t_lo)) return 0.0;
    const double scale = rate_scale(config);
    if (scale == 0.0) return 0.0;
    const double tol = 1e-9 * scale;
    const double t_span = w.t_hi - w.t_lo;
    const double inner_tol = 0.5 * tol / t_span;
    return integrate(
        [&](double t) {
            return integrate([&](double tau) { return density(config, t, tau); },
                             w.tau_lo, w.tau_hi, inner_tol);
        },
        w.t_lo, w.t_hi, 0.5 * tol);
}

} // namespace

double integrated_two_fold_parallel(const ExperimentConfig& config) {
    return integrate_density(config, [](const ExperimentConfig& c, double t, double tau) {
        return g12_parallel(c, t, tau);
    });
}

double integrated_two_fold_perpendicular(const ExperimentConfig& config) {
    return integrate_density(config, [](const ExperimentConfig& c, double t, double tau) {
        return g12_perpendicular(c, t, tau);
    });
}

double two_fold_ratio_closed_form(const ExperimentConfig& config) {
    if (!config.site_a.wavepacket.same_profile_as(config.site_b.wavepacket))
        throw std::invalid_argument(
            "two_fold_ratio_closed_form: wavepackets differ between sites; "
            "use integrated_two_fold_ratio");
    const double wa = config.site_a.signal_weight();
    const double wb = config.site_b.signal_weight();
    const double R = config.reflectance, T = config.transmittance();
    const double multi = 2.0 * R * T * (wa * wa + wb * wb);
    const double diff = T - R;
    const double num = diff * diff * wa * wb + multi;
    const double den = (T * T + R * R) * wa * wb + multi;
    if (den == 0.0) return 0.0;
    return num / den;
}

double integrated_two_fold_ratio(const ExperimentConfig& config) {
    const double den = integrated_two_fold_perpendicular(config);
    if (den == 0.0) return 0.0;
    const double quad = integrated_two_fold_parallel(config) / den;
    if (config.site_a.wavepacket.same_profile_as(config.site_b.wavepacket)) {
        const double closed = two_fold_ratio_closed_form(config);
        if (std::abs(quad - closed) > 1e-6)
            throw QuadratureError(
                "integrated_two_fold_ratio: quadrature " + std::to_string(quad) +
                " disagrees with the closed form " + std::to_string(closed) +
                " beyond 1e-6");
        return closed;
    }
    return quad;
}

double memory_decay_factor(double delta_t, double tau_c) {
    if (!(tau_c > 0.0)) throw std::domain_error("tau_c must be > 0");
    if (!(delta_t >= 0.0)) throw std::domain_error("delta_t must be >= 0");
    return std::exp(-delta_t / tau_c);
}

double idler_detection_probability(const EnsembleParams& site, double delta_t) {
    const double decay = memory_decay_factor(delta_t, site.tau_c);
    return decay * decay * site.retrieval_efficiency * site.idler_epsilon;
}

namespace {

void require_identical_wavepackets(const ExperimentConfig& config,
                                   const char* where) {
    if (!config.site_a.wavepacket.same_profile_as(config.site_b.wavepacket))
        throw std::invalid_argument(
            std::string(where) +
            ": the four-fold closed forms assume identical wavepackets; "
            "mismatched profiles are supported only by the time-resolved "
            "two-fold path (g12_*)");
}

double four_fold_prefactor(const ExperimentConfig& config) {
    return config.site_a.epsilon * config.site_b.epsilon *
           idler_detection_probability(config.site_a, config.delta_t) *
           idler_detection_probability(config.site_b, config.delta_t);
}

double four_fold_braces(double port_coeff, double s2a, double s2b, double R,
                        double T) {
    return port_coeff * (1.0 + 2.0 * s2a) * (1.0 + 2.0 * s2b) +
           2.0 * R * T *
               (3.0 * s2a * s2a + 3.0 * s2b * s2b + 2.0 * s2a + 2.0 * s2b);
}

} // namespace

double four_fold_parallel(const ExperimentConfig& config) {
    require_identical_wavepackets(config, "four_fold_parallel");
    const double R = config.reflectance, T = config.transmittance();
    const double s2a = config.site_a.s2(), s2b = config.site_b.s2();
    const double diff = R - T;
    return four_fold_prefactor(config) * s2a * s2b *
           four_fold_braces(diff * diff, s2a, s2b, R, T);
}

double four_fold_perpendicular(const ExperimentConfig& config) {
    require_identical_wavepackets(config, "four_fold_perpendicular");
    const double R = config.reflectance, T = config.transmittance();
    const double s2a = config.site_a.s2(), s2b = config.site_b.s2();
    return four_fold_prefactor(config) * s2a * s2b *
           four_fold_braces(R * R + T * T, s2a, s2b, R, T);
}

double p1(const ExperimentConfig& config) {
    return config.site_a.epsilon * config.site_a.s2() +
           config.site_b.epsilon * config.site_b.s2();
}

SitePatternStats geometric_site_stats(double lambda, double p_d1, double p_d2,
                                      double p_idler) {
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw std::domain_error("geometric_site_stats: lambda must lie in [0,1)");
    check_probability(p_d1, "p_d1");
    check_probability(p_d2, "p_d2");
    check_probability(p_idler, "p_idler");
    if (p_d1 + p_d2 > 1.0 + 1e-12)
        throw std::domain_error(
            "geometric_site_stats: p_d1 + p_d2 exceeds 1 (a signal photon is "
            "routed to at most one detector)");

    // P(every detector in the silent set S stays silent): each of the n
    // signal photons misses the silent signal detectors with probability
    // f_s, each of the n idler photons misses a silent idler with f_i;
    // summing the geometric series gives (1-lambda) / (1 - lambda f_s f_i).
    auto silent = [&](unsigned set) {
        double f_s = 1.0;
        if (set & 1u) f_s -= p_d1;
        if (set & 2u) f_s -= p_d2;
        const double f_i = (set & 4u) ? 1.0 - p_idler : 1.0;
        return (1.0 - lambda) / (1.0 - lambda * f_s * f_i);
    };

    SitePatternStats stats;
    for (unsigned pattern = 0; pattern < 8; ++pattern) {
        const unsigned clicked = pattern;
        const unsigned rest = (~pattern) & 7u;
        double p = 0.0;
        unsigned S = clicked;
        while (true) {
            const int bits = static_cast<int>(std::popcount(S));
            p += ((bits % 2 == 0) ? 1.0 : -1.0) * silent(rest | S);
            if (S == 0) break;
            S = (S - 1) & clicked;
        }
        stats.probability[pattern] = std::max(0.0, p);
    }
    return stats;
}

SitePatternStats single_site_stats(const ExperimentConfig& config, Site active) {
    const EnsembleParams& site =
        (active == Site::a) ? config.site_a : config.site_b;
    const double T = config.transmittance(), R = config.reflectance;
    const double to_port1 = (active == Site::a) ? T : R;
    const double to_port2 = (active == Site::a) ? R : T;
    const double s2 = site.s2();
    const double lambda = s2 / (1.0 + s2);
    return geometric_site_stats(lambda, to_port1 * site.epsilon,
                                to_port2 * site.epsilon,
                                idler_detection_probability(site, config.delta_t));
}

double w_perp_benchmark(const SitePatternStats& site_a_stats,
                        const SitePatternStats& site_b_stats) {
    double w = 0.0;
    for (unsigned a = 0; a < 8; ++a) {
        if (!(a & 4u)) continue; // site A idler required
        for (unsigned b = 0; b < 8; ++b) {
            if (!(b & 4u)) continue; // site B idler required
            const unsigned signals = (a | b) & 3u;
            if (signals != 3u) continue; // D1 and D2 from either record
            w += site_a_stats.probability[a] * site_b_stats.probability[b];
        }
    }
    return w;
}

double w_perp_benchmark(const ExperimentConfig& config) {
    return w_perp_benchmark(single_site_stats(config, Site::a),
                            single_site_stats(config, Site::b));
}

RatePrediction predict(const ExperimentConfig& config) {
    config.validate();
    RatePrediction out;
    out.p1 = p1(config);

    const bool same_profile =
        config.site_a.wavepacket.same_profile_as(config.site_b.wavepacket);
    if (same_profile) {
        const double wa = config.site_a.signal_weight();
        const double wb = config.site_b.signal_weight();
        const double R = config.reflectance, T = config.transmittance();
        const double multi = 2.0 * R * T * (wa * wa + wb * wb);
        const double diff = T - R;
        out.two_fold_parallel = diff * diff * wa * wb + multi;
        out.two_fold_perp = (T * T + R * R) * wa * wb + multi;
    } else {
        out.two_fold_parallel = integrated_two_fold_parallel(config);
        out.two_fold_perp = integrated_two_fold_perpendicular(config);
    }
    out.visibility_two_fold =
        (out.two_fold_perp > 0.0)
            ? 1.0 - out.two_fold_parallel / out.two_fold_perp
            : 0.0;

    out.four_fold_valid = same_profile;
    if (same_profile) {
        out.four_fold_parallel = four_fold_parallel(config);
        out.four_fold_perp = four_fold_perpendicular(config);
        out.w_perp = w_perp_benchmark(config);
        out.visibility_four_fold =
            (out.w_perp > 0.0) ? 1.0 - out.four_fold_parallel / out.w_perp : 0.0;
    }
    return out;
}

} // namespace homsim
