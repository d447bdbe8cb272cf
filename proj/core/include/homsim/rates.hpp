#pragma once

#include "homsim/wavepacket.hpp"

#include <array>

namespace homsim {

// Per-site source description: squeeze strength chi*cos_eta, detection and
// readout efficiencies, memory lifetime and the temporal profile of the
// write pulse. mode_amplitude is the field scale factor of the rate
// densities; it cancels in every reported ratio.
struct EnsembleParams {
    double chi = 0.0;
    double cos_eta = 0.86365597279487527;    // sqrt(91/122)
    double epsilon = 0.06;                   // signal detection probability
    double retrieval_efficiency = 1.0;       // spin-wave -> idler conversion
    double idler_epsilon = 1.0;              // idler detection probability
    double tau_c = 30e-6;                    // memory coherence time, s
    Wavepacket wavepacket = Wavepacket::gaussian(0.0, 50e-9);
    double mode_amplitude = 1.0;

    double squeeze_parameter() const;        // chi * cos_eta
    double s() const;                        // sinh(chi * cos_eta)
    double s2() const;                       // sinh^2(chi * cos_eta)
    // mode_amplitude^2 * s2: the per-site weight the two-fold rate
    // formulas are homogeneous in.
    double signal_weight() const;

    void validate() const;                   // throws std::domain_error
};

enum class PolarizationConfig { parallel, perpendicular };

struct ExperimentConfig {
    double reflectance = 0.5;
    PolarizationConfig polarization = PolarizationConfig::parallel;
    double delta_t = 100e-9;                 // write -> read delay, s
    EnsembleParams site_a;
    EnsembleParams site_b;

    double transmittance() const { return 1.0 - reflectance; }
    void validate() const;
};

struct RatePrediction {
    double two_fold_parallel = 0.0;
    double two_fold_perp = 0.0;
    double four_fold_parallel = 0.0;
    double four_fold_perp = 0.0;
    double w_perp = 0.0;
    double p1 = 0.0;
    double visibility_two_fold = 0.0;        // 1 - R_par / R_perp
    double visibility_four_fold = 0.0;       // 1 - R4_par / W_perp
    // Four-fold closed forms require identical wavepackets; false means the
    // four-fold and w_perp fields were not computed.
    bool four_fold_valid = true;
};

// Time-resolved two-fold rate density at detection times (t, t+tau).
// g12_parallel = interference (HOM) term + two-photon (multiphoton) term;
// the perpendicular benchmark replaces the squared difference in the HOM
// term by the sum of squares (no interference cross term).
double g12_hom_term(const ExperimentConfig& config, double t, double tau);
double g12_multiphoton_term(const ExperimentConfig& config, double t, double tau);
double g12_parallel(const ExperimentConfig& config, double t, double tau);
double g12_perpendicular(const ExperimentConfig& config, double t, double tau);

// Double integrals of the densities over (t, tau); adaptive Simpson with an
// absolute tolerance of 1e-9 of the integral scale. Throws QuadratureError
// on non-convergence.
double integrated_two_fold_parallel(const ExperimentConfig& config);
double integrated_two_fold_perpendicular(const ExperimentConfig& config);

// Closed form of the integrated ratio for identical wavepacket profiles:
//   [(T-R)^2 wA wB + 2RT (wA^2 + wB^2)] / [(T^2+R^2) wA wB + 2RT (wA^2 + wB^2)]
// with w_X = mode_amplitude_X^2 s_X^2. Throws std::invalid_argument when
// the two sites' profiles differ.
double two_fold_ratio_closed_form(const ExperimentConfig& config);

// Quadrature ratio for arbitrary profiles; for identical profiles the
// quadrature is cross-checked against the closed form to 1e-6 and the
// closed form is returned.
double integrated_two_fold_ratio(const ExperimentConfig& config);

// Integrated four-fold rates, identical wavepackets assumed:
//   parallel:      pref * sA^2 sB^2 {(R-T)^2 (1+2sA^2)(1+2sB^2) + M}
//   perpendicular: pref * sA^2 sB^2 {(R^2+T^2)(1+2sA^2)(1+2sB^2) + M}
//   M = 2RT (3sA^4 + 3sB^4 + 2sA^2 + 2sB^2)
// pref = epsA * epsB * kappaA * kappaB fixes the proportionality constant so
// that the independent-source benchmark w_perp matches to first order; every
// reported observable is a ratio in which pref cancels. Throws
// std::invalid_argument for mismatched wavepackets (the four-fold closed
// forms have no time-resolved counterpart; use the g12_* path instead).
double four_fold_parallel(const ExperimentConfig& config);
double four_fold_perpendicular(const ExperimentConfig& config);

// Spin-wave amplitude transmission exp(-delta_t / tau_c) over the
// write -> read delay.
double memory_decay_factor(double delta_t, double tau_c);

// kappa_X: per-photon probability that a stored excitation of site X ends as
// an idler detection: decay^2 * retrieval_efficiency * idler_epsilon.
double idler_detection_probability(const EnsembleParams& site, double delta_t);

// p1 = epsA sA^2 + epsB sB^2: per-trial singles probability.
double p1(const ExperimentConfig& config);

enum class Site { a, b };

// Exact threshold click statistics of one site measured alone (the other
// source blocked): joint distribution over (D1, D2, own idler) clicks.
// Pattern index bit 0 = D1, bit 1 = D2, bit 2 = idler.
struct SitePatternStats {
    std::array<double, 8> probability{};

    double p(bool d1, bool d2, bool idler) const {
        return probability[(d1 ? 1u : 0u) | (d2 ? 2u : 0u) | (idler ? 4u : 0u)];
    }
};

// Closed form for a two-mode squeezed source with geometric photon number
// statistics (lambda = s^2 / (1 + s^2)) and per-photon detection
// probabilities p_d1, p_d2 (signal arm, p_d1 + p_d2 <= 1) and p_idler.
SitePatternStats geometric_site_stats(double lambda, double p_d1, double p_d2,
                                      double p_idler);

// Site `active` alone behind the beamsplitter: site A reaches port 1 with
// probability T and port 2 with R; site B the reverse.
SitePatternStats single_site_stats(const ExperimentConfig& config, Site active);

// Independent-source benchmark: the four-fold rate of two blocked-run
// records overlaid, requiring (D1 from either) and (D2 from either) and both
// idlers. Equals four_fold_perpendicular to first order in s^2.
double w_perp_benchmark(const SitePatternStats& site_a_stats,
                        const SitePatternStats& site_b_stats);
double w_perp_benchmark(const ExperimentConfig& config);

// Full analytic prediction record.
RatePrediction predict(const ExperimentConfig& config);

} // namespace homsim
