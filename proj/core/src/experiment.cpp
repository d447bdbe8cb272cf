#include "homsim/experiment.hpp"

#include <cmath>
#include <stdexcept>

namespace homsim {

const char* scenario_name(Scenario scenario) {
    switch (scenario) {
    case Scenario::parallel: return "parallel";
    case Scenario::perpendicular: return "perpendicular";
    case Scenario::blocked_a: return "blocked_a";
    case Scenario::blocked_b: return "blocked_b";
    }
    return "?";
}

bool cutoff_too_small(const ExperimentConfig& config, int cutoff) {
    return 3.0 * config.site_a.s2() > cutoff || 3.0 * config.site_b.s2() > cutoff;
}

namespace {

std::string cutoff_warning(const ExperimentConfig& config, int cutoff,
                           const FockState& state) {
    if (!cutoff_too_small(config, cutoff)) return {};
    return "cutoff " + std::to_string(cutoff) +
           " is small for squeeze strength (3*s^2 = " +
           std::to_string(3.0 * std::max(config.site_a.s2(), config.site_b.s2())) +
           "); truncated probability mass <= " +
           std::to_string(state.norm_deficit());
}

double squeeze_of(const EnsembleParams& site, bool blocked) {
    return blocked ? 0.0 : site.squeeze_parameter();
}

} // namespace

ExperimentSetup build_folded(const ExperimentConfig& config, Scenario scenario,
                             int cutoff) {
    config.validate();
    const double R = config.reflectance, T = config.transmittance();
    const double eps_a = config.site_a.epsilon, eps_b = config.site_b.epsilon;
    const double kappa_a = idler_detection_probability(config.site_a, config.delta_t);
    const double kappa_b = idler_detection_probability(config.site_b, config.delta_t);

    ModeRegistry registry(cutoff);
    const int sig_a = registry.add_mode("signal_a");
    const int spin_a = registry.add_mode("spin_a");
    const int sig_b = registry.add_mode("signal_b");
    const int spin_b = registry.add_mode("spin_b");

    FockState state(std::move(registry));
    const double r_a = squeeze_of(config.site_a, scenario == Scenario::blocked_a);
    const double r_b = squeeze_of(config.site_b, scenario == Scenario::blocked_b);
    if (r_a != 0.0) state.apply_two_mode_squeezer(sig_a, spin_a, r_a);
    if (r_b != 0.0) state.apply_two_mode_squeezer(sig_b, spin_b, r_b);

    std::vector<Detector> detectors(4);
    detectors[0].id = "D1";
    detectors[1].id = "D2";
    detectors[2].id = "D3";
    detectors[3].id = "D4";
    detectors[2].mode_efficiency[spin_a] = kappa_a;
    detectors[3].mode_efficiency[spin_b] = kappa_b;

    bool shared = false;
    if (scenario == Scenario::parallel) {
        if (eps_a == eps_b) {
            // Equal signal efficiency commutes through the beamsplitter into
            // the port detectors.
            state.apply_beamsplitter(sig_a, sig_b, R);
            detectors[0].mode_efficiency[sig_a] = eps_a;
            detectors[1].mode_efficiency[sig_b] = eps_b;
        } else {
            if (eps_a < 1.0) state.apply_loss(sig_a, eps_a);
            if (eps_b < 1.0) state.apply_loss(sig_b, eps_b);
            state.apply_beamsplitter(sig_a, sig_b, R);
            detectors[0].mode_efficiency[sig_a] = 1.0;
            detectors[1].mode_efficiency[sig_b] = 1.0;
        }
    } else {
        // No interference: every signal photon routes independently, so the
        // beamsplitter reduces to split detection probabilities.
        detectors[0].mode_efficiency[sig_a] = T * eps_a;
        detectors[0].mode_efficiency[sig_b] = R * eps_b;
        detectors[1].mode_efficiency[sig_a] = R * eps_a;
        detectors[1].mode_efficiency[sig_b] = T * eps_b;
        shared = true;
    }

    std::vector<std::map<int, double>> groups;
    groups.reserve(4);
    for (const Detector& d : detectors) groups.push_back(d.mode_efficiency);

    std::string warning = cutoff_warning(config, cutoff, state);
    return ExperimentSetup{std::move(state), std::move(detectors),
                           std::move(groups), shared, std::move(warning)};
}

ExperimentSetup build_literal(const ExperimentConfig& config, Scenario scenario,
                              int cutoff) {
    config.validate();
    const double R = config.reflectance;

    ModeRegistry registry(cutoff);
    const int sig_a_h = registry.add_mode("signal_a_h");
    const int sig_a_v = registry.add_mode("signal_a_v");
    const int sig_b_h = registry.add_mode("signal_b_h");
    const int sig_b_v = registry.add_mode("signal_b_v");
    const int spin_a = registry.add_mode("spin_a");
    const int spin_b = registry.add_mode("spin_b");
    const int idler_a = registry.add_mode("idler_a");
    const int idler_b = registry.add_mode("idler_b");

    FockState state(std::move(registry));
    const double r_a = squeeze_of(config.site_a, scenario == Scenario::blocked_a);
    const double r_b = squeeze_of(config.site_b, scenario == Scenario::blocked_b);
    if (r_a != 0.0) state.apply_two_mode_squeezer(sig_a_h, spin_a, r_a);
    if (r_b != 0.0) state.apply_two_mode_squeezer(sig_b_h, spin_b, r_b);

    if (config.site_a.epsilon < 1.0) state.apply_loss(sig_a_h, config.site_a.epsilon);
    if (config.site_b.epsilon < 1.0) state.apply_loss(sig_b_h, config.site_b.epsilon);

    // Half-wave rotation of site B's signal for the non-interfering
    // configurations; the blocked calibration runs use the perpendicular
    // arrangement.
    if (scenario != Scenario::parallel)
        state.apply_polarization_rotation(sig_b_h, sig_b_v, M_PI / 2.0);

    state.apply_beamsplitter(sig_a_h, sig_b_h, R);
    state.apply_beamsplitter(sig_a_v, sig_b_v, R);

    auto read_out = [&](const EnsembleParams& site, int spin, int idler) {
        const double decay = memory_decay_factor(config.delta_t, site.tau_c);
        const double decay_transmission = decay * decay;
        if (decay_transmission < 1.0) state.apply_loss(spin, decay_transmission);
        // Retrieval sends the surviving excitation from the spin wave onto
        // the idler mode: beamsplitter reflectance = conversion probability.
        if (site.retrieval_efficiency > 0.0)
            state.apply_beamsplitter(spin, idler, site.retrieval_efficiency);
    };
    read_out(config.site_a, spin_a, idler_a);
    read_out(config.site_b, spin_b, idler_b);

    std::vector<Detector> detectors(4);
    detectors[0].id = "D1";
    detectors[0].mode_efficiency[sig_a_h] = 1.0;
    detectors[0].mode_efficiency[sig_a_v] = 1.0;
    detectors[1].id = "D2";
    detectors[1].mode_efficiency[sig_b_h] = 1.0;
    detectors[1].mode_efficiency[sig_b_v] = 1.0;
    detectors[2].id = "D3";
    detectors[2].mode_efficiency[idler_a] = config.site_a.idler_epsilon;
    detectors[3].id = "D4";
    detectors[3].mode_efficiency[idler_b] = config.site_b.idler_epsilon;

    std::vector<std::map<int, double>> groups;
    groups.reserve(4);
    for (const Detector& d : detectors) groups.push_back(d.mode_efficiency);

    std::string warning = cutoff_warning(config, cutoff, state);
    return ExperimentSetup{std::move(state), std::move(detectors),
                           std::move(groups), false, std::move(warning)};
}

} // namespace homsim
