#pragma once

#include "homsim/fock.hpp"
#include "homsim/rates.hpp"

#include <map>
#include <string>
#include <vector>

namespace homsim {

// blocked_a / blocked_b block that site's source (its squeezer is off); the
// other site runs alone. Used for the independent-source W_perp benchmark.
enum class Scenario { parallel, perpendicular, blocked_a, blocked_b };

const char* scenario_name(Scenario scenario);

// Assembled experiment: the state after the full circuit, threshold
// detectors D1, D2 (signal ports), D3, D4 (site A / B idlers) in that order,
// and matching weighted mode groups for the flux observable.
struct ExperimentSetup {
    FockState state;
    std::vector<Detector> detectors;
    std::vector<std::map<int, double>> flux_groups;
    // Routed detectors (perpendicular / blocked circuits) share source modes
    // with split efficiencies; click_pattern_probabilities needs the flag.
    bool shared_mode_detectors = false;
    std::string warning;
};

// Compact circuit: one signal and one spin-wave mode per site. Terminal
// chains (memory decay, retrieval, idler detection; and for the
// non-interfering configurations the beamsplitter routing itself) are folded
// into per-detector per-mode efficiencies of the threshold POVM, which is
// exact for these Fock-diagonal measurements. Signal loss must act before
// the interfering beamsplitter, so for the parallel configuration it is
// folded into the port detectors only when eps_a == eps_b and otherwise
// played out on purification ancillas.
ExperimentSetup build_folded(const ExperimentConfig& config, Scenario scenario,
                             int cutoff);

// Literal circuit: per-polarization signal modes, explicit half-wave
// rotation (perpendicular and blocked), per-polarization beamsplitters,
// purification loss ancillas, spin decay, and retrieval onto idler modes.
// Much larger state; kept as the cross-check oracle for build_folded.
ExperimentSetup build_literal(const ExperimentConfig& config, Scenario scenario,
                              int cutoff);

// sinh^2(chi cos eta) * 3 > cutoff for either site: occupation beyond the
// truncation then carries non-negligible mass. The builders attach a warning
// (never an error); the reported norm_deficit bounds the damage.
bool cutoff_too_small(const ExperimentConfig& config, int cutoff);

} // namespace homsim
