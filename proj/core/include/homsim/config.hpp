#pragma once

#include "homsim/rates.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace homsim {

// Configuration rejection with the offending line when known. The CLI maps
// it to its own exit code.
struct ConfigError : std::runtime_error {
    int line;
    explicit ConfigError(const std::string& msg, int line_number = 0);
};

enum class RunMode { analytic, fock, montecarlo, compare };

const char* run_mode_name(RunMode mode);

// Parses one of "analytic", "fock", "montecarlo", "compare".
RunMode parse_run_mode(const std::string& text);

// Sweep axis. Defaults reproduce the standard excitation scan: p1 from
// 0.002 to 0.02 over six log-spaced points.
struct SweepSpec {
    std::string parameter = "p1";  // "p1" or "chi"
    double min = 0.002;
    double max = 0.02;
    int points = 6;
    bool log_scale = true;
    // A [sweep] section appeared; selects a sweep even when chi is set.
    bool explicit_section = false;
};

// Full run description: experiment physics plus execution knobs.
struct RunConfig {
    RunMode mode = RunMode::compare;
    ExperimentConfig experiment;
    SweepSpec sweep;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int cutoff = 4;
    std::uint64_t n_trials = 100000;
    int n_threads = 1;
    std::array<double, 4> dark_rate{0.0, 0.0, 0.0, 0.0};
    // chi was given explicitly; without a [sweep] section the run is a
    // single point at the configured chi.
    bool chi_given = false;
};

RunConfig default_run_config();

// Strict INI subset: [section] headers, key = value pairs, blank lines,
// comments starting with '#' or ';'. Unknown sections, unknown keys,
// duplicate keys, malformed values and out-of-range values are rejected
// with the line number. `origin` names the source in error messages.
RunConfig parse_config_text(const std::string& text, const std::string& origin);

RunConfig parse_config_file(const std::string& path);

} // namespace homsim
