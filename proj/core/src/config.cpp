#include "homsim/config.hpp"

#include "homsim/wavepacket.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace homsim {

ConfigError::ConfigError(const std::string& msg, int line_number)
    : std::runtime_error(line_number > 0
                             ? msg + " (line " + std::to_string(line_number) + ")"
                             : msg),
      line(line_number) {}

const char* run_mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::analytic: return "analytic";
        case RunMode::fock: return "fock";
        case RunMode::montecarlo: return "montecarlo";
        case RunMode::compare: return "compare";
    }
    return "?";
}

RunMode parse_run_mode(const std::string& text) {
    if (text == "analytic") return RunMode::analytic;
    if (text == "fock") return RunMode::fock;
    if (text == "montecarlo") return RunMode::montecarlo;
    if (text == "compare") return RunMode::compare;
    throw ConfigError("mode must be one of analytic, fock, montecarlo, compare; got '" +
                      text + "'");
}

RunConfig default_run_config() { return RunConfig{}; }

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line;
};

std::string locate(const Entry& e) { return "[" + e.section + "] " + e.key; }

double parse_double(const Entry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw ConfigError(locate(e) + ": expected a number, got '" + e.value + "'",
                          e.line);
    return v;
}

std::uint64_t parse_u64(const Entry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0' || errno == ERANGE || e.value[0] == '-')
        throw ConfigError(locate(e) + ": expected a non-negative integer, got '" +
                              e.value + "'",
                          e.line);
    return static_cast<std::uint64_t>(v);
}

int parse_bounded_int(const Entry& e, int lo, int hi) {
    const std::uint64_t v = parse_u64(e);
    if (v < static_cast<std::uint64_t>(lo) || v > static_cast<std::uint64_t>(hi))
        throw ConfigError(locate(e) + " must lie in [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "], got " + e.value,
                          e.line);
    return static_cast<int>(v);
}

double parse_in_range(const Entry& e, double lo, double hi) {
    const double v = parse_double(e);
    if (v < lo || v > hi) {
        std::ostringstream msg;
        msg << locate(e) << " must lie in [" << lo << ", " << hi << "], got "
            << e.value;
        throw ConfigError(msg.str(), e.line);
    }
    return v;
}

double parse_positive(const Entry& e) {
    const double v = parse_double(e);
    if (v <= 0.0)
        throw ConfigError(locate(e) + " must be positive, got " + e.value, e.line);
    return v;
}

double parse_non_negative(const Entry& e) {
    const double v = parse_double(e);
    if (v < 0.0)
        throw ConfigError(locate(e) + " must be non-negative, got " + e.value,
                          e.line);
    return v;
}

// Wavepacket parameters accumulate across [sites] / [site_a] / [site_b]
// before the immutable Wavepacket is built.
struct StagedPacket {
    std::string shape = "gaussian";
    double center = 0.0;
    double width = 50e-9;
};

struct Parser {
    RunConfig config;
    StagedPacket packet_a, packet_b;

    void apply_run(const Entry& e) {
        if (e.key == "mode") {
            try {
                config.mode = parse_run_mode(e.value);
            } catch (const ConfigError& err) {
                throw ConfigError(err.what(), e.line);
            }
        } else if (e.key == "seed") {
            config.seed = parse_u64(e);
        } else if (e.key == "cutoff") {
            config.cutoff = parse_bounded_int(e, 2, 16);
        } else if (e.key == "trials") {
            config.n_trials = parse_u64(e);
            if (config.n_trials < 1)
                throw ConfigError(locate(e) + " must be at least 1", e.line);
        } else if (e.key == "threads") {
            config.n_threads = parse_bounded_int(e, 1, 256);
        } else if (e.key == "out") {
            config.out_dir = e.value;
        } else if (e.key == "dark_rate") {
            const double v = parse_in_range(e, 0.0, 1.0);
            config.dark_rate = {v, v, v, v};
        } else if (e.key == "dark_rate_d1") {
            config.dark_rate[0] = parse_in_range(e, 0.0, 1.0);
        } else if (e.key == "dark_rate_d2") {
            config.dark_rate[1] = parse_in_range(e, 0.0, 1.0);
        } else if (e.key == "dark_rate_d3") {
            config.dark_rate[2] = parse_in_range(e, 0.0, 1.0);
        } else if (e.key == "dark_rate_d4") {
            config.dark_rate[3] = parse_in_range(e, 0.0, 1.0);
        } else {
            unknown_key(e);
        }
    }

    void apply_experiment(const Entry& e) {
        if (e.key == "reflectance") {
            config.experiment.reflectance = parse_in_range(e, 0.0, 1.0);
        } else if (e.key == "polarization") {
            if (e.value == "parallel")
                config.experiment.polarization = PolarizationConfig::parallel;
            else if (e.value == "perpendicular")
                config.experiment.polarization = PolarizationConfig::perpendicular;
            else
                throw ConfigError(locate(e) +
                                      " must be parallel or perpendicular, got '" +
                                      e.value + "'",
                                  e.line);
        } else if (e.key == "delta_t") {
            config.experiment.delta_t = parse_non_negative(e);
        } else {
            unknown_key(e);
        }
    }

    void apply_site(EnsembleParams& site, StagedPacket& packet, const Entry& e) {
        if (e.key == "chi") {
            site.chi = parse_non_negative(e);
            config.chi_given = true;
        } else if (e.key == "cos2_eta") {
            site.cos_eta = std::sqrt(parse_in_range(e, 0.0, 1.0));
        } else if (e.key == "epsilon") {
            site.epsilon = parse_in_range(e, 0.0, 1.0);
        } else if (e.key == "retrieval_efficiency") {
            site.retrieval_efficiency = parse_in_range(e, 0.0, 1.0);
        } else if (e.key == "idler_epsilon") {
            site.idler_epsilon = parse_in_range(e, 0.0, 1.0);
        } else if (e.key == "tau_c") {
            site.tau_c = parse_positive(e);
        } else if (e.key == "mode_amplitude") {
            site.mode_amplitude = parse_positive(e);
        } else if (e.key == "wavepacket_shape") {
            if (e.value != "gaussian" && e.value != "square")
                throw ConfigError(locate(e) + " must be gaussian or square, got '" +
                                      e.value + "'",
                                  e.line);
            packet.shape = e.value;
        } else if (e.key == "wavepacket_center") {
            packet.center = parse_double(e);
        } else if (e.key == "wavepacket_width") {
            packet.width = parse_positive(e);
        } else {
            unknown_key(e);
        }
    }

    void apply_sweep(const Entry& e) {
        config.sweep.explicit_section = true;
        if (e.key == "parameter") {
            if (e.value != "p1" && e.value != "chi")
                throw ConfigError(locate(e) + " must be p1 or chi, got '" + e.value +
                                      "'",
                                  e.line);
            config.sweep.parameter = e.value;
        } else if (e.key == "min") {
            config.sweep.min = parse_double(e);
        } else if (e.key == "max") {
            config.sweep.max = parse_double(e);
        } else if (e.key == "points") {
            config.sweep.points = parse_bounded_int(e, 1, 100000);
        } else if (e.key == "scale") {
            if (e.value == "log")
                config.sweep.log_scale = true;
            else if (e.value == "linear")
                config.sweep.log_scale = false;
            else
                throw ConfigError(locate(e) + " must be log or linear, got '" +
                                      e.value + "'",
                                  e.line);
        } else {
            unknown_key(e);
        }
    }

    [[noreturn]] void unknown_key(const Entry& e) {
        throw ConfigError("unknown key '" + e.key + "' in section [" + e.section + "]",
                          e.line);
    }
};

Wavepacket build_packet(const StagedPacket& p) {
    if (p.shape == "square") return Wavepacket::square(p.center, p.width);
    return Wavepacket::gaussian(p.center, p.width);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    static const std::set<std::string> known_sections = {
        "run", "experiment", "sites", "site_a", "site_b", "sweep"};

    std::vector<Entry> entries;
    std::set<std::pair<std::string, std::string>> seen;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_number = 0;
    bool sweep_seen = false;
    while (std::getline(in, raw)) {
        ++line_number;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ": malformed section header '" + line + "'",
                                  line_number);
            section = trim(line.substr(1, line.size() - 2));
            if (!known_sections.count(section))
                throw ConfigError(origin + ": unknown section [" + section + "]",
                                  line_number);
            if (section == "sweep") sweep_seen = true;
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ": expected 'key = value', got '" + line + "'",
                              line_number);
        if (section.empty())
            throw ConfigError(origin + ": key before any [section] header",
                              line_number);
        Entry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
                line_number};
        if (e.key.empty())
            throw ConfigError(origin + ": empty key", line_number);
        if (!seen.insert({e.section, e.key}).second)
            throw ConfigError(origin + ": duplicate key '" + e.key +
                                  "' in section [" + e.section + "]",
                              line_number);
        entries.push_back(std::move(e));
    }

    Parser parser;
    parser.config.sweep.explicit_section = sweep_seen;
    // [sites] entries first so per-site sections override them regardless of
    // their order in the file.
    for (const Entry& e : entries) {
        if (e.section == "sites") {
            parser.apply_site(parser.config.experiment.site_a, parser.packet_a, e);
            parser.apply_site(parser.config.experiment.site_b, parser.packet_b, e);
        }
    }
    for (const Entry& e : entries) {
        if (e.section == "run") parser.apply_run(e);
        else if (e.section == "experiment") parser.apply_experiment(e);
        else if (e.section == "site_a")
            parser.apply_site(parser.config.experiment.site_a, parser.packet_a, e);
        else if (e.section == "site_b")
            parser.apply_site(parser.config.experiment.site_b, parser.packet_b, e);
        else if (e.section == "sweep") parser.apply_sweep(e);
    }

    parser.config.experiment.site_a.wavepacket = build_packet(parser.packet_a);
    parser.config.experiment.site_b.wavepacket = build_packet(parser.packet_b);

    const SweepSpec& sw = parser.config.sweep;
    if (sw.min > sw.max)
        throw ConfigError("[sweep] min must not exceed max");
    if (sw.log_scale && sw.min <= 0.0)
        throw ConfigError("[sweep] min must be positive on a log scale");
    if (sw.parameter == "p1" && sw.min <= 0.0)
        throw ConfigError("[sweep] min must be positive when sweeping p1");
    if (sw.min < 0.0)
        throw ConfigError("[sweep] min must be non-negative");
    try {
        parser.config.experiment.validate();
    } catch (const std::exception& err) {
        throw ConfigError(origin + ": " + err.what());
    }
    return parser.config;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

} // namespace homsim
