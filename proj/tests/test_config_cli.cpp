#include "homsim/config.hpp"
#include "homsim/driver.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace homsim;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text) {
    return parse_config_text(text, "test");
}

int error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& err) {
        return err.line;
    }
    return -1;
}

std::string error_message(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& err) {
        return err.what();
    }
    return "";
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "homsim_cli_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path path = scratch_dir() / name;
    std::ofstream out(path);
    out << text;
    return path;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HOMSIM_CLI_PATH) + " " + args +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9e", v);
    return buf;
}

const std::string kMonteCarloConfig =
    "[run]\n"
    "mode = compare\n"
    "trials = 20000\n"
    "cutoff = 5\n"
    "seed = 12\n"
    "[sites]\n"
    "epsilon = 1.0\n"
    "retrieval_efficiency = 1.0\n"
    "idler_epsilon = 1.0\n"
    "[experiment]\n"
    "delta_t = 0\n"
    "[sweep]\n"
    "parameter = p1\n"
    "min = 0.1\n"
    "max = 0.2\n"
    "points = 2\n"
    "scale = log\n";

}  // namespace

TEST_SUITE("config_cli") {

TEST_CASE("empty input yields the documented defaults") {
    const RunConfig c = parse("");
    CHECK(c.mode == RunMode::compare);
    CHECK(c.seed == 1);
    CHECK(c.cutoff == 4);
    CHECK(c.n_trials == 100000);
    CHECK(c.n_threads == 1);
    CHECK(c.out_dir == ".");
    for (double d : c.dark_rate) CHECK(d == 0.0);
    CHECK_FALSE(c.chi_given);
    CHECK(c.sweep.parameter == "p1");
    CHECK(c.sweep.min == 0.002);
    CHECK(c.sweep.max == 0.02);
    CHECK(c.sweep.points == 6);
    CHECK(c.sweep.log_scale);
    CHECK_FALSE(c.sweep.explicit_section);
    CHECK(c.experiment.reflectance == 0.5);
    CHECK(c.experiment.delta_t == 1e-7);
    for (const EnsembleParams* site :
         {&c.experiment.site_a, &c.experiment.site_b}) {
        CHECK(site->chi == 0.0);
        CHECK(std::abs(site->cos_eta * site->cos_eta - 91.0 / 122.0) < 1e-15);
        CHECK(site->epsilon == 0.06);
        CHECK(site->retrieval_efficiency == 1.0);
        CHECK(site->idler_epsilon == 1.0);
        CHECK(site->tau_c == 30e-6);
        CHECK(site->mode_amplitude == 1.0);
        CHECK(site->wavepacket.shape() == Wavepacket::Shape::gaussian);
        CHECK(site->wavepacket.center() == 0.0);
        CHECK(site->wavepacket.width() == 50e-9);
    }
}

TEST_CASE("every key lands in its field") {
    const RunConfig c = parse(
        "# full configuration\n"
        "[run]\n"
        "mode = montecarlo\n"
        "seed = 99\n"
        "cutoff = 6\n"
        "trials = 1234\n"
        "threads = 3\n"
        "out = results\n"
        "dark_rate = 0.001\n"
        "dark_rate_d3 = 0.002\n"
        "\n"
        "[experiment]\n"
        "reflectance = 0.41\n"
        "polarization = perpendicular\n"
        "delta_t = 2e-7\n"
        "\n"
        "[sites]\n"
        "chi = 0.2\n"
        "cos2_eta = 0.25\n"
        "epsilon = 0.5\n"
        "tau_c = 1e-5\n"
        "\n"
        "[site_b]\n"
        "epsilon = 0.3\n"
        "retrieval_efficiency = 0.8\n"
        "idler_epsilon = 0.7\n"
        "mode_amplitude = 1.5\n"
        "wavepacket_shape = square\n"
        "wavepacket_center = 1e-8\n"
        "wavepacket_width = 8e-8\n"
        "\n"
        "[sweep]\n"
        "parameter = chi\n"
        "min = 0.05\n"
        "max = 0.5\n"
        "points = 4\n"
        "scale = linear\n");
    CHECK(c.mode == RunMode::montecarlo);
    CHECK(c.seed == 99);
    CHECK(c.cutoff == 6);
    CHECK(c.n_trials == 1234);
    CHECK(c.n_threads == 3);
    CHECK(c.out_dir == "results");
    CHECK(c.dark_rate[0] == 0.001);
    CHECK(c.dark_rate[1] == 0.001);
    CHECK(c.dark_rate[2] == 0.002);  // per-detector override wins
    CHECK(c.dark_rate[3] == 0.001);
    CHECK(c.experiment.reflectance == 0.41);
    CHECK(c.experiment.polarization == PolarizationConfig::perpendicular);
    CHECK(c.experiment.delta_t == 2e-7);
    CHECK(c.chi_given);
    // [sites] applies to both, [site_b] refines one
    CHECK(c.experiment.site_a.chi == 0.2);
    CHECK(c.experiment.site_b.chi == 0.2);
    CHECK(c.experiment.site_a.cos_eta == 0.5);
    CHECK(c.experiment.site_a.epsilon == 0.5);
    CHECK(c.experiment.site_b.epsilon == 0.3);
    CHECK(c.experiment.site_a.tau_c == 1e-5);
    CHECK(c.experiment.site_b.retrieval_efficiency == 0.8);
    CHECK(c.experiment.site_b.idler_epsilon == 0.7);
    CHECK(c.experiment.site_b.mode_amplitude == 1.5);
    CHECK(c.experiment.site_b.wavepacket.shape() == Wavepacket::Shape::square);
    CHECK(c.experiment.site_b.wavepacket.center() == 1e-8);
    CHECK(c.experiment.site_b.wavepacket.width() == 8e-8);
    CHECK(c.experiment.site_a.wavepacket.shape() ==
          Wavepacket::Shape::gaussian);
    CHECK(c.sweep.parameter == "chi");
    CHECK(c.sweep.min == 0.05);
    CHECK(c.sweep.max == 0.5);
    CHECK(c.sweep.points == 4);
    CHECK_FALSE(c.sweep.log_scale);
    CHECK(c.sweep.explicit_section);
}

TEST_CASE("per-site keys win regardless of section order") {
    const RunConfig c = parse(
        "[site_b]\n"
        "epsilon = 0.9\n"
        "[sites]\n"
        "epsilon = 0.2\n");
    CHECK(c.experiment.site_a.epsilon == 0.2);
    CHECK(c.experiment.site_b.epsilon == 0.9);
}

TEST_CASE("rejections carry the offending line number") {
    CHECK(error_line("[run]\nmode = warp\n") == 2);
    CHECK(error_line("[run]\nseed = 1\nbogus = 2\n") == 3);
    CHECK(error_line("[surprise]\nx = 1\n") == 1);
    CHECK(error_line("key_without_section = 1\n") == 1);
    CHECK(error_line("[run\nseed = 1\n") == 1);
    CHECK(error_line("[run]\nseed\n") == 2);
    CHECK(error_line("[run]\nseed = twelve\n") == 2);
    CHECK(error_line("[run]\nseed = 1\nseed = 2\n") == 3);
    CHECK(error_line("[experiment]\n\nreflectance = 1.2\n") == 3);
}

TEST_CASE("range errors name the key and the bound") {
    const std::string msg = error_message("[experiment]\nreflectance = 1.2\n");
    CHECK(msg.find("reflectance") != std::string::npos);
    CHECK(msg.find("[0, 1]") != std::string::npos);
    CHECK(msg.find("1.2") != std::string::npos);
    const std::string trials = error_message("[run]\ntrials = 0\n");
    CHECK(trials.find("trials") != std::string::npos);
    const std::string cutoff = error_message("[run]\ncutoff = 1\n");
    CHECK(cutoff.find("cutoff") != std::string::npos);
    CHECK(cutoff.find("[2, 16]") != std::string::npos);
}

TEST_CASE("sweep bounds are validated after parsing") {
    CHECK_THROWS_AS(parse("[sweep]\nmin = 0.1\nmax = 0.01\n"), ConfigError);
    CHECK_THROWS_AS(parse("[sweep]\nmin = 0\nscale = log\n"), ConfigError);
    CHECK_THROWS_AS(parse("[sweep]\nparameter = q\n"), ConfigError);
    CHECK_THROWS_AS(parse("[sweep]\nscale = cubic\n"), ConfigError);
    // p1 = 0 makes every swept ratio 0/0, so zero is only a valid start for
    // a chi sweep
    CHECK_THROWS_AS(parse("[sweep]\nmin = 0\nmax = 1\nscale = linear\n"),
                    ConfigError);
    CHECK_NOTHROW(parse(
        "[sweep]\nparameter = chi\nmin = 0\nmax = 1\nscale = linear\n"));
}

TEST_CASE("run mode names round-trip") {
    for (RunMode m : {RunMode::analytic, RunMode::fock, RunMode::montecarlo,
                      RunMode::compare})
        CHECK(parse_run_mode(run_mode_name(m)) == m);
    CHECK_THROWS_AS(parse_run_mode("fast"), ConfigError);
}

TEST_CASE("missing configuration files are configuration errors") {
    CHECK_THROWS_AS(parse_config_file("/nonexistent/homsim.ini"), ConfigError);
}

TEST_CASE("cli runs the default analytic sweep") {
    const fs::path out = scratch_dir() / "analytic_run";
    fs::remove_all(out);
    CHECK(run_cli("--mode analytic --out " + out.string()) == 0);
    CHECK(fs::exists(out / "two_fold.csv"));
    CHECK(fs::exists(out / "four_fold.csv"));
    CHECK(fs::exists(out / "report.txt"));
    const auto two = split_lines(slurp(out / "two_fold.csv"));
    REQUIRE(two.size() == 7);  // header and six sweep points
    CHECK(two[0] == "p1,ratio_parallel_over_perp,err,analytic_ratio,fock_ratio");
    const auto four = split_lines(slurp(out / "four_fold.csv"));
    REQUIRE(four.size() == 7);
    CHECK(four[0] ==
          "p1,R_par_over_Wperp,err,R_perp_over_Wperp,err,analytic_par,"
          "analytic_perp");
    // analytic mode leaves the sampled and engine columns empty
    CHECK(two[1].find(",,,") != std::string::npos);
}

TEST_CASE("cli rejects broken configurations with exit code 2") {
    const fs::path bad = write_file("bad.ini", "[run]\nwarp = 9\n");
    CHECK(run_cli("--config " + bad.string()) == 2);
    CHECK(run_cli("--config /nonexistent/path.ini") == 2);
    CHECK(run_cli("--cutoff 99") == 2);
}

TEST_CASE("cli refuses under-truncated sampling with exit code 3") {
    const fs::path cfg = write_file(
        "refuse.ini",
        "[run]\nmode = montecarlo\ntrials = 100\n[sites]\nchi = 2.0\n");
    const fs::path out = scratch_dir() / "refused_run";
    fs::remove_all(out);
    CHECK(run_cli("--config " + cfg.string() + " --out " + out.string()) == 3);
    // refusal must not leave partial outputs behind
    CHECK_FALSE(fs::exists(out / "two_fold.csv"));
    CHECK_FALSE(fs::exists(out / "four_fold.csv"));
    CHECK_FALSE(fs::exists(out / "report.txt"));
}

TEST_CASE("cli flags override the configuration file") {
    const fs::path cfg = write_file("override.ini",
                                    "[run]\nmode = montecarlo\ntrials = 777\n"
                                    "seed = 5\n[sites]\nchi = 0.1\n");
    const fs::path out = scratch_dir() / "override_run";
    fs::remove_all(out);
    CHECK(run_cli("--config " + cfg.string() + " --mode analytic" +
                  " --trials 123 --seed 31 --cutoff 5 --out " + out.string()) ==
          0);
    const std::string report = slurp(out / "report.txt");
    CHECK(report.find("mode = analytic") != std::string::npos);
    CHECK(report.find("trials = 123") != std::string::npos);
    CHECK(report.find("seed = 31") != std::string::npos);
    CHECK(report.find("cutoff = 5") != std::string::npos);
    CHECK(report.find("single point at the configured chi") !=
          std::string::npos);
}

TEST_CASE("sampled outputs are byte-identical across reruns and threads") {
    const fs::path cfg = write_file("mc.ini", kMonteCarloConfig);
    const fs::path out1 = scratch_dir() / "mc_run1";
    const fs::path out2 = scratch_dir() / "mc_run2";
    const fs::path out4 = scratch_dir() / "mc_run4";
    for (const fs::path& p : {out1, out2, out4}) fs::remove_all(p);
    REQUIRE(run_cli("--config " + cfg.string() + " --threads 1 --out " +
                    out1.string()) == 0);
    REQUIRE(run_cli("--config " + cfg.string() + " --threads 1 --out " +
                    out2.string()) == 0);
    REQUIRE(run_cli("--config " + cfg.string() + " --threads 4 --out " +
                    out4.string()) == 0);
    const std::string two = slurp(out1 / "two_fold.csv");
    const std::string four = slurp(out1 / "four_fold.csv");
    CHECK(two == slurp(out2 / "two_fold.csv"));
    CHECK(four == slurp(out2 / "four_fold.csv"));
    CHECK(two == slurp(out4 / "two_fold.csv"));
    CHECK(four == slurp(out4 / "four_fold.csv"));
    // the sampled columns must actually contain numbers in this regime
    const auto lines = split_lines(two);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[1].find(",,") == std::string::npos);
}

TEST_CASE("report numbers trace back to the tables or echo the config") {
    const fs::path cfg = write_file("trace.ini", kMonteCarloConfig);
    const fs::path out = scratch_dir() / "trace_run";
    fs::remove_all(out);
    REQUIRE(run_cli("--config " + cfg.string() + " --out " + out.string()) ==
            0);

    std::set<std::string> cells;
    for (const char* name : {"two_fold.csv", "four_fold.csv"}) {
        const auto lines = split_lines(slurp(out / name));
        for (std::size_t i = 1; i < lines.size(); ++i) {
            std::istringstream row(lines[i]);
            std::string cell;
            while (std::getline(row, cell, ','))
                if (!cell.empty()) cells.insert(cell);
        }
    }

    const std::regex float_token("-?\\d\\.\\d{9}e[+-]\\d{2,3}");
    const std::set<std::string> echo_sections = {"[run]", "[experiment]",
                                                 "[site_a]", "[site_b]",
                                                 "[sweep]"};
    std::string section;
    int checked = 0;
    for (const std::string& line : split_lines(slurp(out / "report.txt"))) {
        if (!line.empty() && line.front() == '[') {
            section = line;
            continue;
        }
        if (echo_sections.count(section)) continue;
        std::vector<std::string> tokens;
        for (std::sregex_iterator it(line.begin(), line.end(), float_token);
             it != std::sregex_iterator(); ++it)
            tokens.push_back(it->str());
        if (tokens.empty()) continue;
        CAPTURE(line);
        if (line.find(" = 1 - ") != std::string::npos) {
            // a derived value: states its source cell and the arithmetic
            REQUIRE(tokens.size() == 2);
            CHECK(cells.count(tokens[0]) == 1);
            CHECK(tokens[1] == fmt9(1.0 - std::stod(tokens[0])));
        } else {
            for (const std::string& token : tokens)
                CHECK(cells.count(token) == 1);
        }
        ++checked;
    }
    CHECK(checked > 5);
}

TEST_CASE("driver rejects unwritable output directories") {
    RunConfig cfg = default_run_config();
    cfg.mode = RunMode::analytic;
    cfg.out_dir = "/proc/homsim_forbidden";
    CHECK_THROWS_AS(run(cfg), ConfigError);
}

} // TEST_SUITE
