#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qkd/commands.hpp"
#include "qkd/config.hpp"
#include "testutil.hpp"

using nlohmann::json;
using testutil::rel_close;
using testutil::write_temp_file;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("decoyqkd");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    CliResult result;
    result.code = qkd::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

const char* kHonestConfig = R"({
  "pulses": 20000, "seed": 42, "alpha": 0.1,
  "signal": {"type": "poisson", "mu": 0.3},
  "decoy": {"type": "poisson", "mu": 1.0},
  "adversary": {"type": "passive", "eta": 0.1}
})";

const char* kAttackConfig = R"({
  "pulses": 100000, "seed": 7, "alpha": 0.1,
  "signal": {"type": "poisson", "mu": 0.3},
  "decoy": {"type": "poisson", "mu": 1.0},
  "adversary": {"type": "naive_pns"}
})";

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::vector<std::string> fields;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            fields.push_back(cell);
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

TEST_CASE("analyze emits a full report and exit code 0 when secure") {
    const auto path = write_temp_file("honest", kHonestConfig);
    const CliResult r = cli({"analyze", path});
    CHECK(r.code == 0);

    const json report = json::parse(r.out);
    for (const char* key : {"config", "tally", "yields", "aborted", "security", "timing"}) {
        CHECK(report.contains(key));
    }
    CHECK(report["tally"].is_null());
    CHECK(report["yields"].is_null());
    CHECK(report["aborted"].is_null());

    const json& sec = report["security"];
    const std::set<std::string> expected_keys = {
        "y_s",       "y_d",  "ratio_bound", "y_s_multi_upper", "condition_lhs",
        "condition_rhs", "verdict", "normal_op_margin", "mode", "z", "margin"};
    std::set<std::string> actual_keys;
    for (const auto& item : sec.items()) {
        actual_keys.insert(item.key());
    }
    CHECK(actual_keys == expected_keys);

    CHECK(sec["verdict"] == "secure");
    CHECK(sec["mode"] == "analytic");
    CHECK(rel_close(sec["y_s"].get<double>(), 0.029554466451491823, 1e-12));
    CHECK(rel_close(sec["y_d"].get<double>(), 0.095162581964040427, 1e-12));
    CHECK(rel_close(sec["ratio_bound"].get<double>(), 0.18123774367234289, 1e-12));
    CHECK(rel_close(sec["normal_op_margin"].get<double>(), 0.60412581224114296, 1e-12));
    CHECK(r.err.find("verdict: secure") != std::string::npos);
}

TEST_CASE("the config echo round-trips through the parser") {
    const auto path = write_temp_file("roundtrip", kHonestConfig);
    const CliResult r = cli({"analyze", path});
    const json echo = json::parse(r.out)["config"];

    const qkd::ResolvedConfig again = qkd::parse_config(echo);
    CHECK(again.echo == echo);
    CHECK(again.session.pulses == 20000);
    CHECK(again.session.seed == 42);
    CHECK(again.n_max == 30);
}

TEST_CASE("analyze reports insecurity with exit code 2") {
    const auto path = write_temp_file("attack", kAttackConfig);
    const CliResult r = cli({"analyze", path});
    CHECK(r.code == 2);
    const json report = json::parse(r.out);
    CHECK(report["security"]["verdict"] == "insecure");
}

TEST_CASE("simulate runs the full pipeline on an honest channel") {
    const auto path = write_temp_file("honest", kHonestConfig);
    const CliResult r = cli({"simulate", path});
    CHECK(r.code == 0);

    const json report = json::parse(r.out);
    const json& tally = report["tally"];
    CHECK(tally["sent_signal"].get<std::uint64_t>() +
              tally["sent_decoy"].get<std::uint64_t>() ==
          20000);
    CHECK(report["yields"]["signal"]["sent"] == tally["sent_signal"]);
    CHECK(report["aborted"]["decision"] == false);
    CHECK(rel_close(report["aborted"]["expected_ratio"].get<double>(), 10.0 / 3.0, 1e-12));
    CHECK(report["security"]["mode"] == "empirical");
    CHECK(report["timing"]["pulses_per_second"].get<double>() > 0.0);
}

TEST_CASE("simulate aborts and flags the multi-photon forwarding attack") {
    const auto path = write_temp_file("attack", kAttackConfig);
    const CliResult r = cli({"simulate", path});
    CHECK(r.code == 2);

    const json report = json::parse(r.out);
    CHECK(report["aborted"]["decision"] == true);
    CHECK(report["aborted"].contains("note"));
    CHECK(report["security"]["verdict"] == "insecure");
}

TEST_CASE("an infeasible strategy is an operational error") {
    const auto path = write_temp_file("infeasible", R"({
      "pulses": 1000, "seed": 1,
      "signal": {"type": "poisson", "mu": 0.3},
      "decoy": {"type": "poisson", "mu": 1.0},
      "adversary": {"type": "rate_matching_pns", "eta_mimic": 0.9}
    })");
    const CliResult r = cli({"simulate", path});
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("command-line flags override the config file") {
    const auto path = write_temp_file("override", kHonestConfig);
    const CliResult r = cli({"simulate", path, "--pulses", "12345", "--seed", "777",
                             "--alpha", "0.25"});
    CHECK(r.code == 0);

    const json report = json::parse(r.out);
    CHECK(report["config"]["pulses"] == 12345);
    CHECK(report["config"]["seed"] == 777);
    CHECK(report["config"]["alpha"] == 0.25);
    const json& tally = report["tally"];
    CHECK(tally["sent_signal"].get<std::uint64_t>() +
              tally["sent_decoy"].get<std::uint64_t>() ==
          12345);
}

TEST_CASE("a zero pulse count is rejected") {
    const auto path = write_temp_file("zero", kHonestConfig);
    const CliResult r = cli({"simulate", path, "--pulses", "0"});
    CHECK(r.code == 1);
}

TEST_CASE("a missing seed is generated and echoed for reproducibility") {
    const auto path = write_temp_file("noseed", R"({
      "pulses": 5000,
      "signal": {"type": "poisson", "mu": 0.3},
      "decoy": {"type": "poisson", "mu": 1.0},
      "adversary": {"type": "passive", "eta": 0.1}
    })");
    const CliResult r = cli({"simulate", path});
    // At 5000 pulses the +-3 SE substitution is wide enough that the honest
    // verdict itself is a coin toss; only usage errors are out of bounds.
    CHECK((r.code == 0 || r.code == 2));
    const json report = json::parse(r.out);
    REQUIRE(report["config"].contains("seed"));
    CHECK(report["config"]["seed"].is_number_integer());
}

TEST_CASE("config mistakes are usage errors with exit code 1") {
    CHECK(cli({"analyze", "no_such_file.json"}).code == 1);

    const auto bad_json = write_temp_file("badjson", "{ not json");
    CHECK(cli({"analyze", bad_json}).code == 1);

    const auto unknown_key = write_temp_file("unknownkey", R"({
      "pulse_count": 1000,
      "signal": {"type": "poisson", "mu": 0.3},
      "decoy": {"type": "poisson", "mu": 1.0},
      "adversary": {"type": "passive", "eta": 0.1}
    })");
    const CliResult r = cli({"analyze", unknown_key});
    CHECK(r.code == 1);
    CHECK(r.err.find("pulse_count") != std::string::npos);

    const auto bad_adversary = write_temp_file("badadv", R"({
      "signal": {"type": "poisson", "mu": 0.3},
      "decoy": {"type": "poisson", "mu": 1.0},
      "adversary": {"type": "invisible"}
    })");
    CHECK(cli({"analyze", bad_adversary}).code == 1);

    const auto bad_alpha = write_temp_file("badalpha", kHonestConfig);
    CHECK(cli({"analyze", bad_alpha, "--alpha", "1.5"}).code == 1);
}

TEST_CASE("sweeping the transmittance keeps the verdict secure at every loss") {
    const auto path = write_temp_file("sweep", kHonestConfig);
    const CliResult r = cli({"sweep", path, "--param", "eta", "--from", "0.0001",
                             "--to", "0.1", "--step", "0.0111"});
    CHECK(r.code == 0);

    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0] == std::vector<std::string>{"param", "value", "y_s", "y_d",
                                              "ratio_bound", "condition_lhs",
                                              "condition_rhs", "margin", "verdict"});
    CHECK(rows.size() == 1 + 10);  // header + floor(0.0999/0.0111)+1 points
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][0] == "eta");
        CHECK(rows[i].back() == "secure");
    }
}

TEST_CASE("sweeping the signal mean shows the verdict flip at equal means") {
    const auto path = write_temp_file("sweepmu", kHonestConfig);
    const CliResult r = cli({"sweep", path, "--param", "mu", "--from", "0.8", "--to",
                             "1.2", "--step", "0.1"});
    CHECK(r.code == 2);  // insecure points present

    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[1].back() == "secure");    // mu = 0.8
    CHECK(rows[2].back() == "secure");    // mu = 0.9
    CHECK(rows[3].back() == "insecure");  // mu = 1.0: equal sources, zero margin
    CHECK(rows[4].back() == "insecure");
    CHECK(rows[5].back() == "insecure");
}

TEST_CASE("sweeping epsilon degrades the margin monotonically") {
    const auto path = write_temp_file("sweepeps", R"({
      "signal": {"type": "near_single_factorial", "epsilon": 0.01},
      "decoy": {"type": "poisson", "mu": 1.0},
      "adversary": {"type": "passive", "eta": 0.1}
    })");
    const CliResult r = cli({"sweep", path, "--param", "epsilon", "--from", "0",
                             "--to", "0.1", "--step", "0.02"});
    CHECK(r.code == 0);

    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 1 + 6);
    double previous = 1e300;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double margin = std::stod(rows[i][7]);
        CHECK(margin < previous);
        previous = margin;
    }
}

TEST_CASE("sweep misuse is a usage error") {
    const auto path = write_temp_file("sweepbad", kHonestConfig);
    CHECK(cli({"sweep", path, "--param", "bogus", "--from", "0", "--to", "1",
               "--step", "0.1"})
              .code == 1);
    CHECK(cli({"sweep", path, "--param", "eta", "--from", "0", "--to", "1", "--step",
               "0"})
              .code == 1);
    CHECK(cli({"sweep", path, "--param", "eta", "--from", "0.5", "--to", "0.1",
               "--step", "0.1"})
              .code == 1);

    const auto attack = write_temp_file("sweepadv", kAttackConfig);
    CHECK(cli({"sweep", attack, "--param", "eta", "--from", "0", "--to", "0.1",
               "--step", "0.05"})
              .code == 1);

    // epsilon only applies to the sources that have one
    CHECK(cli({"sweep", path, "--param", "epsilon", "--from", "0", "--to", "0.1",
               "--step", "0.05"})
              .code == 1);
}

TEST_CASE("near-single-photon reports surface both candidate coefficients") {
    const auto path = write_temp_file("nearsingle", R"({
      "signal": {"type": "near_single_factorial", "epsilon": 0.01},
      "decoy": {"type": "poisson", "mu": 1.0},
      "adversary": {"type": "passive", "eta": 0.1}
    })");
    const CliResult r = cli({"analyze", path});
    CHECK(r.code == 0);

    const json report = json::parse(r.out);
    REQUIRE(report.contains("ratio_bounds"));
    CHECK(rel_close(report["ratio_bounds"]["general"].get<double>(),
                    0.037844223823546656, 1e-10));
    CHECK(rel_close(report["ratio_bounds"]["epsilon_based"].get<double>(),
                    0.054365636569180905, 1e-12));
    CHECK(report["security"]["ratio_bound"] == report["ratio_bounds"]["general"]);
    CHECK(report["security"]["normal_op_margin"].is_null());

    // Poissonian pairs have a single canonical coefficient; no extra section.
    const auto honest = write_temp_file("plain", kHonestConfig);
    const json plain = json::parse(cli({"analyze", honest}).out);
    CHECK_FALSE(plain.contains("ratio_bounds"));
}

TEST_CASE("help and missing subcommands") {
    const CliResult help = cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("analyze") != std::string::npos);

    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
}
