#include "qkd/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "qkd/errors.hpp"

namespace qkd {

namespace {

using nlohmann::json;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

json security_to_json(const SecurityReport& s) {
    return {
        {"y_s", s.y_s},
        {"y_d", s.y_d},
        {"ratio_bound", s.multi_bound_ratio},
        {"y_s_multi_upper", s.y_s_multi_upper},
        {"condition_lhs", s.condition_lhs},
        {"condition_rhs", s.condition_rhs},
        {"verdict", to_string(s.verdict)},
        {"normal_op_margin",
         s.normal_op_margin ? json(*s.normal_op_margin) : json(nullptr)},
        {"mode", s.mode == AnalysisMode::Analytic ? "analytic" : "empirical"},
        {"z", s.z},
        {"margin", s.margin},
    };
}

json tally_to_json(const Tally& t) {
    return {
        {"sent_signal", t.sent_signal},
        {"sent_decoy", t.sent_decoy},
        {"detected_signal", t.detected_signal},
        {"detected_decoy", t.detected_decoy},
        {"sifted_signal", t.sifted_signal},
        {"per_n",
         {{"signal",
           {{"sent", t.per_n_sent_signal}, {"detected", t.per_n_detected_signal}}},
          {"decoy",
           {{"sent", t.per_n_sent_decoy}, {"detected", t.per_n_detected_decoy}}}}},
    };
}

json estimate_to_json(const YieldEstimate& e) {
    return {
        {"y_hat", e.y_hat},
        {"std_err", e.std_err},
        {"sent", e.sent},
        {"detected", e.detected},
    };
}

json timing_to_json(double seconds, std::uint64_t pulses) {
    json t = {{"wall_seconds", seconds}};
    if (pulses > 0) {
        t["pulses_per_second"] = static_cast<double>(pulses) / std::max(seconds, 1e-9);
    } else {
        t["pulses_per_second"] = nullptr;
    }
    return t;
}

// The security object carries a fixed field set; when two competing
// coefficients exist for a near-single-photon source, the comparison is
// surfaced in its own top-level section so neither is hidden.
void attach_ratio_comparison(json& report, const SecurityReport& s) {
    if (s.near_single_coefficient) {
        report["ratio_bounds"] = {
            {"general", s.multi_bound_ratio},
            {"epsilon_based", *s.near_single_coefficient},
            {"used_for_verdict", "general"},
        };
    }
}

}  // namespace

const char* to_string(SweepParam param) {
    switch (param) {
        case SweepParam::Eta:
            return "eta";
        case SweepParam::Mu:
            return "mu";
        case SweepParam::MuPrime:
            return "mu_prime";
        case SweepParam::Epsilon:
            return "epsilon";
    }
    return "?";
}

SweepParam parse_sweep_param(const std::string& name) {
    if (name == "eta") return SweepParam::Eta;
    if (name == "mu") return SweepParam::Mu;
    if (name == "mu_prime") return SweepParam::MuPrime;
    if (name == "epsilon") return SweepParam::Epsilon;
    throw ConfigError("unknown sweep parameter \"" + name +
                      "\" (expected eta, mu, mu_prime or epsilon)");
}

RunOutcome cmd_analyze(const ResolvedConfig& config) {
    const auto start = Clock::now();
    const YieldVector y = adversary_yield_vector(config.session.adversary, config.n_max,
                                                 &config.session.signal);
    const SecurityReport security = analyze_analytic(
        config.session.signal, config.session.decoy, y, config.session.confidence_z);

    RunOutcome outcome;
    outcome.report = {
        {"config", config.echo},
        {"tally", nullptr},
        {"yields", nullptr},
        {"aborted", nullptr},
        {"security", security_to_json(security)},
        {"timing", timing_to_json(seconds_since(start), 0)},
    };
    attach_ratio_comparison(outcome.report, security);
    outcome.exit_code = security.verdict == Verdict::Secure ? 0 : 2;
    return outcome;
}

RunOutcome cmd_simulate(const ResolvedConfig& config) {
    const auto start = Clock::now();
    const Tally tally = run_session(config.session);
    const auto [signal_est, decoy_est] = estimate_yields(tally);
    const double expected_ratio = expected_yield_ratio(config.session);
    const bool aborted =
        abort_decision(signal_est, decoy_est, expected_ratio,
                       config.session.abort_tolerance, config.session.confidence_z);
    const SecurityReport security =
        analyze_empirical(config.session.signal, config.session.decoy, signal_est,
                          decoy_est, config.session.confidence_z);
    const double seconds = seconds_since(start);

    const double z = config.session.confidence_z;
    json abort_json = {
        {"decision", aborted},
        {"decoy_yield_lower", decoy_est.y_hat - z * decoy_est.std_err},
        {"ceiling", expected_ratio * (1.0 + config.session.abort_tolerance) *
                        (signal_est.y_hat + z * signal_est.std_err)},
        {"expected_ratio", expected_ratio},
        {"tolerance", config.session.abort_tolerance},
        {"z", z},
    };
    if (aborted) {
        abort_json["note"] = "security verdict below is post-abort, informational";
    }

    RunOutcome outcome;
    outcome.report = {
        {"config", config.echo},
        {"tally", tally_to_json(tally)},
        {"yields",
         {{"signal", estimate_to_json(signal_est)}, {"decoy", estimate_to_json(decoy_est)}}},
        {"aborted", abort_json},
        {"security", security_to_json(security)},
        {"timing", timing_to_json(seconds, config.session.pulses)},
    };
    attach_ratio_comparison(outcome.report, security);
    outcome.exit_code =
        (security.verdict == Verdict::Secure && !aborted) ? 0 : 2;
    return outcome;
}

namespace {

void validate_sweep(const ResolvedConfig& config, const SweepSpec& spec) {
    if (!(spec.step > 0.0) || !std::isfinite(spec.step)) {
        throw ConfigError("sweep step must be a finite number > 0");
    }
    if (!std::isfinite(spec.from) || !std::isfinite(spec.to) || spec.to < spec.from) {
        throw ConfigError("sweep range must satisfy from <= to");
    }
    switch (spec.param) {
        case SweepParam::Eta:
            if (config.session.adversary.kind != AdversaryKind::Passive) {
                throw ConfigError("sweeping eta requires a passive adversary");
            }
            if (spec.from < 0.0 || spec.to > 1.0) {
                throw ConfigError("eta sweep range must lie in [0, 1]");
            }
            break;
        case SweepParam::Mu:
            if (config.signal_spec.kind != SourceKind::Poisson) {
                throw ConfigError("sweeping mu requires a poisson signal source");
            }
            if (!(spec.from > 0.0)) {
                throw ConfigError("mu sweep range must lie in (0, inf)");
            }
            break;
        case SweepParam::MuPrime:
            if (config.decoy_spec.kind != SourceKind::Poisson) {
                throw ConfigError("sweeping mu_prime requires a poisson decoy source");
            }
            if (!(spec.from > 0.0)) {
                throw ConfigError("mu_prime sweep range must lie in (0, inf)");
            }
            break;
        case SweepParam::Epsilon:
            if (config.signal_spec.kind != SourceKind::NearSingleFactorial &&
                config.signal_spec.kind != SourceKind::Spike) {
                throw ConfigError(
                    "sweeping epsilon requires a near_single_factorial or spike signal "
                    "source");
            }
            if (spec.from < 0.0 || spec.to >= 1.0) {
                throw ConfigError("epsilon sweep range must lie in [0, 1)");
            }
            break;
    }
}

std::vector<double> sweep_points(const SweepSpec& spec) {
    // Inclusive range with a half-ulp-ish slack so `to` itself is kept even
    // when from + k*step lands a rounding error past it.
    const double span = spec.to - spec.from;
    const auto count =
        static_cast<std::size_t>(std::floor(span / spec.step + 1e-9)) + 1;
    std::vector<double> points;
    points.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        points.push_back(spec.from + static_cast<double>(k) * spec.step);
    }
    if (points.back() > spec.to) {
        points.back() = spec.to;  // kill any rounding overshoot past the range end
    }
    return points;
}

void apply_sweep_value(ResolvedConfig& config, SweepParam param, double value) {
    switch (param) {
        case SweepParam::Eta:
            config.session.adversary.eta = value;
            break;
        case SweepParam::Mu:
            config.signal_spec.mu = value;
            break;
        case SweepParam::MuPrime:
            config.decoy_spec.mu = value;
            break;
        case SweepParam::Epsilon:
            config.signal_spec.epsilon = value;
            break;
    }
    rebuild_sources(config);
}

}  // namespace

SweepOutcome cmd_sweep(const ResolvedConfig& base, const SweepSpec& spec) {
    validate_sweep(base, spec);
    const std::vector<double> points = sweep_points(spec);

    std::ostringstream csv;
    csv << "param,value,y_s,y_d,ratio_bound,condition_lhs,condition_rhs,margin,"
           "verdict\n";
    bool all_secure = true;
    ResolvedConfig config = base;
    for (const double value : points) {
        apply_sweep_value(config, spec.param, value);
        const YieldVector y = adversary_yield_vector(
            config.session.adversary, config.n_max, &config.session.signal);
        const SecurityReport s =
            analyze_analytic(config.session.signal, config.session.decoy, y,
                             config.session.confidence_z);
        csv << to_string(spec.param) << ',' << fmt(value) << ',' << fmt(s.y_s) << ','
            << fmt(s.y_d) << ',' << fmt(s.multi_bound_ratio) << ','
            << fmt(s.condition_lhs) << ',' << fmt(s.condition_rhs) << ','
            << fmt(s.margin) << ',' << to_string(s.verdict) << '\n';
        all_secure = all_secure && s.verdict == Verdict::Secure;
    }

    SweepOutcome outcome;
    outcome.exit_code = all_secure ? 0 : 2;
    outcome.csv = csv.str();
    outcome.rows = points.size();
    return outcome;
}

namespace {

void print_run_summary(const json& report, std::ostream& err) {
    const json& sec = report.at("security");
    err << "signal " << report.at("config").at("signal").dump() << "  decoy "
        << report.at("config").at("decoy").dump() << "  adversary "
        << report.at("config").at("adversary").dump() << "\n";
    err << "Y_s=" << fmt(sec.at("y_s").get<double>())
        << "  Y_d=" << fmt(sec.at("y_d").get<double>())
        << "  bound=" << fmt(sec.at("condition_rhs").get<double>())
        << " (ratio " << fmt(sec.at("ratio_bound").get<double>()) << ")\n";
    if (report.at("aborted").is_object()) {
        err << "aborted: "
            << (report.at("aborted").at("decision").get<bool>() ? "yes" : "no") << "\n";
    }
    err << "verdict: " << sec.at("verdict").get<std::string>()
        << "  margin=" << fmt(sec.at("margin").get<double>()) << "  ("
        << sec.at("mode").get<std::string>() << ", z=" << fmt(sec.at("z").get<double>())
        << ")\n";
}

json load_config_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    return doc;
}

struct OverrideFlags {
    CLI::Option* pulses = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* alpha = nullptr;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"decoy-state BB84 simulator and security calculator"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t pulses_override = 0;
    std::uint64_t seed_override = 0;
    double alpha_override = 0.0;

    const auto add_common = [&](CLI::App* sub) {
        OverrideFlags flags;
        sub->add_option("config", config_path, "JSON config file")->required();
        flags.pulses = sub->add_option("--pulses", pulses_override,
                                       "override the configured pulse count");
        flags.seed =
            sub->add_option("--seed", seed_override, "override the configured RNG seed");
        flags.alpha = sub->add_option("--alpha", alpha_override,
                                      "override the decoy replacement probability");
        return flags;
    };

    CLI::App* analyze =
        app.add_subcommand("analyze", "closed-form yields, bounds and verdict");
    const OverrideFlags analyze_flags = add_common(analyze);

    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo session, abort test, verdict");
    const OverrideFlags simulate_flags = add_common(simulate);

    CLI::App* sweep =
        app.add_subcommand("sweep", "closed-form verdict across a parameter range");
    const OverrideFlags sweep_flags = add_common(sweep);
    std::string sweep_param_name;
    double sweep_from = 0.0;
    double sweep_to = 0.0;
    double sweep_step = 0.0;
    sweep->add_option("--param", sweep_param_name, "eta | mu | mu_prime | epsilon")
        ->required();
    sweep->add_option("--from", sweep_from, "first parameter value")->required();
    sweep->add_option("--to", sweep_to, "last parameter value (inclusive)")->required();
    sweep->add_option("--step", sweep_step, "parameter increment")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        json doc = load_config_document(config_path);
        const OverrideFlags& flags = app.got_subcommand(analyze)    ? analyze_flags
                                     : app.got_subcommand(simulate) ? simulate_flags
                                                                    : sweep_flags;
        if (flags.pulses->count() > 0) doc["pulses"] = pulses_override;
        if (flags.seed->count() > 0) doc["seed"] = seed_override;
        if (flags.alpha->count() > 0) doc["alpha"] = alpha_override;

        const ResolvedConfig config = parse_config(doc);

        if (app.got_subcommand(sweep)) {
            SweepSpec spec;
            spec.param = parse_sweep_param(sweep_param_name);
            spec.from = sweep_from;
            spec.to = sweep_to;
            spec.step = sweep_step;
            const SweepOutcome outcome = cmd_sweep(config, spec);
            out << outcome.csv;
            err << "swept " << to_string(spec.param) << " over " << outcome.rows
                << " points: " << (outcome.exit_code == 0 ? "all secure" : "insecure points present")
                << "\n";
            return outcome.exit_code;
        }

        const RunOutcome outcome =
            app.got_subcommand(analyze) ? cmd_analyze(config) : cmd_simulate(config);
        out << outcome.report.dump(2) << "\n";
        print_run_summary(outcome.report, err);
        return outcome.exit_code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace qkd
