#include "qkd/config.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

#include "qkd/errors.hpp"

namespace qkd {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

void check_object(const json& j, const std::string& what) {
    if (!j.is_object()) {
        fail(what + " must be a JSON object");
    }
}

void check_keys(const json& j, const std::string& what,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            fail("unknown key \"" + item.key() + "\" in " + what);
        }
    }
}

const json& require_key(const json& j, const char* key, const std::string& what) {
    const auto it = j.find(key);
    if (it == j.end()) {
        fail(what + " is missing required key \"" + std::string(key) + "\"");
    }
    return *it;
}

double as_finite_number(const json& v, const std::string& where) {
    if (!v.is_number()) {
        fail(where + " must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        fail(where + " must be finite");
    }
    return d;
}

double number_in_range(const json& j, const char* key, const std::string& what,
                       double lo, double hi, bool lo_open = false, bool hi_open = false) {
    const double d = as_finite_number(require_key(j, key, what), what + "." + key);
    const bool lo_ok = lo_open ? d > lo : d >= lo;
    const bool hi_ok = hi_open ? d < hi : d <= hi;
    if (!lo_ok || !hi_ok) {
        fail(what + "." + key + " out of range " + (lo_open ? "(" : "[") +
             std::to_string(lo) + ", " + std::to_string(hi) + (hi_open ? ")" : "]"));
    }
    return d;
}

std::uint64_t as_uint(const json& v, const std::string& where) {
    if (!v.is_number_integer() ||
        (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        fail(where + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::vector<double> as_probability_array(const json& v, const std::string& where) {
    if (!v.is_array()) {
        fail(where + " must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = as_finite_number(v[i], where + "[" + std::to_string(i) + "]");
        if (d < 0.0 || d > 1.0) {
            fail(where + "[" + std::to_string(i) + "] out of range [0, 1]");
        }
        out.push_back(d);
    }
    return out;
}

SourceSpec parse_source_spec(const json& j, const std::string& what) {
    check_object(j, what);
    const json& type = require_key(j, "type", what);
    if (!type.is_string()) {
        fail(what + ".type must be a string");
    }
    SourceSpec spec;
    const std::string kind = type.get<std::string>();
    if (kind == "poisson") {
        check_keys(j, what, {"type", "mu"});
        spec.kind = SourceKind::Poisson;
        const double mu = as_finite_number(require_key(j, "mu", what), what + ".mu");
        if (!(mu > 0.0)) {
            fail(what + ".mu must be > 0");
        }
        spec.mu = mu;
    } else if (kind == "near_single_factorial") {
        check_keys(j, what, {"type", "epsilon"});
        spec.kind = SourceKind::NearSingleFactorial;
        spec.epsilon = number_in_range(j, "epsilon", what, 0.0, 1.0, false, true);
    } else if (kind == "spike") {
        check_keys(j, what, {"type", "epsilon", "n"});
        spec.kind = SourceKind::Spike;
        spec.epsilon = number_in_range(j, "epsilon", what, 0.0, 1.0, false, true);
        const std::uint64_t n = as_uint(require_key(j, "n", what), what + ".n");
        if (n < 2) {
            fail(what + ".n must be >= 2 (a spike below 2 photons is not multi-photon)");
        }
        spec.spike_n = static_cast<int>(n);
    } else if (kind == "explicit") {
        check_keys(j, what, {"type", "probs"});
        spec.kind = SourceKind::Explicit;
        spec.probs = as_probability_array(require_key(j, "probs", what), what + ".probs");
    } else {
        fail(what + ".type \"" + kind +
             "\" is not one of poisson, near_single_factorial, spike, explicit");
    }
    return spec;
}

AdversarySpec parse_adversary_spec(const json& j) {
    const std::string what = "adversary";
    check_object(j, what);
    const json& type = require_key(j, "type", what);
    if (!type.is_string()) {
        fail(what + ".type must be a string");
    }
    AdversarySpec spec;
    const std::string kind = type.get<std::string>();
    if (kind == "passive") {
        check_keys(j, what, {"type", "eta"});
        spec.kind = AdversaryKind::Passive;
        spec.eta = number_in_range(j, "eta", what, 0.0, 1.0);
    } else if (kind == "naive_pns") {
        check_keys(j, what, {"type"});
        spec.kind = AdversaryKind::NaivePns;
    } else if (kind == "optimal_pns") {
        check_keys(j, what, {"type", "beta"});
        spec.kind = AdversaryKind::OptimalPns;
        spec.beta = number_in_range(j, "beta", what, 0.0, 1.0);
    } else if (kind == "rate_matching_pns") {
        check_keys(j, what, {"type", "eta_mimic"});
        spec.kind = AdversaryKind::RateMatchingPns;
        spec.eta_mimic = number_in_range(j, "eta_mimic", what, 0.0, 1.0);
    } else if (kind == "explicit") {
        check_keys(j, what, {"type", "y"});
        spec.kind = AdversaryKind::Explicit;
        spec.explicit_y = as_probability_array(require_key(j, "y", what), what + ".y");
    } else {
        fail(what + ".type \"" + kind +
             "\" is not one of passive, naive_pns, optimal_pns, rate_matching_pns, "
             "explicit");
    }
    return spec;
}

std::uint64_t generate_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

}  // namespace

nlohmann::json to_json(const SourceSpec& spec) {
    switch (spec.kind) {
        case SourceKind::Poisson:
            return {{"type", "poisson"}, {"mu", spec.mu}};
        case SourceKind::NearSingleFactorial:
            return {{"type", "near_single_factorial"}, {"epsilon", spec.epsilon}};
        case SourceKind::Spike:
            return {{"type", "spike"}, {"epsilon", spec.epsilon}, {"n", spec.spike_n}};
        case SourceKind::Explicit:
            return {{"type", "explicit"}, {"probs", spec.probs}};
    }
    fail("unreachable source kind");
}

nlohmann::json to_json(const AdversarySpec& spec) {
    switch (spec.kind) {
        case AdversaryKind::Passive:
            return {{"type", "passive"}, {"eta", spec.eta}};
        case AdversaryKind::NaivePns:
            return {{"type", "naive_pns"}};
        case AdversaryKind::OptimalPns:
            return {{"type", "optimal_pns"}, {"beta", spec.beta}};
        case AdversaryKind::RateMatchingPns:
            return {{"type", "rate_matching_pns"}, {"eta_mimic", spec.eta_mimic}};
        case AdversaryKind::Explicit:
            return {{"type", "explicit"}, {"y", spec.explicit_y}};
    }
    fail("unreachable adversary kind");
}

ResolvedConfig parse_config(const nlohmann::json& doc) {
    check_object(doc, "config");
    check_keys(doc, "config",
               {"pulses", "seed", "alpha", "n_max", "signal", "decoy", "adversary",
                "confidence_z", "abort_tolerance"});

    ResolvedConfig config;

    if (const auto it = doc.find("n_max"); it != doc.end()) {
        const std::uint64_t n = as_uint(*it, "config.n_max");
        if (n < 2 || n > 10000) {
            fail("config.n_max out of range [2, 10000]");
        }
        config.n_max = static_cast<int>(n);
    }

    if (const auto it = doc.find("pulses"); it != doc.end()) {
        config.session.pulses = as_uint(*it, "config.pulses");
        if (config.session.pulses < 1) {
            fail("config.pulses must be >= 1");
        }
    } else {
        config.session.pulses = 1000000;
    }

    if (const auto it = doc.find("seed"); it != doc.end()) {
        config.session.seed = as_uint(*it, "config.seed");
        config.seed_given = true;
    } else {
        config.session.seed = generate_seed();
        config.seed_given = false;
    }

    if (const auto it = doc.find("alpha"); it != doc.end()) {
        config.session.alpha = number_in_range(doc, "alpha", "config", 0.0, 1.0);
    }
    if (const auto it = doc.find("confidence_z"); it != doc.end()) {
        const double z = as_finite_number(*it, "config.confidence_z");
        if (!(z > 0.0)) {
            fail("config.confidence_z must be > 0");
        }
        config.session.confidence_z = z;
    }
    if (const auto it = doc.find("abort_tolerance"); it != doc.end()) {
        const double tol = as_finite_number(*it, "config.abort_tolerance");
        if (!(tol >= 0.0)) {
            fail("config.abort_tolerance must be >= 0");
        }
        config.session.abort_tolerance = tol;
    }

    config.signal_spec = parse_source_spec(require_key(doc, "signal", "config"), "signal");
    config.decoy_spec = parse_source_spec(require_key(doc, "decoy", "config"), "decoy");
    config.session.adversary = parse_adversary_spec(require_key(doc, "adversary", "config"));

    config.session.signal = build_source(config.signal_spec, config.n_max);
    config.session.decoy = build_source(config.decoy_spec, config.n_max);

    config.echo = {
        {"pulses", config.session.pulses},
        {"seed", config.session.seed},
        {"alpha", config.session.alpha},
        {"n_max", config.n_max},
        {"signal", to_json(config.signal_spec)},
        {"decoy", to_json(config.decoy_spec)},
        {"adversary", to_json(config.session.adversary)},
        {"confidence_z", config.session.confidence_z},
        {"abort_tolerance", config.session.abort_tolerance},
    };
    return config;
}

void rebuild_sources(ResolvedConfig& config) {
    config.session.signal = build_source(config.signal_spec, config.n_max);
    config.session.decoy = build_source(config.decoy_spec, config.n_max);
    config.echo["signal"] = to_json(config.signal_spec);
    config.echo["decoy"] = to_json(config.decoy_spec);
    config.echo["adversary"] = to_json(config.session.adversary);
}

}  // namespace qkd
