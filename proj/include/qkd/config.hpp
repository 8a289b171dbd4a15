#pragma once

#include <string>

#include "json.hpp"
#include "qkd/protocol_engine.hpp"

namespace qkd {

/// A fully resolved run description: every default filled in, sources built,
/// and a canonical JSON echo that parses back to the same values.
struct ResolvedConfig {
    SessionConfig session;
    int n_max = 30;
    bool seed_given = false;  // false when the seed was auto-generated
    SourceSpec signal_spec;
    SourceSpec decoy_spec;
    nlohmann::json echo;
};

/// Parse and validate a config document. Unknown keys, wrong types and
/// out-of-range values all throw ConfigError with the offending key named.
/// A missing seed is drawn from the system entropy source and echoed.
ResolvedConfig parse_config(const nlohmann::json& doc);

/// Rebuild the echo and session sources after a spec field was modified in
/// place (parameter sweeps). Keeps seed and counters untouched.
void rebuild_sources(ResolvedConfig& config);

/// Canonical JSON form of a source / adversary spec, as accepted by the
/// parser.
nlohmann::json to_json(const SourceSpec& spec);
nlohmann::json to_json(const AdversarySpec& spec);

}  // namespace qkd
