#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "qkd/config.hpp"
#include "qkd/security_analysis.hpp"

namespace qkd {

/// Result of one analyze/simulate run: the report document and the process
/// exit code derived from it (0 secure and not aborted, 2 otherwise).
struct RunOutcome {
    int exit_code = 0;
    nlohmann::json report;
};

enum class SweepParam { Eta, Mu, MuPrime, Epsilon };

/// One scalar parameter swept over an inclusive range.
struct SweepSpec {
    SweepParam param = SweepParam::Eta;
    double from = 0.0;
    double to = 0.0;
    double step = 0.0;
};

struct SweepOutcome {
    int exit_code = 0;       // 0 all points secure, 2 otherwise
    std::string csv;
    std::size_t rows = 0;    // data rows, excluding the header
};

/// Closed-form evaluation: yield vector from the adversary spec, expected
/// yields, every bound, verdict. No random draws.
RunOutcome cmd_analyze(const ResolvedConfig& config);

/// Full Monte Carlo pipeline: session, estimates, abort test, empirical
/// security check.
RunOutcome cmd_simulate(const ResolvedConfig& config);

/// Closed-form evaluation at each point of the sweep range; one CSV row per
/// point, rows in parameter order.
SweepOutcome cmd_sweep(const ResolvedConfig& config, const SweepSpec& spec);

/// Parse the given SweepParam name (eta | mu | mu_prime | epsilon).
SweepParam parse_sweep_param(const std::string& name);

const char* to_string(SweepParam param);

/// Entry point behind main(): subcommand dispatch, config loading, flag
/// overrides, report emission. Returns the process exit code (0, 1 or 2).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qkd
