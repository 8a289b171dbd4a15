#include "qkd/protocol_engine.hpp"

#include <cmath>
#include <stdexcept>

#include "qkd/errors.hpp"
#include "qkd/random.hpp"

namespace qkd {

namespace {

void validate(const SessionConfig& config) {
    if (config.pulses < 1) {
        throw ConfigError("a session needs at least one pulse");
    }
    if (!(config.alpha >= 0.0) || config.alpha > 1.0) {
        throw ConfigError("decoy replacement probability alpha must lie in [0, 1]");
    }
    if (config.signal.n_max() != config.decoy.n_max()) {
        throw ConfigError("signal and decoy sources must share one n_max");
    }
    if (!(config.confidence_z > 0.0)) {
        throw ConfigError("confidence_z must be positive");
    }
    if (!(config.abort_tolerance >= 0.0)) {
        throw ConfigError("abort_tolerance must be non-negative");
    }
}

// One pulse consumes exactly six draws: source choice, photon number,
// Alice's bit, Alice's basis, detection, Bob's basis.
Tally run_pulses(const SessionConfig& config, const YieldVector& yields,
                 std::uint64_t count, std::uint64_t stream_id) {
    RandomStream rng(config.seed, stream_id);
    Tally tally = make_empty_tally(config);

    for (std::uint64_t i = 0; i < count; ++i) {
        const bool is_decoy = rng.bernoulli(config.alpha);
        const PhotonNumberDistribution& source = is_decoy ? config.decoy : config.signal;

        const int n = sample_photon_number(source, rng);
        (void)rng.flip();  // Alice's key bit; carried by no observable here
        const bool alice_basis = rng.flip();
        const bool detected = realize_detection(yields, n, rng);
        const bool bob_basis = rng.flip();

        if (is_decoy) {
            ++tally.sent_decoy;
            ++tally.per_n_sent_decoy[n];
            if (detected) {
                ++tally.detected_decoy;
                ++tally.per_n_detected_decoy[n];
            }
        } else {
            ++tally.sent_signal;
            ++tally.per_n_sent_signal[n];
            if (detected) {
                ++tally.detected_signal;
                ++tally.per_n_detected_signal[n];
                if (alice_basis == bob_basis) {
                    ++tally.sifted_signal;
                }
            }
        }
    }
    return tally;
}

}  // namespace

Tally make_empty_tally(const SessionConfig& config) {
    Tally tally;
    tally.signal_label = config.signal.label();
    tally.decoy_label = config.decoy.label();
    const std::size_t size = config.signal.probs.size();
    tally.per_n_sent_signal.assign(size, 0);
    tally.per_n_detected_signal.assign(size, 0);
    tally.per_n_sent_decoy.assign(size, 0);
    tally.per_n_detected_decoy.assign(size, 0);
    return tally;
}

Tally run_session(const SessionConfig& config) {
    return run_session_batched(config, 1);
}

Tally run_session_batched(const SessionConfig& config, unsigned batches) {
    validate(config);
    if (batches < 1) {
        throw ConfigError("batch count must be at least 1");
    }
    const YieldVector yields =
        adversary_yield_vector(config.adversary, config.signal.n_max(), &config.signal);

    const std::uint64_t base = config.pulses / batches;
    const std::uint64_t remainder = config.pulses % batches;

    Tally total = make_empty_tally(config);
    for (unsigned b = 0; b < batches; ++b) {
        const std::uint64_t count = base + (b < remainder ? 1 : 0);
        if (count == 0) {
            continue;
        }
        total = merge_tallies(total, run_pulses(config, yields, count, b));
    }
    return total;
}

std::pair<YieldEstimate, YieldEstimate> estimate_yields(const Tally& tally) {
    auto estimate = [](std::uint64_t sent, std::uint64_t detected, const char* what) {
        if (sent == 0) {
            throw EstimateError(std::string("no ") + what + " pulses were sent");
        }
        YieldEstimate e;
        e.sent = sent;
        e.detected = detected;
        e.y_hat = static_cast<double>(detected) / static_cast<double>(sent);
        e.std_err = std::sqrt(e.y_hat * (1.0 - e.y_hat) / static_cast<double>(sent));
        return e;
    };
    return {estimate(tally.sent_signal, tally.detected_signal, "signal"),
            estimate(tally.sent_decoy, tally.detected_decoy, "decoy")};
}

bool abort_decision(const YieldEstimate& signal, const YieldEstimate& decoy,
                    double expected_ratio, double tolerance, double z) {
    if (!(expected_ratio > 0.0)) {
        throw std::domain_error("expected decoy/signal yield ratio must be positive");
    }
    if (!(tolerance >= 0.0) || !(z > 0.0)) {
        throw std::domain_error("abort test needs tolerance >= 0 and z > 0");
    }
    const double decoy_floor = decoy.y_hat - z * decoy.std_err;
    const double ceiling = expected_ratio * (1.0 + tolerance) * (signal.y_hat + z * signal.std_err);
    return decoy_floor > ceiling;
}

Tally merge_tallies(const Tally& a, const Tally& b) {
    if (a.signal_label != b.signal_label || a.decoy_label != b.decoy_label ||
        a.per_n_sent_signal.size() != b.per_n_sent_signal.size()) {
        throw ConfigError("tallies come from differently configured sessions");
    }
    Tally out = a;
    out.sent_signal += b.sent_signal;
    out.sent_decoy += b.sent_decoy;
    out.detected_signal += b.detected_signal;
    out.detected_decoy += b.detected_decoy;
    out.sifted_signal += b.sifted_signal;
    for (std::size_t n = 0; n < out.per_n_sent_signal.size(); ++n) {
        out.per_n_sent_signal[n] += b.per_n_sent_signal[n];
        out.per_n_detected_signal[n] += b.per_n_detected_signal[n];
        out.per_n_sent_decoy[n] += b.per_n_sent_decoy[n];
        out.per_n_detected_decoy[n] += b.per_n_detected_decoy[n];
    }
    return out;
}

double expected_yield_ratio(const SessionConfig& config) {
    if (!(config.signal.mean_photon_number > 0.0)) {
        throw std::domain_error("signal source mean photon number must be positive");
    }
    return config.decoy.mean_photon_number / config.signal.mean_photon_number;
}

}  // namespace qkd
