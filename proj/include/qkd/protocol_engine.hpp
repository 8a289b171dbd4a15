#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qkd/channel_adversary.hpp"
#include "qkd/photon_source.hpp"

namespace qkd {

/// Everything needed to run one decoy-state BB84 session.
struct SessionConfig {
    std::uint64_t pulses = 0;
    double alpha = 0.1;  // probability of replacing a signal pulse by a decoy pulse
    PhotonNumberDistribution signal;
    PhotonNumberDistribution decoy;
    AdversarySpec adversary;
    std::uint64_t seed = 0;
    double confidence_z = 3.0;
    double abort_tolerance = 0.25;
};

/// Counters accumulated over a batch of pulses. The per-photon-number
/// vectors are diagnostics; everything observable by the parties is in the
/// scalar counts.
struct Tally {
    std::string signal_label;
    std::string decoy_label;
    std::uint64_t sent_signal = 0;
    std::uint64_t sent_decoy = 0;
    std::uint64_t detected_signal = 0;
    std::uint64_t detected_decoy = 0;
    std::uint64_t sifted_signal = 0;  // detected signal pulses with matching bases
    std::vector<std::uint64_t> per_n_sent_signal;
    std::vector<std::uint64_t> per_n_detected_signal;
    std::vector<std::uint64_t> per_n_sent_decoy;
    std::vector<std::uint64_t> per_n_detected_decoy;

    bool operator==(const Tally&) const = default;
};

/// Empirical yield with its binomial standard error.
struct YieldEstimate {
    double y_hat = 0.0;
    double std_err = 0.0;
    std::uint64_t sent = 0;
    std::uint64_t detected = 0;
};

/// Zeroed tally shaped for the given session (labels and per-n sizes).
Tally make_empty_tally(const SessionConfig& config);

/// Run the full session on a single random stream (seed, stream 0).
/// Bit-for-bit deterministic given the config.
Tally run_session(const SessionConfig& config);

/// Split the session into `batches` pulse ranges, each on its own derived
/// stream (seed, batch index), and merge the results. Totals always satisfy
/// sent_signal + sent_decoy == pulses; the tally depends on the batch count
/// but not on scheduling.
Tally run_session_batched(const SessionConfig& config, unsigned batches);

/// Per-source yields detected/sent with binomial standard errors.
/// Throws EstimateError when either source sent zero pulses.
std::pair<YieldEstimate, YieldEstimate> estimate_yields(const Tally& tally);

/// Early alarm: abort when the decoy yield is too high relative to the
/// signal yield. Aborts iff the lower z-confidence edge of the decoy yield
/// exceeds expected_ratio * (1 + tolerance) times the upper edge of the
/// signal yield.
bool abort_decision(const YieldEstimate& signal, const YieldEstimate& decoy,
                    double expected_ratio, double tolerance, double z);

/// Componentwise sum; requires matching labels and per-n sizes.
Tally merge_tallies(const Tally& a, const Tally& b);

/// Honest-operation decoy/signal yield ratio: ratio of source mean photon
/// numbers, which is mu'/mu for a Poissonian pair.
double expected_yield_ratio(const SessionConfig& config);

}  // namespace qkd
