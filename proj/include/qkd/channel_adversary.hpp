#pragma once

#include <limits>
#include <string>
#include <vector>

#include "qkd/photon_source.hpp"
#include "qkd/random.hpp"

namespace qkd {

/// Per-photon-number detection probabilities at Bob: y[n] is the probability
/// that an n-photon pulse produces a click. y[0] == 0 always (ideal detector,
/// no dark counts). One vector serves both sources of a session: at fixed
/// photon number the pulses are indistinguishable, so there is no code path
/// on which signal and decoy pulses see different detection probabilities.
struct YieldVector {
    std::vector<double> y;

    int n_max() const { return static_cast<int>(y.size()) - 1; }
};

enum class AdversaryKind { Passive, NaivePns, OptimalPns, RateMatchingPns, Explicit };

/// A channel/eavesdropper strategy, expressed entirely as the yield vector it
/// induces. Parameters are meaningful only for the kinds that use them.
struct AdversarySpec {
    AdversaryKind kind = AdversaryKind::Passive;
    double eta = std::numeric_limits<double>::quiet_NaN();           // passive
    double beta = std::numeric_limits<double>::quiet_NaN();          // optimal_pns: y[2]
    double target_yield = std::numeric_limits<double>::quiet_NaN();  // rate_matching
    double eta_mimic = std::numeric_limits<double>::quiet_NaN();     // rate_matching alt.
    std::vector<double> explicit_y;

    std::string label() const;
};

/// Honest lossy channel with threshold detector: y[n] = 1 - (1-eta)^n,
/// independent survival of each photon.
YieldVector passive_yield_vector(double eta, int n_max);

/// Yield vector induced by the given strategy.
///   naive_pns:          block singles, forward every multi-photon pulse.
///   optimal_pns(beta):   y[2] = beta, everything else blocked.
///   rate_matching_pns:   block singles, pass multi-photon pulses with a
///                        uniform probability c chosen so the signal source
///                        yield equals target_yield (or the honest yield at
///                        eta_mimic when target_yield is unset). Requires the
///                        signal distribution; throws InfeasibleError when
///                        c would exceed 1.
///   passive / explicit:  as constructed / as given (validated).
YieldVector adversary_yield_vector(const AdversarySpec& spec, int n_max,
                                   const PhotonNumberDistribution* signal = nullptr);

/// Bernoulli click with probability y[n]; one draw from the stream.
bool realize_detection(const YieldVector& y, int n, RandomStream& rng);

}  // namespace qkd
