#pragma once

#include <limits>
#include <string>
#include <vector>

#include "qkd/random.hpp"

namespace qkd {

enum class SourceKind { Poisson, NearSingleFactorial, Spike, Explicit };

/// Truncated photon-number distribution of a pulsed source: probs[n] is the
/// probability that one pulse contains exactly n photons, n = 0..n_max.
///
/// Constructors guarantee sum(probs) within 1e-9 of 1; the missing tail mass
/// (truncation deficit) is treated as vacuum when sampling, which can only
/// lower yields.
struct PhotonNumberDistribution {
    SourceKind kind = SourceKind::Explicit;
    std::vector<double> probs;
    double mean_photon_number = 0.0;

    // Parameters of the generating family; NaN / -1 where not applicable.
    double mu = std::numeric_limits<double>::quiet_NaN();
    double epsilon = std::numeric_limits<double>::quiet_NaN();
    int spike_n = -1;

    int n_max() const { return static_cast<int>(probs.size()) - 1; }
    double truncation_deficit() const;
    std::string label() const;
};

/// Parsed source description, prior to truncation; see build_source.
struct SourceSpec {
    SourceKind kind = SourceKind::Poisson;
    double mu = 0.0;
    double epsilon = 0.0;
    int spike_n = 0;
    std::vector<double> probs;  // explicit only
};

/// e^{-mu} mu^n / n!, evaluated in log space for large n so that factorials
/// never overflow (valid well past n = 170).
double poisson_pmf(int n, double mu);

/// Phase-randomized coherent source with mean photon number mu.
/// Fails if the truncated tail mass exceeds 1e-9 (n_max too small for mu).
PhotonNumberDistribution build_poissonian(double mu, int n_max);

/// Near-single-photon source: p_0 = 0, p_1 = 1-epsilon and p_i proportional
/// to 1/i! for i >= 2, scaled so the multi-photon mass is exactly epsilon
/// (the scale is epsilon/(e-2) up to truncation).
PhotonNumberDistribution build_near_single_factorial(double epsilon, int n_max);

/// Two-line source: p_1 = 1-epsilon and all remaining mass concentrated at
/// one multi-photon number spike_n.
PhotonNumberDistribution build_spike(double epsilon, int spike_n, int n_max);

/// User-provided probability vector; padded with zeros up to n_max.
PhotonNumberDistribution build_explicit(std::vector<double> probs, int n_max);

/// Dispatch over SourceSpec.
PhotonNumberDistribution build_source(const SourceSpec& spec, int n_max);

/// Probability of emitting two or more photons in one pulse.
double multi_photon_prob(const PhotonNumberDistribution& dist);

/// Inverse-CDF sample of the photon number; the truncation deficit maps to
/// n = 0. Deterministic given the stream state.
int sample_photon_number(const PhotonNumberDistribution& dist, RandomStream& rng);

}  // namespace qkd
