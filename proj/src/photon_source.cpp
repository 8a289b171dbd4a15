#include "qkd/photon_source.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "qkd/errors.hpp"

namespace qkd {

namespace {

constexpr double kMaxTruncationDeficit = 1e-9;
constexpr int kMinNMax = 2;

// Direct evaluation is exact-ish up to here; beyond, log space avoids
// factorial overflow.
constexpr int kDirectEvalMax = 20;

constexpr double kFactorial[kDirectEvalMax + 1] = {
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
};

void check_n_max(int n_max) {
    if (n_max < kMinNMax) {
        throw ConfigError("n_max must be at least 2, got " + std::to_string(n_max));
    }
}

double compute_mean(const std::vector<double>& probs) {
    double mean = 0.0;
    for (std::size_t n = 1; n < probs.size(); ++n) {
        mean += static_cast<double>(n) * probs[n];
    }
    return mean;
}

std::string format_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

double poisson_pmf(int n, double mu) {
    if (n < 0) {
        throw std::domain_error("photon number must be non-negative");
    }
    if (!std::isfinite(mu) || mu < 0.0) {
        throw std::domain_error("mean photon number must be finite and non-negative");
    }
    if (mu == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    if (n <= kDirectEvalMax) {
        return std::exp(-mu) * std::pow(mu, n) / kFactorial[n];
    }
    return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

double PhotonNumberDistribution::truncation_deficit() const {
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    return total < 1.0 ? 1.0 - total : 0.0;
}

std::string PhotonNumberDistribution::label() const {
    switch (kind) {
        case SourceKind::Poisson:
            return "poisson{mu=" + format_param(mu) + "}";
        case SourceKind::NearSingleFactorial:
            return "near_single_factorial{epsilon=" + format_param(epsilon) + "}";
        case SourceKind::Spike:
            return "spike{epsilon=" + format_param(epsilon) +
                   ",n=" + std::to_string(spike_n) + "}";
        case SourceKind::Explicit:
            return "explicit";
    }
    return "unknown";
}

PhotonNumberDistribution build_poissonian(double mu, int n_max) {
    check_n_max(n_max);
    if (!std::isfinite(mu) || mu < 0.0) {
        throw ConfigError("poissonian source requires finite mu >= 0");
    }

    PhotonNumberDistribution dist;
    dist.kind = SourceKind::Poisson;
    dist.mu = mu;
    dist.mean_photon_number = mu;
    dist.probs.resize(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        dist.probs[n] = poisson_pmf(n, mu);
    }
    if (dist.truncation_deficit() > kMaxTruncationDeficit) {
        throw ConfigError("truncated tail mass exceeds 1e-9 for mu=" + format_param(mu) +
                          ", n_max=" + std::to_string(n_max) + "; raise n_max");
    }
    return dist;
}

PhotonNumberDistribution build_near_single_factorial(double epsilon, int n_max) {
    check_n_max(n_max);
    if (!(epsilon >= 0.0) || epsilon >= 1.0) {
        throw ConfigError("near_single_factorial requires 0 <= epsilon < 1");
    }

    // Scale the 1/i! tail so the multi-photon mass is exactly epsilon over
    // the truncated range; the truncated tail of e-2 is ~1e-34 at n_max=30.
    double tail = 0.0;
    std::vector<double> inv_fact(n_max + 1, 0.0);
    for (int i = 2; i <= n_max; ++i) {
        inv_fact[i] = 1.0 / std::exp(std::lgamma(i + 1.0));
        tail += inv_fact[i];
    }
    const double k = epsilon == 0.0 ? 0.0 : epsilon / tail;

    PhotonNumberDistribution dist;
    dist.kind = SourceKind::NearSingleFactorial;
    dist.epsilon = epsilon;
    dist.probs.resize(n_max + 1, 0.0);
    dist.probs[1] = 1.0 - epsilon;
    for (int i = 2; i <= n_max; ++i) {
        dist.probs[i] = k * inv_fact[i];
    }
    dist.mean_photon_number = compute_mean(dist.probs);
    return dist;
}

PhotonNumberDistribution build_spike(double epsilon, int spike_n, int n_max) {
    check_n_max(n_max);
    if (!(epsilon >= 0.0) || epsilon >= 1.0) {
        throw ConfigError("spike source requires 0 <= epsilon < 1");
    }
    if (spike_n < 2 || spike_n > n_max) {
        throw ConfigError("spike photon number must satisfy 2 <= n <= n_max, got " +
                          std::to_string(spike_n));
    }

    PhotonNumberDistribution dist;
    dist.kind = SourceKind::Spike;
    dist.epsilon = epsilon;
    dist.spike_n = spike_n;
    dist.probs.resize(n_max + 1, 0.0);
    dist.probs[1] = 1.0 - epsilon;
    dist.probs[spike_n] = epsilon;
    dist.mean_photon_number = compute_mean(dist.probs);
    return dist;
}

PhotonNumberDistribution build_explicit(std::vector<double> probs, int n_max) {
    check_n_max(n_max);
    if (probs.size() > static_cast<std::size_t>(n_max) + 1) {
        throw ConfigError("explicit source lists more entries than n_max + 1 allows");
    }
    for (double p : probs) {
        if (!(p >= 0.0) || p > 1.0) {
            throw ConfigError("explicit source probabilities must lie in [0, 1]");
        }
    }
    probs.resize(n_max + 1, 0.0);

    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (std::abs(total - 1.0) > kMaxTruncationDeficit) {
        throw ConfigError("explicit source probabilities must sum to 1 within 1e-9");
    }

    PhotonNumberDistribution dist;
    dist.kind = SourceKind::Explicit;
    dist.probs = std::move(probs);
    dist.mean_photon_number = compute_mean(dist.probs);
    return dist;
}

PhotonNumberDistribution build_source(const SourceSpec& spec, int n_max) {
    switch (spec.kind) {
        case SourceKind::Poisson:
            return build_poissonian(spec.mu, n_max);
        case SourceKind::NearSingleFactorial:
            return build_near_single_factorial(spec.epsilon, n_max);
        case SourceKind::Spike:
            return build_spike(spec.epsilon, spec.spike_n, n_max);
        case SourceKind::Explicit:
            return build_explicit(spec.probs, n_max);
    }
    throw ConfigError("unknown source kind");
}

double multi_photon_prob(const PhotonNumberDistribution& dist) {
    double total = 0.0;
    for (std::size_t n = 2; n < dist.probs.size(); ++n) {
        total += dist.probs[n];
    }
    return total;
}

int sample_photon_number(const PhotonNumberDistribution& dist, RandomStream& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (std::size_t n = 0; n < dist.probs.size(); ++n) {
        cumulative += dist.probs[n];
        if (u < cumulative) {
            return static_cast<int>(n);
        }
    }
    // u landed in the truncation deficit; count it as vacuum.
    return 0;
}

}  // namespace qkd
