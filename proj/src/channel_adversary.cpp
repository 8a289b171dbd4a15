#include "qkd/channel_adversary.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qkd/errors.hpp"

namespace qkd {

namespace {

std::string format_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0) || p > 1.0) {
        throw ConfigError(std::string(what) + " must lie in [0, 1]");
    }
}

YieldVector zero_vector(int n_max) {
    if (n_max < 1) {
        throw ConfigError("yield vector needs n_max >= 1");
    }
    YieldVector v;
    v.y.resize(n_max + 1, 0.0);
    return v;
}

}  // namespace

std::string AdversarySpec::label() const {
    switch (kind) {
        case AdversaryKind::Passive:
            return "passive{eta=" + format_param(eta) + "}";
        case AdversaryKind::NaivePns:
            return "naive_pns";
        case AdversaryKind::OptimalPns:
            return "optimal_pns{beta=" + format_param(beta) + "}";
        case AdversaryKind::RateMatchingPns:
            if (!std::isnan(eta_mimic)) {
                return "rate_matching_pns{eta_mimic=" + format_param(eta_mimic) + "}";
            }
            return "rate_matching_pns{target=" + format_param(target_yield) + "}";
        case AdversaryKind::Explicit:
            return "explicit";
    }
    return "unknown";
}

YieldVector passive_yield_vector(double eta, int n_max) {
    check_probability(eta, "transmittance eta");
    YieldVector v = zero_vector(n_max);
    const double miss = 1.0 - eta;
    double miss_all = 1.0;  // (1-eta)^n
    for (int n = 1; n <= n_max; ++n) {
        miss_all *= miss;
        v.y[n] = 1.0 - miss_all;
    }
    return v;
}

YieldVector adversary_yield_vector(const AdversarySpec& spec, int n_max,
                                   const PhotonNumberDistribution* signal) {
    switch (spec.kind) {
        case AdversaryKind::Passive:
            return passive_yield_vector(spec.eta, n_max);

        case AdversaryKind::NaivePns: {
            YieldVector v = zero_vector(n_max);
            for (int n = 2; n <= n_max; ++n) {
                v.y[n] = 1.0;
            }
            return v;
        }

        case AdversaryKind::OptimalPns: {
            check_probability(spec.beta, "beta");
            YieldVector v = zero_vector(n_max);
            v.y[2] = spec.beta;
            return v;
        }

        case AdversaryKind::RateMatchingPns: {
            if (signal == nullptr) {
                throw ConfigError("rate_matching_pns needs the signal distribution");
            }
            if (signal->n_max() != n_max) {
                throw std::invalid_argument("signal distribution n_max mismatch");
            }
            double target = spec.target_yield;
            if (std::isnan(target)) {
                if (std::isnan(spec.eta_mimic)) {
                    throw ConfigError("rate_matching_pns needs target_yield or eta_mimic");
                }
                const YieldVector honest = passive_yield_vector(spec.eta_mimic, n_max);
                target = 0.0;
                for (int n = 0; n <= n_max; ++n) {
                    target += signal->probs[n] * honest.y[n];
                }
            }
            check_probability(target, "target yield");

            const double p_multi = multi_photon_prob(*signal);
            if (target == 0.0) {
                return zero_vector(n_max);
            }
            if (p_multi == 0.0 || target / p_multi > 1.0) {
                throw InfeasibleError(
                    "rate_matching_pns target " + format_param(target) +
                    " exceeds the signal multi-photon probability " + format_param(p_multi));
            }
            YieldVector v = zero_vector(n_max);
            const double c = target / p_multi;
            for (int n = 2; n <= n_max; ++n) {
                v.y[n] = c;
            }
            return v;
        }

        case AdversaryKind::Explicit: {
            if (spec.explicit_y.size() > static_cast<std::size_t>(n_max) + 1) {
                throw ConfigError("explicit yield vector lists more entries than n_max + 1");
            }
            YieldVector v = zero_vector(n_max);
            for (std::size_t n = 0; n < spec.explicit_y.size(); ++n) {
                check_probability(spec.explicit_y[n], "yield entry");
                v.y[n] = spec.explicit_y[n];
            }
            if (v.y[0] != 0.0) {
                throw ConfigError("y[0] must be 0: detectors have no dark counts here");
            }
            return v;
        }
    }
    throw ConfigError("unknown adversary kind");
}

bool realize_detection(const YieldVector& y, int n, RandomStream& rng) {
    if (n < 0 || n > y.n_max()) {
        throw std::out_of_range("photon number outside the yield vector range");
    }
    return rng.bernoulli(y.y[n]);
}

}  // namespace qkd
