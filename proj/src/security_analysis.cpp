#include "qkd/security_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qkd/errors.hpp"

namespace qkd {

namespace {

void check_same_length(std::size_t a, std::size_t b) {
    if (a != b) {
        throw std::invalid_argument("distribution and yield vector lengths differ");
    }
}

// Poissonian pairs get the closed-form coefficient; every other combination
// falls back to the distribution-wise maximum, which agrees with it on
// Poissonian pairs.
RatioBound select_ratio(const PhotonNumberDistribution& signal,
                        const PhotonNumberDistribution& decoy) {
    if (signal.kind == SourceKind::Poisson && decoy.kind == SourceKind::Poisson &&
        signal.mu > 0.0 && signal.mu < decoy.mu) {
        return {poisson_pair_ratio_bound(signal.mu, decoy.mu), 2};
    }
    return general_ratio_bound(signal, decoy);
}

SecurityReport compose(const PhotonNumberDistribution& signal,
                       const PhotonNumberDistribution& decoy, double y_s, double y_d,
                       AnalysisMode mode, double z) {
    const RatioBound ratio = select_ratio(signal, decoy);
    SecurityReport report = check_decoy_security(y_s, y_d, ratio.value);

    const double p_multi = multi_photon_prob(signal);
    if (p_multi > 0.0) {
        report.normalized_multi_upper = report.y_s_multi_upper_raw / p_multi;
        report.normalized_multi_upper_effective =
            std::min(1.0, *report.normalized_multi_upper);
    }
    if (signal.kind == SourceKind::Poisson && decoy.kind == SourceKind::Poisson &&
        signal.mu > 0.0 && decoy.mu > 0.0) {
        report.normal_op_margin = normal_op_margin(signal.mu, decoy.mu);
    }
    if (signal.kind == SourceKind::NearSingleFactorial &&
        decoy.kind == SourceKind::Poisson && decoy.mu > 0.0) {
        report.near_single_coefficient = near_single_ratio(signal.epsilon, decoy.mu);
    }

    report.mode = mode;
    report.z = z;
    report.signal_label = signal.label();
    report.decoy_label = decoy.label();
    return report;
}

}  // namespace

const char* to_string(Verdict v) {
    return v == Verdict::Secure ? "secure" : "insecure";
}

double expected_yield(const PhotonNumberDistribution& dist, const YieldVector& y) {
    check_same_length(dist.probs.size(), y.y.size());
    double total = 0.0;
    for (std::size_t n = 0; n < dist.probs.size(); ++n) {
        total += dist.probs[n] * y.y[n];
    }
    return total;
}

double multi_photon_yield(const PhotonNumberDistribution& dist, const YieldVector& y) {
    check_same_length(dist.probs.size(), y.y.size());
    double total = 0.0;
    for (std::size_t n = 2; n < dist.probs.size(); ++n) {
        total += dist.probs[n] * y.y[n];
    }
    return total;
}

double normalized_multi_yield(const PhotonNumberDistribution& dist, const YieldVector& y) {
    const double p_multi = multi_photon_prob(dist);
    if (!(p_multi > 0.0)) {
        throw std::domain_error(
            "normalized multi-photon yield is undefined for a source that never "
            "emits multi-photon pulses");
    }
    return multi_photon_yield(dist, y) / p_multi;
}

double poisson_pair_ratio_bound(double mu, double mu_prime) {
    if (!(mu > 0.0) || !(mu < mu_prime)) {
        throw std::domain_error("pair bound requires 0 < mu < mu_prime");
    }
    const double r = mu / mu_prime;
    return std::exp(mu_prime - mu) * r * r;
}

RatioBound general_ratio_bound(const PhotonNumberDistribution& signal,
                               const PhotonNumberDistribution& decoy) {
    check_same_length(signal.probs.size(), decoy.probs.size());
    RatioBound bound;
    for (std::size_t n = 2; n < signal.probs.size(); ++n) {
        if (signal.probs[n] <= 0.0) {
            continue;
        }
        if (decoy.probs[n] <= 0.0) {
            throw std::domain_error(
                "signal emits " + std::to_string(n) +
                "-photon pulses the decoy source never produces; its yield "
                "cannot be certified");
        }
        const double r = signal.probs[n] / decoy.probs[n];
        if (r > bound.value) {
            bound.value = r;
            bound.argmax_n = static_cast<int>(n);
        }
    }
    return bound;
}

ClampedBound bound_multi_yield(double y_d, double ratio) {
    const double raw = ratio * y_d;
    return {std::min(raw, 1.0), raw};
}

double bound_normalized_multi_yield(double y_d, const PhotonNumberDistribution& signal,
                                    double mu_prime) {
    if (signal.kind != SourceKind::Poisson) {
        throw std::domain_error("normalized bound is stated for Poissonian signal sources");
    }
    const double p_multi = multi_photon_prob(signal);
    if (!(p_multi > 0.0)) {
        throw std::domain_error("normalized bound is undefined without multi-photon mass");
    }
    return poisson_pair_ratio_bound(signal.mu, mu_prime) / p_multi * y_d;
}

Verdict check_basic_security(double y, double p_multi) {
    return y > p_multi ? Verdict::Secure : Verdict::Insecure;
}

SecurityReport check_decoy_security(double y_s, double y_d, double ratio) {
    SecurityReport report;
    report.y_s = y_s;
    report.y_d = y_d;
    report.multi_bound_ratio = ratio;
    const ClampedBound upper = bound_multi_yield(y_d, ratio);
    report.y_s_multi_upper = upper.value;
    report.y_s_multi_upper_raw = upper.raw;
    report.condition_lhs = y_s;
    report.condition_rhs = upper.raw;
    report.margin = report.condition_lhs - report.condition_rhs;
    // Strict inequality: on the boundary the whole key can be attacked.
    report.verdict = report.condition_lhs > report.condition_rhs ? Verdict::Secure
                                                                 : Verdict::Insecure;
    return report;
}

double normal_op_margin(double mu, double mu_prime) {
    if (!(mu > 0.0) || !(mu_prime > 0.0)) {
        throw std::domain_error("normal-operation margin requires positive means");
    }
    return std::exp(mu_prime - mu) * mu / mu_prime;
}

double near_single_ratio(double epsilon, double mu_prime) {
    if (!(epsilon >= 0.0) || epsilon >= 1.0) {
        throw std::domain_error("near-single coefficient requires 0 <= epsilon < 1");
    }
    if (!(mu_prime > 0.0)) {
        throw std::domain_error("near-single coefficient requires mu_prime > 0");
    }
    return epsilon / poisson_pmf(2, mu_prime);
}

SecurityReport analyze_analytic(const PhotonNumberDistribution& signal,
                                const PhotonNumberDistribution& decoy,
                                const YieldVector& y, double z) {
    const double y_s = expected_yield(signal, y);
    const double y_d = expected_yield(decoy, y);
    return compose(signal, decoy, y_s, y_d, AnalysisMode::Analytic, z);
}

SecurityReport analyze_empirical(const PhotonNumberDistribution& signal,
                                 const PhotonNumberDistribution& decoy,
                                 const YieldEstimate& signal_est,
                                 const YieldEstimate& decoy_est, double z) {
    if (!(z > 0.0)) {
        throw std::domain_error("confidence z must be positive");
    }
    // Shift each estimate toward the adversary's advantage before testing.
    const double y_s = std::clamp(signal_est.y_hat - z * signal_est.std_err, 0.0, 1.0);
    const double y_d = std::clamp(decoy_est.y_hat + z * decoy_est.std_err, 0.0, 1.0);
    return compose(signal, decoy, y_s, y_d, AnalysisMode::Empirical, z);
}

}  // namespace qkd
