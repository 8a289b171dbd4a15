#pragma once

#include <optional>
#include <string>

#include "qkd/channel_adversary.hpp"
#include "qkd/photon_source.hpp"
#include "qkd/protocol_engine.hpp"

namespace qkd {

enum class Verdict { Secure, Insecure };

const char* to_string(Verdict v);

/// Coefficient bounding the signal multi-photon yield by the decoy yield,
/// together with the photon number attaining it (-1 when the signal source
/// has no multi-photon support).
struct RatioBound {
    double value = 0.0;
    int argmax_n = -1;
};

/// A probability bound kept alongside its unclamped value.
struct ClampedBound {
    double value = 0.0;  // min(raw, 1)
    double raw = 0.0;
};

enum class AnalysisMode { Analytic, Empirical };

/// All bound and condition arithmetic for one session, plus the verdict.
struct SecurityReport {
    double y_s = 0.0;
    double y_d = 0.0;
    double multi_bound_ratio = 0.0;      // coefficient multiplying Y_d
    double y_s_multi_upper = 0.0;        // clamped to <= 1
    double y_s_multi_upper_raw = 0.0;
    std::optional<double> normalized_multi_upper;  // unclamped intermediate
    std::optional<double> normalized_multi_upper_effective;
    double condition_lhs = 0.0;
    double condition_rhs = 0.0;
    double margin = 0.0;  // lhs - rhs
    Verdict verdict = Verdict::Insecure;
    std::optional<double> normal_op_margin;  // Poissonian pairs only
    // Conservative epsilon-based coefficient for near-single-photon signal
    // sources; reported next to the (tighter) ratio actually used.
    std::optional<double> near_single_coefficient;
    AnalysisMode mode = AnalysisMode::Analytic;
    double z = 0.0;
    std::string signal_label;
    std::string decoy_label;
};

/// Total yield of a source through a yield vector: sum_n p[n] y[n].
double expected_yield(const PhotonNumberDistribution& dist, const YieldVector& y);

/// Yield restricted to multi-photon pulses: sum_{n>=2} p[n] y[n].
double multi_photon_yield(const PhotonNumberDistribution& dist, const YieldVector& y);

/// Multi-photon yield normalized by the multi-photon probability; undefined
/// (throws) when the source never emits multi-photon pulses.
double normalized_multi_yield(const PhotonNumberDistribution& dist, const YieldVector& y);

/// P_2(mu)/P_2(mu') = e^{mu'-mu} (mu/mu')^2, the worst-case ratio of signal
/// to decoy multi-photon yields for a Poissonian pair with mu < mu'.
double poisson_pair_ratio_bound(double mu, double mu_prime);

/// max_{n>=2} signal.probs[n]/decoy.probs[n] over the signal support;
/// the distribution-agnostic counterpart of the Poissonian pair bound
/// (for a Poissonian pair with mu < mu' the maximum sits at n = 2).
/// Throws when the signal has multi-photon mass the decoy cannot certify.
RatioBound general_ratio_bound(const PhotonNumberDistribution& signal,
                               const PhotonNumberDistribution& decoy);

/// Upper bound on the signal multi-photon yield given the decoy yield.
ClampedBound bound_multi_yield(double y_d, double ratio);

/// Upper bound on the normalized signal multi-photon yield, for a Poissonian
/// signal source with mean mu < mu_prime. Unclamped; may exceed 1.
double bound_normalized_multi_yield(double y_d, const PhotonNumberDistribution& signal,
                                    double mu_prime);

/// Baseline condition without decoys: secure iff y > p_multi, strictly.
Verdict check_basic_security(double y, double p_multi);

/// Decoy condition: secure iff Y_s > ratio * Y_d, strictly. Returns a report
/// carrying both sides and the margin; callers may enrich it further.
SecurityReport check_decoy_security(double y_s, double y_d, double ratio);

/// (e^{mu'}/mu') (mu/e^{mu}); values below 1 mean the decoy condition holds
/// in honest operation at every loss level.
double normal_op_margin(double mu, double mu_prime);

/// epsilon / P_2(mu'): the conservative coefficient for the factorial-tail
/// near-single-photon source.
double near_single_ratio(double epsilon, double mu_prime);

/// Full report from closed-form yields under the given yield vector.
SecurityReport analyze_analytic(const PhotonNumberDistribution& signal,
                                const PhotonNumberDistribution& decoy,
                                const YieldVector& y, double z);

/// Full report from session estimates. Conservative substitution: the signal
/// yield is shifted down by z standard errors and the decoy yield up, before
/// the condition is tested.
SecurityReport analyze_empirical(const PhotonNumberDistribution& signal,
                                 const PhotonNumberDistribution& decoy,
                                 const YieldEstimate& signal_est,
                                 const YieldEstimate& decoy_est, double z);

}  // namespace qkd
