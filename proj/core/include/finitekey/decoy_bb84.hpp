#pragma once

#include <string>
#include <vector>

#include "finitekey/tail_bounds.hpp"

namespace finitekey {

enum class Basis { z = 0, x = 1 };
enum class Intensity { signal = 0, decoy = 1, vacuum = 2 };

/// Source and basis-choice configuration of the two-decoy protocol.
struct ProtocolParams {
    double mu;              // signal intensity
    double nu;              // weak decoy intensity (vacuum is the third state)
    double p_mu;            // probability of sending the signal intensity
    double p_nu;            // probability of sending the decoy intensity
    double p_z;             // sender Z-basis probability
    double q_z;             // receiver Z-basis probability
    double pulse_count;     // N, number of transmitted pulses
    double zeta = 1.22;     // error-correction efficiency
    double phi_tol = 0.5;   // abort threshold on the phase error rate

    double p_vac() const { return 1.0 - p_mu - p_nu; }
    double p_x() const { return 1.0 - p_z; }
    double q_x() const { return 1.0 - q_z; }

    void validate() const;  // throws std::domain_error with the offending field
};

/// Composable failure budgets. eps_sec is split into 23 equal per-estimate
/// shares; every tail-bound call in the pipeline runs at per_use().
struct SecurityBudget {
    double eps_sec;
    double eps_cor;

    double per_use() const { return eps_sec / 23.0; }
    void validate() const;
};

/// Detection and error counts per (intensity, basis) cell. Real-valued:
/// the deterministic simulator feeds asymptotic means.
struct ObservedCounts {
    double detected[3][2] = {};  // [Intensity][Basis]
    double errors[3][2] = {};

    double& n(Intensity i, Basis b) { return detected[int(i)][int(b)]; }
    double n(Intensity i, Basis b) const { return detected[int(i)][int(b)]; }
    double& m(Intensity i, Basis b) { return errors[int(i)][int(b)]; }
    double m(Intensity i, Basis b) const { return errors[int(i)][int(b)]; }

    /// Raw-key size: signal + decoy detections in Z.
    double n_z_sifted() const;
    /// Modeled bit error rate of the raw key.
    double bit_error_rate_z() const;

    void validate() const;
};

/// The nine expected-value bounds on individual counts ("starred" values).
struct ExpectedCountBounds {
    double n_vac_z_low, n_nu_z_low, n_mu_z_high, n_vac_z_high;
    double n_vac_x_low, n_nu_x_low, n_mu_x_high, n_vac_x_high;
    double m_nu_x_high;
};

/// Expected-value bounds on the decoy-estimated yields.
struct StarredYields {
    double s0_z;  // vacuum events in the raw key, lower
    double s1_z;  // single-photon events in the raw key, lower
    double s1_x;  // single-photon events in X, lower
    double t1_x;  // single-photon bit errors in X, upper
};

/// Observed-value bounds on the same yields.
struct ObservedYields {
    double s0_z, s1_z, s1_x, t1_x;
};

struct EpsilonAuditEntry {
    std::string parameter;  // which estimate
    std::string bound;      // which tail bound produced it
    double epsilon;         // failure share spent
    double value;
};

struct PipelineOptions {
    /// Use the six-case curty procedure instead of its simplified closed form.
    bool curty_full = false;
    /// Total trial count the six-case procedure tests against (the pulse
    /// count); only consulted when curty_full is set.
    double curty_trials = 0.0;
};

struct KeyRateReport {
    ObservedYields observed{};      // s0_z, s1_z, s1_x lower; t1_x upper
    StarredYields starred{};        // the four expected-value bounds
    ExpectedCountBounds expected{};
    double phi1_upper = 0.5;        // phase error rate bound, in [0, 0.5]
    double lambda_ec = 0.0;         // error-correction leakage, bits
    double ell = 0.0;               // extractable secret key length, bits
    double key_rate = 0.0;          // ell / N
    bool aborted = false;           // phi1_upper above phi_tol
    Method method = Method::ours_analytic;
    std::vector<EpsilonAuditEntry> audit;  // the 14 per-use budget spends
};

/// The nine per-count expected-value bounds at epsilon = budget.per_use(),
/// using the selected method's observed->expected machinery. Lower bounds
/// clamp at zero.
ExpectedCountBounds expected_bounds(const ObservedCounts& counts,
                                    const SecurityBudget& budget, Method method,
                                    const PipelineOptions& opts = {},
                                    std::vector<EpsilonAuditEntry>* audit = nullptr);

/// Decoy-state linear combinations: vacuum and single-photon expected yields
/// from the starred count bounds. Negative combinations clamp to zero.
StarredYields vacuum_single_bounds(const ExpectedCountBounds& b,
                                   const ProtocolParams& params);

/// Chernoff step back to observed values at epsilon = budget.per_use().
ObservedYields observed_from_expected(const StarredYields& s,
                                      const SecurityBudget& budget, Method method,
                                      std::vector<EpsilonAuditEntry>* audit = nullptr);

/// Phase error rate bound: t1_x/s1_x plus the sampling deviation, clamped to
/// [0, 0.5]. Returns 0.5 when there are no single-photon statistics to
/// sample from (s1_x or s1_z zero).
double phase_error_upper(double s1_z, double s1_x, double t1_x,
                         const SecurityBudget& budget, Method method,
                         std::vector<EpsilonAuditEntry>* audit = nullptr);

/// Full pipeline: counts -> expected bounds -> decoy combinations -> observed
/// bounds -> phase error -> secret key length
///   ell = s0 + s1 [1 - h(phi)] - lambda_EC - log2(2/eps_cor) - 6 log2(23/eps_sec)
/// floored at zero. The audit trail lists all 14 per-use budget spends.
KeyRateReport key_length(const ObservedCounts& counts, const ProtocolParams& params,
                         const SecurityBudget& budget, Method method,
                         const PipelineOptions& opts = {});

}  // namespace finitekey
