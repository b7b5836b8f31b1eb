#pragma once

#include <cstdint>

#include "finitekey/decoy_bb84.hpp"

namespace finitekey {

/// Lossy-fiber system model with threshold detectors.
struct ChannelModel {
    double eta_d = 0.045;   // detector efficiency
    double Y0 = 1.7e-6;     // background / dark-count yield
    double e_d = 0.033;     // misalignment error rate
    double alpha = 0.21;    // fiber attenuation, dB/km
    double L = 0.0;         // fiber length, km
    double e0 = 0.5;        // error rate of background clicks

    void validate() const;
    /// Overall transmittance eta_d * 10^(-alpha*L/10).
    double overall_efficiency() const;
};

struct GainAndError {
    double gain;        // Q_k: detection probability per pulse of intensity k
    double error_gain;  // E_k * Q_k
};

/// Q_k = 1 - (1 - Y0) e^{-k eta};  E_k Q_k = e_d Q_k + (e0 - e_d) Y0.
/// Identical for both measurement bases.
GainAndError gains_and_errors(const ChannelModel& model, double intensity);

/// Asymptotic expected detection/error counts for every (intensity, basis)
/// cell. Vacuum pulses carry no basis information, so their rows omit the
/// sender basis factor.
ObservedCounts simulate_counts(const ChannelModel& model, const ProtocolParams& params);

/// Integer counts drawn from the model (Poisson detections, binomial error
/// thinning), for end-to-end tests against the deterministic pipeline.
ObservedCounts simulate_counts_stochastic(const ChannelModel& model,
                                          const ProtocolParams& params, uint64_t seed);

}  // namespace finitekey
