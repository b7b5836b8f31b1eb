#pragma once

#include <cstdint>
#include <optional>

#include "finitekey/channel_sim.hpp"
#include "finitekey/decoy_bb84.hpp"

namespace finitekey {

/// Box constraints on the six free protocol parameters. The decoy intensity
/// bound is relative: nu ranges over [nu_lo, mu - nu_gap], and
/// p_mu + p_nu <= prob_hi keeps a vacuum share of at least 1 - prob_hi.
struct OptimizationSpace {
    double mu_lo = 0.05, mu_hi = 1.0;
    double nu_lo = 0.001, nu_gap = 0.001;
    double prob_lo = 0.001, prob_hi = 0.999;
};

struct OptimizerConfig {
    int starts = 8;          // simplex restarts (seeded from the coarse grid)
    int max_evals = 2000;    // objective-evaluation budget per start
    double rel_tol = 1e-6;   // simplex spread convergence threshold
    uint64_t seed = 1;
};

struct OptimizationResult {
    ProtocolParams params;
    KeyRateReport report;
    double key_rate = 0.0;
};

/// Maximizes ell/N over (mu, nu, p_mu, p_nu, p_z, q_z) for one channel point
/// and method. Box and simplex constraints are enforced by a logit/log
/// coordinate transform, so every evaluated candidate is feasible. The search
/// is a coarse grid seed followed by multi-start Nelder-Mead; deterministic
/// for a fixed seed. `base` supplies the fixed fields (pulse count, zeta,
/// phi_tol). `warm_start` adds one extra start at the given parameters.
OptimizationResult optimize_keyrate(const ChannelModel& model,
                                    const SecurityBudget& budget, Method method,
                                    const OptimizationSpace& space,
                                    const OptimizerConfig& cfg,
                                    const ProtocolParams& base,
                                    const PipelineOptions& opts = {},
                                    const std::optional<ProtocolParams>& warm_start =
                                        std::nullopt);

}  // namespace finitekey
