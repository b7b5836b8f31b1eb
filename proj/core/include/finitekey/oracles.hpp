#pragma once

#include <functional>
#include <utility>

namespace finitekey {

/// Exact brute-force verifiers for the tail bounds. Everything here sums
/// log-space pmf terms, smallest first, so extreme tails survive down to the
/// underflow limit; nothing is sampled.

struct HypergeomInstance {
    int population;  // n + k
    int ones;        // number of 1-bits in the population
    int sample;      // k, the tested sample size

    void validate() const;
};

/// log Pr[j ones in the sample] for the instance; -inf outside the support.
double log_hypergeom_pmf(const HypergeomInstance& inst, int j);

/// gamma(n, k, lambda, epsilon) -> allowed deviation of the untested fraction.
using SamplingBoundFn = std::function<double(double, double, double, double)>;

/// Measured failure probability of a sampling claim: the worst case over all
/// population compositions M of
///   sum_j Pr[j ones in sample | M] * 1[chi(j,M) > lambda(j) + gamma(lambda(j))],
/// with lambda(j) = j/k and chi(j,M) = (M-j)/n. The indicator is strict so
/// that a vacuous clamped claim (chi <= 1) never counts as a failure; for
/// transcendental roots the strict and non-strict events coincide.
/// Requires n + k <= 2000.
double hypergeom_failure_prob(int n, int k, const SamplingBoundFn& gamma_fn,
                              double epsilon);

struct BinomialInstance {
    int trials;
    double p;

    void validate() const;
};

double log_binomial_pmf(const BinomialInstance& inst, int j);

enum class TailDirection { ge, le };

/// Exact Pr[X >= t] or Pr[X <= t] for real thresholds (inclusive at integer
/// thresholds). Requires trials <= 100000.
double binomial_tail(const BinomialInstance& inst, double threshold,
                     TailDirection direction);

/// observed count -> [lo, hi] interval for the unknown expected value.
using IntervalFn = std::function<std::pair<double, double>(double)>;

struct CoverageMiss {
    double below;  // Pr[x* < lo(X)]
    double above;  // Pr[x* > hi(X)]
};

/// Exact one-sided miss probabilities of an expected-value interval around
/// x* = trials * p, evaluated over the full binomial distribution of the
/// observed count.
CoverageMiss coverage_failure(const BinomialInstance& inst, const IntervalFn& interval);

}  // namespace finitekey
