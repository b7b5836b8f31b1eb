#pragma once

#include <string>

namespace finitekey {

/// Statistical-fluctuation methods. The "ours" pair are the tight bounds this
/// library is built around; the rest are prior-art methods kept for
/// comparison sweeps.
enum class Method {
    ours_numeric,
    ours_analytic,
    serfling,
    curty,
    lim,
    zhang_numeric,
    zhang_analytic,
    gaussian,
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

enum class BoundDirection { upper, lower };

/// numeric = solve the transcendental bound equation; analytic = evaluate the
/// closed-form relaxation (always at least as wide as the numeric root).
enum class BoundMode { numeric, analytic };

/// One sampling-without-replacement instance: a k-bit sample with error
/// fraction lambda drawn from an (n+k)-bit string, remainder size n.
/// Counts are real-valued; the simulation feeds asymptotic means.
struct SampleSplit {
    double n;
    double k;
    double lambda;
    double epsilon;

    void validate() const;  // throws std::domain_error on violation
};

/// A one-sided deviation. `width` is additive on the scale of the bounded
/// quantity (a fraction for sampling bounds, a count otherwise). For lower
/// bounds the width is truncated so the bounded value stays nonnegative;
/// `clamped` records that truncation (or a no-root fallback).
struct Deviation {
    double width = 0.0;
    BoundDirection direction = BoundDirection::upper;
    double epsilon = 0.0;
    Method method = Method::ours_analytic;
    bool clamped = false;
};

// ---------------------------------------------------------------------------
// Sampling without replacement: upper bound on the untested fraction chi,
//   Pr[chi >= lambda + gamma] <= epsilon.
// ---------------------------------------------------------------------------

/// Tightest bound: gamma is the positive root of
///   lnC(k, k*lam) + lnC(n, n*(lam+g)) - lnC(n+k, (n+k)*lam + n*g) = ln eps.
/// Returns gamma = 0 when the equation is already satisfied at zero deviation
/// (large epsilon) and clamps to 1 - lambda when no root exists.
Deviation gamma_upper_numeric(const SampleSplit& s);

/// Closed form: with A = max{n,k} and
///   G = (n+k)/(n*k) * ln[(n+k) / (2*pi*n*k*lam*(1-lam)*eps^2)],
///   gamma = [(1-2lam)AG/(n+k) + sqrt(A^2G^2/(n+k)^2 + 4lam(1-lam)G)]
///           / [2 + 2A^2G/(n+k)^2].
/// Valid for 0 < lambda < 0.5; throws std::domain_error for lambda >= 0.5 or
/// G <= 0 (epsilon too large for the instance size).
Deviation gamma_upper_analytic(const SampleSplit& s);

Deviation serfling_gamma(const SampleSplit& s);

/// Large-sample closed form used by the lim comparison curve. Not a rigorous
/// bound at small n, k.
Deviation lim_gamma(const SampleSplit& s);

/// Shannon-entropy transcendental equation (prior-art numeric bound).
Deviation zhang_gamma_numeric(const SampleSplit& s);

/// Protocol-facing dispatcher. Regularizes lambda = 0 to 1/(2k) (half an
/// error count) and returns the vacuous full-width deviation, clamped, for
/// lambda >= 0.5 where the sampling bounds make no claim. Methods curty and
/// gaussian map to their sampling companions (serfling and the entropy
/// equation respectively).
Deviation sampling_gamma(const SampleSplit& s, Method method);

// ---------------------------------------------------------------------------
// Chernoff bound: observed value from a known expected value x*.
//   Upper: Pr[x >= x* + width] <= eps; lower: Pr[x <= x* - width] <= eps.
// ---------------------------------------------------------------------------

/// width = x* * deltaU. Numeric root of x*[d - (1+d)ln(1+d)] = ln eps;
/// analytic deltaU = (beta + sqrt(8*beta*x* + beta^2)) / (2x*), beta = ln(1/eps).
/// At x* = 0 both modes return the limit width beta.
Deviation chernoff_delta_upper(double x_star, double epsilon, BoundMode mode);

/// width = x* * deltaL, truncated at x* (clamped) when x* is too small for a
/// root (numeric: x* <= beta; analytic: x* < 2*beta i.e. deltaL > 1).
Deviation chernoff_delta_lower(double x_star, double epsilon, BoundMode mode);

double chernoff_upper_observed(double x_star, double epsilon, BoundMode mode);
double chernoff_lower_observed(double x_star, double epsilon, BoundMode mode);

// ---------------------------------------------------------------------------
// Variant of the Chernoff bound: expected value from a known observed value x.
//   Upper: x*_bar = x + width; lower: x*_low = x - width (>= 0).
// ---------------------------------------------------------------------------

/// Numeric root of -D + x*ln((x+D)/x) = ln eps (equals beta at x = 0);
/// analytic D = beta + sqrt(2*beta*x + beta^2) (equals 2*beta at x = 0).
Deviation variant_delta_upper(double x, double epsilon, BoundMode mode);

/// Numeric root of D - (x+D)*ln((x+D)/x) = ln eps; analytic
/// D = beta/2 + sqrt(2*beta*x + beta^2/4). x = 0 has no finite root: the
/// bound is 0 with clamped set.
Deviation variant_delta_lower(double x, double epsilon, BoundMode mode);

double variant_upper_expected(double x, double epsilon, BoundMode mode);
double variant_lower_expected(double x, double epsilon, BoundMode mode);

// ---------------------------------------------------------------------------
// Prior-art expected-value bounds (comparison only).
// ---------------------------------------------------------------------------

struct CurtyBounds {
    Deviation upper;
    Deviation lower;
    /// Set on simplified-mode results: the closed form is known not to be
    /// rigorous for small observed values (no threshold is defined).
    bool small_x_caveat = false;
};

/// Full six-case multiplicative-Chernoff procedure. The worst-case fallback
/// width is sqrt(n_trials/2 * ln(1/eps)); the case tests compare
/// mu_L = x - sqrt(n_trials/2 * ln(1/min(eps_upper, eps_lower))) against the
/// three published thresholds.
CurtyBounds curty_expected_bounds(double x, double n_trials, double eps_upper,
                                  double eps_lower);

/// Simplified closed form (the variant used in key-rate simulations):
///   upper width sqrt(8*beta*x + 8*x*ln2), lower width sqrt(3*beta*x).
CurtyBounds curty_expected_bounds_simplified(double x, double epsilon);

/// Intensity-shared Hoeffding width sqrt(x_total/2 * ln(1/eps)); the same
/// width applies to every intensity's count in the family summed into
/// x_total.
Deviation lim_hoeffding(double x_total, double epsilon);

enum class ExpectedBoundFlavor { numeric, analytic, gaussian };

struct ExpectedBoundPair {
    Deviation upper;
    Deviation lower;
};

/// Inverse-solution Chernoff bounds (numeric pair / closed forms) and the
/// Gaussian-analysis width erfc_inv(2*eps)*sqrt(2x). The numeric upper
/// equation is algebraically the same as variant_delta_upper.
ExpectedBoundPair zhang_expected_bounds(double x, double epsilon,
                                        ExpectedBoundFlavor flavor);

// ---------------------------------------------------------------------------
// Equation left sides, exposed for plug-back residual checks. Each root
// solved above satisfies lhs(root) = ln(epsilon) up to solver tolerance.
// ---------------------------------------------------------------------------

double sampling_root_lhs(double n, double k, double lambda, double gamma);
double chernoff_upper_root_lhs(double x_star, double delta);
double chernoff_lower_root_lhs(double x_star, double delta);
double variant_upper_root_lhs(double x, double delta);
double variant_lower_root_lhs(double x, double delta);
/// Entropy sampling equation: lhs(gamma) = rhs(epsilon) at the root.
double entropy_root_lhs(double n, double k, double lambda, double gamma);
double entropy_root_rhs(double n, double k, double lambda, double epsilon);
double inverse_chernoff_upper_root_lhs(double x, double delta);
double inverse_chernoff_lower_root_lhs(double x, double delta);

}  // namespace finitekey
