#pragma once

#include <functional>

namespace finitekey {

/// A sign-changing interval for one-dimensional root finding.
/// Invariant: lo < hi and f_lo, f_hi have opposite signs (or one is zero).
struct Bracket {
    double lo;
    double hi;
    double f_lo;
    double f_hi;
};

struct RootConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_iter = 200;
};

/// Binary Shannon entropy -x*log2(x) - (1-x)*log2(1-x), with 0*log2(0) = 0.
/// Throws std::domain_error outside [0, 1].
double binary_entropy(double x);

/// log of the generalized binomial coefficient,
///   ln Gamma(n+1) - ln Gamma(j+1) - ln Gamma(n-j+1),
/// valid for real n >= j >= 0 and exact (up to rounding) at integer arguments.
double ln_binomial(double n, double j);

/// Inverse complementary error function: returns a with erfc(a) = y.
/// Rational initial guess polished by Newton steps on std::erfc; relative
/// accuracy ~1e-14 over (0, 2). Throws std::domain_error outside (0, 2).
double erfc_inv(double y);

/// Evaluates f at [lo, hi] and returns a validated bracket.
/// Throws std::invalid_argument if there is no sign change.
Bracket make_bracket(const std::function<double(double)>& f, double lo, double hi);

/// Doubles hi until f changes sign on [lo, hi]. For bound equations whose
/// root has no a-priori upper limit. Throws std::runtime_error if hi becomes
/// non-finite or the doubling cap is reached without a sign change.
Bracket expand_bracket(const std::function<double(double)>& f, double lo, double hi);

/// Brent-style bracketed root solve (inverse quadratic / secant steps with a
/// bisection safeguard). Returns x inside the initial bracket with either
/// |f(x)| <= abs_tol or the bracket narrowed below abs_tol + rel_tol*|x|.
/// Throws std::runtime_error if max_iter is exhausted.
double find_root(const std::function<double(double)>& f, const Bracket& bracket,
                 const RootConfig& cfg = {});

}  // namespace finitekey
