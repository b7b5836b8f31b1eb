#include "finitekey/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace finitekey {

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("binary_entropy: argument " + std::to_string(x) +
                                " outside [0,1]");
    }
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double ln_binomial(double n, double j) {
    if (!(j >= 0.0) || !(j <= n)) {
        throw std::domain_error("ln_binomial: need 0 <= j <= n, got n=" +
                                std::to_string(n) + " j=" + std::to_string(j));
    }
    if (j == 0.0 || j == n) return 0.0;
    return std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
}

namespace {

// Abramowitz-Stegun 26.2.23 style rational guess for the upper-tail normal
// quantile: returns z with Q(z) ~= p for p in (0, 0.5].
double normal_upper_quantile_guess(double p) {
    const double t = std::sqrt(-2.0 * std::log(p));
    return t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t);
}

constexpr double kTwoOverSqrtPi = 1.1283791670955126;

}  // namespace

double erfc_inv(double y) {
    if (!(y > 0.0 && y < 2.0)) {
        throw std::domain_error("erfc_inv: argument " + std::to_string(y) +
                                " outside (0,2)");
    }
    if (y == 1.0) return 0.0;
    if (y > 1.0) return -erfc_inv(2.0 - y);

    // erfc(a) = y  <=>  a = Phi^{-1}(1 - y/2) / sqrt(2)
    double a;
    if (y > 0.5) {
        a = (1.0 - y) * std::sqrt(M_PI) / 2.0;  // erfc(a) ~ 1 - 2a/sqrt(pi) near 0
    } else {
        a = normal_upper_quantile_guess(0.5 * y) / std::sqrt(2.0);
    }
    // Newton on f(a) = erfc(a) - y, f'(a) = -2/sqrt(pi) * exp(-a^2).
    for (int i = 0; i < 6; ++i) {
        const double err = std::erfc(a) - y;
        if (err == 0.0) break;
        const double step = err / (kTwoOverSqrtPi * std::exp(-a * a));
        a += step;
        if (std::fabs(step) <= 1e-15 * std::fabs(a)) break;
    }
    return a;
}

Bracket make_bracket(const std::function<double(double)>& f, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("make_bracket: need lo < hi");
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo != 0.0 && f_hi != 0.0 && std::signbit(f_lo) == std::signbit(f_hi)) {
        throw std::invalid_argument("make_bracket: no sign change on interval");
    }
    return {lo, hi, f_lo, f_hi};
}

Bracket expand_bracket(const std::function<double(double)>& f, double lo, double hi) {
    const double f_lo = f(lo);
    double f_hi = f(hi);
    // f values of 1e9 doublings would overflow long before the loop cap; the
    // finiteness check is the operative guard.
    for (long i = 0; i < 1000000000L; ++i) {
        if (f_lo == 0.0 || f_hi == 0.0 ||
            std::signbit(f_lo) != std::signbit(f_hi)) {
            return {lo, hi, f_lo, f_hi};
        }
        hi *= 2.0;
        if (!std::isfinite(hi)) break;
        f_hi = f(hi);
    }
    throw std::runtime_error("expand_bracket: no sign change found");
}

double find_root(const std::function<double(double)>& f, const Bracket& bracket,
                 const RootConfig& cfg) {
    double a = bracket.lo, b = bracket.hi;
    double fa = bracket.f_lo, fb = bracket.f_hi;
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::signbit(fa) == std::signbit(fb)) {
        throw std::invalid_argument("find_root: bracket does not change sign");
    }

    double c = a, fc = fa;
    double d = b - a, e = d;
    const double eps_m = std::numeric_limits<double>::epsilon();

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 =
            2.0 * eps_m * std::fabs(b) + 0.5 * (cfg.abs_tol + cfg.rel_tol * std::fabs(b));
        const double xm = 0.5 * (c - b);
        if (std::fabs(fb) <= cfg.abs_tol || fb == 0.0 || std::fabs(xm) <= tol1) {
            return b;
        }
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            // Inverse quadratic interpolation (secant when a == c).
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::fmin(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if (std::fabs(d) > tol1) {
            b += d;
        } else {
            b += (xm > 0.0 ? tol1 : -tol1);
        }
        fb = f(b);
    }
    throw std::runtime_error("find_root: no convergence within max_iter");
}

}  // namespace finitekey
