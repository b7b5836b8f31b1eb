#include "finitekey/tail_bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "finitekey/numerics.hpp"

namespace finitekey {

namespace {

double log_inverse(double epsilon) { return std::log(1.0 / epsilon); }

void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw std::domain_error("failure probability must be in (0, 1]");
    }
}

Deviation make_dev(double width, BoundDirection dir, double eps, Method m,
                   bool clamped = false) {
    return Deviation{width, dir, eps, m, clamped};
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::ours_numeric: return "ours-numeric";
        case Method::ours_analytic: return "ours-analytic";
        case Method::serfling: return "serfling";
        case Method::curty: return "curty";
        case Method::lim: return "lim";
        case Method::zhang_numeric: return "zhang-numeric";
        case Method::zhang_analytic: return "zhang-analytic";
        case Method::gaussian: return "gaussian";
    }
    throw std::logic_error("method_name: unknown tag");
}

Method method_from_name(const std::string& name) {
    if (name == "ours-numeric") return Method::ours_numeric;
    if (name == "ours-analytic") return Method::ours_analytic;
    if (name == "serfling") return Method::serfling;
    if (name == "curty") return Method::curty;
    if (name == "lim") return Method::lim;
    if (name == "zhang-numeric") return Method::zhang_numeric;
    if (name == "zhang-analytic") return Method::zhang_analytic;
    if (name == "gaussian") return Method::gaussian;
    throw std::invalid_argument("unknown method name: " + name);
}

void SampleSplit::validate() const {
    if (!(n > 0.0) || !(k > 0.0)) {
        throw std::domain_error("SampleSplit: n and k must be positive");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::domain_error("SampleSplit: lambda must be in [0,1]");
    }
    check_epsilon(epsilon);
}

// ---------------------------------------------------------------------------
// Equation left sides
// ---------------------------------------------------------------------------

double sampling_root_lhs(double n, double k, double lambda, double gamma) {
    // Clamp the generalized-binomial arguments against last-ulp overshoot at
    // the gamma = 1 - lambda endpoint.
    const double top = std::fmin(n * (lambda + gamma), n);
    const double bottom = std::fmin((n + k) * lambda + n * gamma, n + k);
    return ln_binomial(k, k * lambda) + ln_binomial(n, top) - ln_binomial(n + k, bottom);
}

double chernoff_upper_root_lhs(double x_star, double delta) {
    return x_star * (delta - (1.0 + delta) * std::log1p(delta));
}

double chernoff_lower_root_lhs(double x_star, double delta) {
    const double t = (delta >= 1.0) ? 0.0 : (1.0 - delta) * std::log1p(-delta);
    return -x_star * (delta + t);
}

double variant_upper_root_lhs(double x, double delta) {
    if (x == 0.0) return -delta;
    return -delta + x * std::log1p(delta / x);
}

double variant_lower_root_lhs(double x, double delta) {
    return delta - (x + delta) * std::log1p(delta / x);
}

double entropy_root_lhs(double n, double k, double lambda, double gamma) {
    const double y = std::fmin(lambda + n / (n + k) * gamma, 1.0);
    const double chi = std::fmin(lambda + gamma, 1.0);
    return binary_entropy(y) - k / (n + k) * binary_entropy(lambda) -
           n / (n + k) * binary_entropy(chi);
}

double entropy_root_rhs(double n, double k, double lambda, double epsilon) {
    return 0.5 / (n + k) *
           std::log2((n + k) / (n * k * lambda * (1.0 - lambda) * epsilon * epsilon));
}

double inverse_chernoff_upper_root_lhs(double x, double delta) {
    const double t = (delta >= 1.0) ? 0.0 : (1.0 - delta) * std::log1p(-delta);
    return x / (1.0 - delta) * (-delta - t);
}

double inverse_chernoff_lower_root_lhs(double x, double delta) {
    return x / (1.0 + delta) * (delta - (1.0 + delta) * std::log1p(delta));
}

// ---------------------------------------------------------------------------
// Sampling without replacement
// ---------------------------------------------------------------------------

Deviation gamma_upper_numeric(const SampleSplit& s) {
    s.validate();
    if (!(s.lambda > 0.0 && s.lambda < 1.0)) {
        throw std::domain_error("gamma_upper_numeric: lambda must be in (0,1)");
    }
    const double ln_eps = std::log(s.epsilon);
    auto f = [&](double g) { return sampling_root_lhs(s.n, s.k, s.lambda, g) - ln_eps; };

    if (f(0.0) <= 0.0) {
        // Already below the failure budget at zero deviation.
        return make_dev(0.0, BoundDirection::upper, s.epsilon, Method::ours_numeric);
    }
    const double g_max = 1.0 - s.lambda;
    if (f(g_max) > 0.0) {
        // Even the full deviation cannot push the left side down to ln(eps).
        return make_dev(g_max, BoundDirection::upper, s.epsilon, Method::ours_numeric,
                        true);
    }
    const double root = find_root(f, make_bracket(f, 0.0, g_max));
    return make_dev(root, BoundDirection::upper, s.epsilon, Method::ours_numeric);
}

Deviation gamma_upper_analytic(const SampleSplit& s) {
    s.validate();
    if (!(s.lambda > 0.0)) {
        throw std::domain_error("gamma_upper_analytic: lambda must be positive");
    }
    if (s.lambda >= 0.5) {
        throw std::domain_error(
            "gamma_upper_analytic: lambda must be below 0.5 (callers clamp)");
    }
    const double n = s.n, k = s.k, lam = s.lambda;
    const double total = n + k;
    const double G = total / (n * k) *
                     std::log(total / (2.0 * M_PI * n * k * lam * (1.0 - lam) *
                                       s.epsilon * s.epsilon));
    if (!(G > 0.0)) {
        throw std::domain_error(
            "gamma_upper_analytic: epsilon too large for instance size (G <= 0)");
    }
    const double A = std::fmax(n, k);
    const double ag = A * G / total;
    const double gamma =
        ((1.0 - 2.0 * lam) * ag + std::sqrt(ag * ag + 4.0 * lam * (1.0 - lam) * G)) /
        (2.0 + 2.0 * A * ag / total);
    return make_dev(gamma, BoundDirection::upper, s.epsilon, Method::ours_analytic);
}

Deviation serfling_gamma(const SampleSplit& s) {
    s.validate();
    const double w = std::sqrt((s.n + s.k) * (s.k + 1.0) * log_inverse(s.epsilon) /
                               (s.n * s.k * s.k));
    return make_dev(w, BoundDirection::upper, s.epsilon, Method::serfling);
}

Deviation lim_gamma(const SampleSplit& s) {
    s.validate();
    if (!(s.lambda > 0.0 && s.lambda < 1.0)) {
        throw std::domain_error("lim_gamma: lambda must be in (0,1)");
    }
    const double lam = s.lambda, total = s.n + s.k;
    const double arg = total / (s.n * s.k * lam * (1.0 - lam) * s.epsilon * s.epsilon);
    const double v = total * lam * (1.0 - lam) / (s.n * s.k * M_LN2) * std::log2(arg);
    return make_dev(std::sqrt(std::fmax(v, 0.0)), BoundDirection::upper, s.epsilon,
                    Method::lim);
}

Deviation zhang_gamma_numeric(const SampleSplit& s) {
    s.validate();
    if (!(s.lambda > 0.0 && s.lambda < 1.0)) {
        throw std::domain_error("zhang_gamma_numeric: lambda must be in (0,1)");
    }
    const double rhs = entropy_root_rhs(s.n, s.k, s.lambda, s.epsilon);
    if (rhs <= 0.0) {
        return make_dev(0.0, BoundDirection::upper, s.epsilon, Method::zhang_numeric);
    }
    auto f = [&](double g) { return entropy_root_lhs(s.n, s.k, s.lambda, g) - rhs; };
    const double g_max = 1.0 - s.lambda;
    if (f(g_max) < 0.0) {
        return make_dev(g_max, BoundDirection::upper, s.epsilon, Method::zhang_numeric,
                        true);
    }
    const double root = find_root(f, make_bracket(f, 0.0, g_max));
    return make_dev(root, BoundDirection::upper, s.epsilon, Method::zhang_numeric);
}

Deviation sampling_gamma(const SampleSplit& s, Method method) {
    s.validate();
    if (s.lambda >= 0.5) {
        // Above 0.5 the sampling bounds make no claim; report the vacuous
        // full-width deviation (chi <= 1 always).
        return make_dev(1.0 - s.lambda, BoundDirection::upper, s.epsilon, method, true);
    }
    if (s.epsilon == 1.0) {
        return make_dev(0.0, BoundDirection::upper, s.epsilon, method);
    }
    SampleSplit reg = s;
    if (reg.lambda == 0.0) reg.lambda = 0.5 / reg.k;  // half an error count

    Deviation d;
    switch (method) {
        case Method::ours_numeric: d = gamma_upper_numeric(reg); break;
        case Method::ours_analytic: d = gamma_upper_analytic(reg); break;
        case Method::serfling:
        case Method::curty: d = serfling_gamma(reg); break;
        case Method::lim: d = lim_gamma(reg); break;
        case Method::zhang_numeric:
        case Method::zhang_analytic:
        case Method::gaussian: d = zhang_gamma_numeric(reg); break;
    }
    d.method = method;
    return d;
}

// ---------------------------------------------------------------------------
// Chernoff bound (expected -> observed)
// ---------------------------------------------------------------------------

Deviation chernoff_delta_upper(double x_star, double epsilon, BoundMode mode) {
    if (!(x_star >= 0.0)) throw std::domain_error("chernoff: x* must be >= 0");
    check_epsilon(epsilon);
    const double beta = log_inverse(epsilon);
    const Method tag =
        mode == BoundMode::numeric ? Method::ours_numeric : Method::ours_analytic;
    if (beta == 0.0) return make_dev(0.0, BoundDirection::upper, epsilon, tag);
    if (x_star == 0.0) {
        // Limit of the additive width as x* -> 0.
        return make_dev(beta, BoundDirection::upper, epsilon, tag);
    }
    if (mode == BoundMode::analytic) {
        const double delta =
            (beta + std::sqrt(8.0 * beta * x_star + beta * beta)) / (2.0 * x_star);
        return make_dev(x_star * delta, BoundDirection::upper, epsilon, tag);
    }
    auto f = [&](double d) { return chernoff_upper_root_lhs(x_star, d) + beta; };
    const double delta = find_root(f, expand_bracket(f, 0.0, 1.0));
    return make_dev(x_star * delta, BoundDirection::upper, epsilon, tag);
}

Deviation chernoff_delta_lower(double x_star, double epsilon, BoundMode mode) {
    if (!(x_star >= 0.0)) throw std::domain_error("chernoff: x* must be >= 0");
    check_epsilon(epsilon);
    const double beta = log_inverse(epsilon);
    const Method tag =
        mode == BoundMode::numeric ? Method::ours_numeric : Method::ours_analytic;
    if (beta == 0.0) return make_dev(0.0, BoundDirection::lower, epsilon, tag);
    if (mode == BoundMode::analytic) {
        if (x_star < 2.0 * beta) {
            // deltaL = sqrt(2*beta/x*) exceeds 1: lower bound pinned at 0.
            return make_dev(x_star, BoundDirection::lower, epsilon, tag, true);
        }
        return make_dev(std::sqrt(2.0 * beta * x_star), BoundDirection::lower, epsilon,
                        tag);
    }
    if (x_star <= beta) {
        // No root of the lower equation in (0, 1].
        return make_dev(x_star, BoundDirection::lower, epsilon, tag, true);
    }
    auto f = [&](double d) { return chernoff_lower_root_lhs(x_star, d) + beta; };
    const double delta = find_root(f, make_bracket(f, 0.0, 1.0));
    return make_dev(x_star * delta, BoundDirection::lower, epsilon, tag);
}

double chernoff_upper_observed(double x_star, double epsilon, BoundMode mode) {
    return x_star + chernoff_delta_upper(x_star, epsilon, mode).width;
}

double chernoff_lower_observed(double x_star, double epsilon, BoundMode mode) {
    return std::fmax(0.0, x_star - chernoff_delta_lower(x_star, epsilon, mode).width);
}

// ---------------------------------------------------------------------------
// Variant of the Chernoff bound (observed -> expected)
// ---------------------------------------------------------------------------

Deviation variant_delta_upper(double x, double epsilon, BoundMode mode) {
    if (!(x >= 0.0)) throw std::domain_error("variant: x must be >= 0");
    check_epsilon(epsilon);
    const double beta = log_inverse(epsilon);
    const Method tag =
        mode == BoundMode::numeric ? Method::ours_numeric : Method::ours_analytic;
    if (beta == 0.0) return make_dev(0.0, BoundDirection::upper, epsilon, tag);
    if (mode == BoundMode::analytic) {
        return make_dev(beta + std::sqrt(2.0 * beta * x + beta * beta),
                        BoundDirection::upper, epsilon, tag);
    }
    if (x == 0.0) {
        // The x*ln term vanishes and the equation degenerates to -D = ln(eps).
        return make_dev(beta, BoundDirection::upper, epsilon, tag);
    }
    auto f = [&](double d) { return variant_upper_root_lhs(x, d) + beta; };
    const double delta = find_root(f, expand_bracket(f, 0.0, 1.0));
    return make_dev(delta, BoundDirection::upper, epsilon, tag);
}

Deviation variant_delta_lower(double x, double epsilon, BoundMode mode) {
    if (!(x >= 0.0)) throw std::domain_error("variant: x must be >= 0");
    check_epsilon(epsilon);
    const double beta = log_inverse(epsilon);
    const Method tag =
        mode == BoundMode::numeric ? Method::ours_numeric : Method::ours_analytic;
    if (beta == 0.0) return make_dev(0.0, BoundDirection::lower, epsilon, tag);
    if (x == 0.0) {
        return make_dev(0.0, BoundDirection::lower, epsilon, tag, true);
    }
    double raw;
    if (mode == BoundMode::analytic) {
        raw = 0.5 * beta + std::sqrt(2.0 * beta * x + 0.25 * beta * beta);
    } else {
        auto f = [&](double d) { return variant_lower_root_lhs(x, d) + beta; };
        raw = find_root(f, expand_bracket(f, 0.0, 1.0));
    }
    if (raw > x) return make_dev(x, BoundDirection::lower, epsilon, tag, true);
    return make_dev(raw, BoundDirection::lower, epsilon, tag);
}

double variant_upper_expected(double x, double epsilon, BoundMode mode) {
    return x + variant_delta_upper(x, epsilon, mode).width;
}

double variant_lower_expected(double x, double epsilon, BoundMode mode) {
    return std::fmax(0.0, x - variant_delta_lower(x, epsilon, mode).width);
}

// ---------------------------------------------------------------------------
// Prior-art expected-value bounds
// ---------------------------------------------------------------------------

namespace {

double hoeffding_worst(double n_trials, double epsilon) {
    return std::sqrt(n_trials / 2.0 * log_inverse(epsilon));
}

double g_width(double x, double y) { return std::sqrt(2.0 * x * std::log(1.0 / y)); }

}  // namespace

CurtyBounds curty_expected_bounds(double x, double n_trials, double eps_upper,
                                  double eps_lower) {
    if (!(x >= 0.0) || !(n_trials >= 0.0)) {
        throw std::domain_error("curty_expected_bounds: negative input");
    }
    check_epsilon(eps_upper);
    check_epsilon(eps_lower);

    const double mu_l =
        x - hoeffding_worst(n_trials, std::fmin(eps_upper, eps_lower));
    const bool test1 = mu_l >= 32.0 / 9.0 * std::log(2.0 / eps_upper);
    const bool test2 = mu_l > 3.0 * std::log(1.0 / eps_lower);
    const double e_ratio = 2.0 / (2.0 * M_E - 1.0);
    const bool test3 = mu_l > e_ratio * e_ratio * std::log(1.0 / eps_lower);

    const double up = test1 ? g_width(x, std::pow(eps_upper, 4) / 16.0)
                            : hoeffding_worst(n_trials, eps_upper);
    double low;
    if (test2) {
        low = g_width(x, std::pow(eps_lower, 1.5));
    } else if (test3) {
        low = g_width(x, eps_lower * eps_lower);
    } else {
        low = hoeffding_worst(n_trials, eps_lower);
    }

    CurtyBounds out;
    out.upper = make_dev(up, BoundDirection::upper, eps_upper, Method::curty);
    out.lower = make_dev(std::fmin(low, x), BoundDirection::lower, eps_lower,
                         Method::curty, low > x);
    return out;
}

CurtyBounds curty_expected_bounds_simplified(double x, double epsilon) {
    if (!(x >= 0.0)) throw std::domain_error("curty_expected_bounds: negative input");
    check_epsilon(epsilon);
    const double beta = log_inverse(epsilon);
    const double up = std::sqrt(8.0 * beta * x + 8.0 * x * M_LN2);
    const double low = std::sqrt(3.0 * beta * x);
    CurtyBounds out;
    out.upper = make_dev(up, BoundDirection::upper, epsilon, Method::curty);
    out.lower =
        make_dev(std::fmin(low, x), BoundDirection::lower, epsilon, Method::curty, low > x);
    out.small_x_caveat = true;
    return out;
}

Deviation lim_hoeffding(double x_total, double epsilon) {
    if (!(x_total >= 0.0)) throw std::domain_error("lim_hoeffding: negative total");
    check_epsilon(epsilon);
    return make_dev(hoeffding_worst(x_total, epsilon), BoundDirection::upper, epsilon,
                    Method::lim);
}

ExpectedBoundPair zhang_expected_bounds(double x, double epsilon,
                                        ExpectedBoundFlavor flavor) {
    if (!(x >= 0.0)) throw std::domain_error("zhang_expected_bounds: negative input");
    check_epsilon(epsilon);
    const double beta = log_inverse(epsilon);

    ExpectedBoundPair out;
    switch (flavor) {
        case ExpectedBoundFlavor::numeric: {
            const Method tag = Method::zhang_numeric;
            if (beta == 0.0) {
                out.upper = make_dev(0.0, BoundDirection::upper, epsilon, tag);
                out.lower = make_dev(0.0, BoundDirection::lower, epsilon, tag);
                break;
            }
            if (x == 0.0) {
                out.upper = make_dev(beta, BoundDirection::upper, epsilon, tag);
                out.lower = make_dev(0.0, BoundDirection::lower, epsilon, tag, true);
                break;
            }
            auto fu = [&](double d) {
                return inverse_chernoff_upper_root_lhs(x, d) + beta;
            };
            const double du = find_root(fu, make_bracket(fu, 0.0, 1.0 - 1e-14));
            out.upper = make_dev(x / (1.0 - du) - x, BoundDirection::upper, epsilon, tag);

            auto fl = [&](double d) {
                return inverse_chernoff_lower_root_lhs(x, d) + beta;
            };
            const double dl = find_root(fl, expand_bracket(fl, 0.0, 1.0));
            out.lower = make_dev(x - x / (1.0 + dl), BoundDirection::lower, epsilon, tag);
            break;
        }
        case ExpectedBoundFlavor::analytic: {
            const Method tag = Method::zhang_analytic;
            const double up = 1.5 * beta + std::sqrt(2.0 * beta * x + 2.25 * beta * beta);
            const double raw = std::sqrt(2.0 * beta * x + 0.25 * beta * beta) - 0.5 * beta;
            out.upper = make_dev(up, BoundDirection::upper, epsilon, tag);
            out.lower = make_dev(std::fmin(raw, x), BoundDirection::lower, epsilon, tag,
                                 raw > x);
            break;
        }
        case ExpectedBoundFlavor::gaussian: {
            const Method tag = Method::gaussian;
            double w = 0.0;
            if (epsilon < 0.5) {
                w = erfc_inv(2.0 * epsilon) * std::sqrt(2.0 * x);
            }
            out.upper = make_dev(w, BoundDirection::upper, epsilon, tag);
            out.lower =
                make_dev(std::fmin(w, x), BoundDirection::lower, epsilon, tag, w > x);
            break;
        }
    }
    return out;
}

}  // namespace finitekey
