#include "finitekey/decoy_bb84.hpp"

#include <cmath>
#include <stdexcept>

#include "finitekey/numerics.hpp"

namespace finitekey {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw std::domain_error(field + ": " + what);
}

}  // namespace

void ProtocolParams::validate() const {
    require(mu > 0.0 && std::isfinite(mu), "mu", "must be positive");
    require(nu > 0.0, "nu", "must be positive");
    require(mu > nu, "nu", "must be below mu");
    require(p_mu > 0.0 && p_mu < 1.0, "p_mu", "must be in (0,1)");
    require(p_nu > 0.0 && p_nu < 1.0, "p_nu", "must be in (0,1)");
    require(p_mu + p_nu < 1.0, "p_nu", "p_mu + p_nu must be below 1");
    require(p_z > 0.0 && p_z < 1.0, "p_z", "must be in (0,1)");
    require(q_z > 0.0 && q_z < 1.0, "q_z", "must be in (0,1)");
    require(pulse_count >= 0.0 && std::isfinite(pulse_count), "N",
            "must be nonnegative");
    require(zeta >= 1.0, "zeta", "must be at least 1");
    require(phi_tol > 0.0 && phi_tol <= 0.5, "phi_tol", "must be in (0, 0.5]");
}

void SecurityBudget::validate() const {
    require(eps_sec > 0.0 && eps_sec < 1.0, "eps_sec", "must be in (0,1)");
    require(eps_cor > 0.0 && eps_cor < 1.0, "eps_cor", "must be in (0,1)");
}

double ObservedCounts::n_z_sifted() const {
    return n(Intensity::signal, Basis::z) + n(Intensity::decoy, Basis::z);
}

double ObservedCounts::bit_error_rate_z() const {
    const double total = n_z_sifted();
    if (total <= 0.0) return 0.0;
    return (m(Intensity::signal, Basis::z) + m(Intensity::decoy, Basis::z)) / total;
}

void ObservedCounts::validate() const {
    for (int i = 0; i < 3; ++i) {
        for (int b = 0; b < 2; ++b) {
            require(std::isfinite(detected[i][b]) && detected[i][b] >= 0.0, "counts",
                    "detections must be finite and nonnegative");
            require(std::isfinite(errors[i][b]) && errors[i][b] >= 0.0, "counts",
                    "errors must be finite and nonnegative");
            require(errors[i][b] <= detected[i][b], "counts",
                    "error count exceeds detection count");
        }
    }
}

namespace {

void push_audit(std::vector<EpsilonAuditEntry>* audit, const std::string& parameter,
                const std::string& bound, double eps, double value) {
    if (audit) audit->push_back({parameter, bound, eps, value});
}

struct ExpectedStep {
    // x -> lower/upper expected-value bound for a count in the given family.
    enum class Family { n_z, n_x, m_x };
    Method method;
    BoundMode mode = BoundMode::analytic;
    bool curty_full = false;
    double curty_trials = 0.0;
    double eps = 0.0;
    // Per-family totals for the shared-width Hoeffding method.
    double totals[3] = {0.0, 0.0, 0.0};
    std::string label;

    double lower(double x, Family fam) const {
        switch (method) {
            case Method::ours_numeric:
            case Method::ours_analytic:
                return variant_lower_expected(x, eps, mode);
            case Method::curty: {
                const auto cb = curty_full
                                    ? curty_expected_bounds(x, curty_trials, eps, eps)
                                    : curty_expected_bounds_simplified(x, eps);
                return std::fmax(0.0, x - cb.lower.width);
            }
            case Method::lim:
                return std::fmax(0.0, x - lim_hoeffding(totals[int(fam)], eps).width);
            case Method::zhang_numeric:
                return std::fmax(
                    0.0, x - zhang_expected_bounds(x, eps, ExpectedBoundFlavor::numeric)
                                 .lower.width);
            case Method::zhang_analytic:
                return std::fmax(
                    0.0, x - zhang_expected_bounds(x, eps, ExpectedBoundFlavor::analytic)
                                 .lower.width);
            case Method::gaussian:
                return std::fmax(
                    0.0, x - zhang_expected_bounds(x, eps, ExpectedBoundFlavor::gaussian)
                                 .lower.width);
            case Method::serfling:
                throw std::invalid_argument(
                    "serfling is a sampling-only method; no expected-value bounds");
        }
        throw std::logic_error("unreachable");
    }

    double upper(double x, Family fam) const {
        switch (method) {
            case Method::ours_numeric:
            case Method::ours_analytic:
                return variant_upper_expected(x, eps, mode);
            case Method::curty: {
                const auto cb = curty_full
                                    ? curty_expected_bounds(x, curty_trials, eps, eps)
                                    : curty_expected_bounds_simplified(x, eps);
                return x + cb.upper.width;
            }
            case Method::lim:
                return x + lim_hoeffding(totals[int(fam)], eps).width;
            case Method::zhang_numeric:
                return x + zhang_expected_bounds(x, eps, ExpectedBoundFlavor::numeric)
                               .upper.width;
            case Method::zhang_analytic:
                return x + zhang_expected_bounds(x, eps, ExpectedBoundFlavor::analytic)
                               .upper.width;
            case Method::gaussian:
                return x + zhang_expected_bounds(x, eps, ExpectedBoundFlavor::gaussian)
                               .upper.width;
            case Method::serfling:
                throw std::invalid_argument(
                    "serfling is a sampling-only method; no expected-value bounds");
        }
        throw std::logic_error("unreachable");
    }
};

ExpectedStep make_expected_step(const ObservedCounts& c, const SecurityBudget& budget,
                                Method method, const PipelineOptions& opts) {
    ExpectedStep step;
    step.method = method;
    step.mode = (method == Method::ours_numeric) ? BoundMode::numeric
                                                 : BoundMode::analytic;
    step.curty_full = opts.curty_full;
    step.curty_trials = opts.curty_trials;
    step.eps = budget.per_use();
    for (auto i : {Intensity::signal, Intensity::decoy, Intensity::vacuum}) {
        step.totals[int(ExpectedStep::Family::n_z)] += c.n(i, Basis::z);
        step.totals[int(ExpectedStep::Family::n_x)] += c.n(i, Basis::x);
        step.totals[int(ExpectedStep::Family::m_x)] += c.m(i, Basis::x);
    }
    switch (method) {
        case Method::ours_numeric: step.label = "variant-chernoff-numeric"; break;
        case Method::ours_analytic: step.label = "variant-chernoff-analytic"; break;
        case Method::curty:
            step.label = opts.curty_full ? "curty-six-case" : "curty-simplified";
            break;
        case Method::lim: step.label = "hoeffding-shared"; break;
        case Method::zhang_numeric: step.label = "inverse-chernoff-numeric"; break;
        case Method::zhang_analytic: step.label = "inverse-chernoff-analytic"; break;
        case Method::gaussian: step.label = "gaussian"; break;
        case Method::serfling: step.label = "serfling"; break;
    }
    return step;
}

}  // namespace

ExpectedCountBounds expected_bounds(const ObservedCounts& counts,
                                    const SecurityBudget& budget, Method method,
                                    const PipelineOptions& opts,
                                    std::vector<EpsilonAuditEntry>* audit) {
    counts.validate();
    budget.validate();
    const ExpectedStep step = make_expected_step(counts, budget, method, opts);
    using Fam = ExpectedStep::Family;

    ExpectedCountBounds b{};
    b.n_vac_z_low = step.lower(counts.n(Intensity::vacuum, Basis::z), Fam::n_z);
    b.n_nu_z_low = step.lower(counts.n(Intensity::decoy, Basis::z), Fam::n_z);
    b.n_mu_z_high = step.upper(counts.n(Intensity::signal, Basis::z), Fam::n_z);
    b.n_vac_z_high = step.upper(counts.n(Intensity::vacuum, Basis::z), Fam::n_z);
    b.n_vac_x_low = step.lower(counts.n(Intensity::vacuum, Basis::x), Fam::n_x);
    b.n_nu_x_low = step.lower(counts.n(Intensity::decoy, Basis::x), Fam::n_x);
    b.n_mu_x_high = step.upper(counts.n(Intensity::signal, Basis::x), Fam::n_x);
    b.n_vac_x_high = step.upper(counts.n(Intensity::vacuum, Basis::x), Fam::n_x);
    b.m_nu_x_high = step.upper(counts.m(Intensity::decoy, Basis::x), Fam::m_x);

    const double eps = budget.per_use();
    push_audit(audit, "n_vac_z_expected_lower", step.label, eps, b.n_vac_z_low);
    push_audit(audit, "n_nu_z_expected_lower", step.label, eps, b.n_nu_z_low);
    push_audit(audit, "n_mu_z_expected_upper", step.label, eps, b.n_mu_z_high);
    push_audit(audit, "n_vac_z_expected_upper", step.label, eps, b.n_vac_z_high);
    push_audit(audit, "n_vac_x_expected_lower", step.label, eps, b.n_vac_x_low);
    push_audit(audit, "n_nu_x_expected_lower", step.label, eps, b.n_nu_x_low);
    push_audit(audit, "n_mu_x_expected_upper", step.label, eps, b.n_mu_x_high);
    push_audit(audit, "n_vac_x_expected_upper", step.label, eps, b.n_vac_x_high);
    push_audit(audit, "m_nu_x_expected_upper", step.label, eps, b.m_nu_x_high);
    return b;
}

StarredYields vacuum_single_bounds(const ExpectedCountBounds& b,
                                   const ProtocolParams& params) {
    params.validate();
    const double mu = params.mu, nu = params.nu;
    const double p_mu = params.p_mu, p_nu = params.p_nu, p0 = params.p_vac();
    if (p0 <= 0.0) throw std::domain_error("p_0: vacuum probability must be positive");

    const double e_mu = std::exp(-mu), e_nu = std::exp(-nu);

    // Vacuum pulses carry no sender basis, so their counts cover both bases.
    // The per-basis share entering each combination is the basis probability
    // times the full vacuum count; without that factor the vacuum terms would
    // be overweighted by 1/p_z (1/p_x) against the basis-filtered signal and
    // decoy counts.
    const double vac_z = params.p_z / p0;
    const double vac_x = params.p_x() / p0;

    StarredYields s{};
    s.s0_z = std::fmax(0.0, (e_mu * p_mu + e_nu * p_nu) * vac_z * b.n_vac_z_low);

    // Single-photon prefactor of the two-decoy linear combination.
    const double tau = (mu * mu * e_mu * p_mu + mu * nu * e_nu * p_nu) /
                       (mu * nu - nu * nu);
    const double ratio = nu * nu / (mu * mu);
    auto single = [&](double n_nu_low, double n_mu_high, double n_vac_high,
                      double vac_share) {
        return std::fmax(0.0, tau * (std::exp(nu) * n_nu_low / p_nu -
                                     ratio * std::exp(mu) * n_mu_high / p_mu -
                                     (1.0 - ratio) * vac_share * n_vac_high));
    };
    s.s1_z = single(b.n_nu_z_low, b.n_mu_z_high, b.n_vac_z_high, vac_z);
    s.s1_x = single(b.n_nu_x_low, b.n_mu_x_high, b.n_vac_x_high, vac_x);

    // Vacuum X errors are half the vacuum X detections in expectation.
    s.t1_x = std::fmax(0.0, (mu * e_mu * p_mu + nu * e_nu * p_nu) / nu *
                                (std::exp(nu) * b.m_nu_x_high / p_nu -
                                 vac_x * b.n_vac_x_low / 2.0));
    return s;
}

ObservedYields observed_from_expected(const StarredYields& s,
                                      const SecurityBudget& budget, Method method,
                                      std::vector<EpsilonAuditEntry>* audit) {
    budget.validate();
    if (!(s.s0_z >= 0.0 && s.s1_z >= 0.0 && s.s1_x >= 0.0 && s.t1_x >= 0.0)) {
        throw std::domain_error("observed_from_expected: starred bounds must be >= 0");
    }
    const double eps = budget.per_use();
    const BoundMode mode =
        (method == Method::ours_numeric || method == Method::zhang_numeric)
            ? BoundMode::numeric
            : BoundMode::analytic;
    const std::string label =
        mode == BoundMode::numeric ? "chernoff-numeric" : "chernoff-analytic";

    ObservedYields out{};
    out.s0_z = chernoff_lower_observed(s.s0_z, eps, mode);
    out.s1_z = chernoff_lower_observed(s.s1_z, eps, mode);
    out.s1_x = chernoff_lower_observed(s.s1_x, eps, mode);
    out.t1_x = chernoff_upper_observed(s.t1_x, eps, mode);

    push_audit(audit, "s0_z_observed_lower", label, eps, out.s0_z);
    push_audit(audit, "s1_z_observed_lower", label, eps, out.s1_z);
    push_audit(audit, "s1_x_observed_lower", label, eps, out.s1_x);
    push_audit(audit, "t1_x_observed_upper", label, eps, out.t1_x);
    return out;
}

double phase_error_upper(double s1_z, double s1_x, double t1_x,
                         const SecurityBudget& budget, Method method,
                         std::vector<EpsilonAuditEntry>* audit) {
    budget.validate();
    const double eps = budget.per_use();
    if (!(s1_x > 0.0) || !(s1_z > 0.0)) {
        // No single-photon statistics to sample from.
        push_audit(audit, "phi1_sampling_gamma", "sampling-" + method_name(method), eps,
                   0.5);
        return 0.5;
    }
    const double ratio = t1_x / s1_x;
    if (ratio >= 0.5) {
        push_audit(audit, "phi1_sampling_gamma", "sampling-" + method_name(method), eps,
                   0.5);
        return 0.5;
    }
    const Deviation gamma = sampling_gamma({s1_z, s1_x, ratio, eps}, method);
    const double phi = std::fmin(0.5, ratio + gamma.width);
    push_audit(audit, "phi1_sampling_gamma", "sampling-" + method_name(method), eps,
               gamma.width);
    return phi;
}

KeyRateReport key_length(const ObservedCounts& counts, const ProtocolParams& params,
                         const SecurityBudget& budget, Method method,
                         const PipelineOptions& opts) {
    params.validate();
    budget.validate();
    counts.validate();

    PipelineOptions effective = opts;
    if (effective.curty_full && effective.curty_trials <= 0.0) {
        effective.curty_trials = params.pulse_count;
    }

    KeyRateReport report;
    report.method = method;
    report.expected = expected_bounds(counts, budget, method, effective, &report.audit);
    report.starred = vacuum_single_bounds(report.expected, params);
    report.observed =
        observed_from_expected(report.starred, budget, method, &report.audit);
    report.phi1_upper =
        phase_error_upper(report.observed.s1_z, report.observed.s1_x,
                          report.observed.t1_x, budget, method, &report.audit);

    report.lambda_ec =
        counts.n_z_sifted() * params.zeta * binary_entropy(counts.bit_error_rate_z());

    const double ell = report.observed.s0_z +
                       report.observed.s1_z * (1.0 - binary_entropy(report.phi1_upper)) -
                       report.lambda_ec - std::log2(2.0 / budget.eps_cor) -
                       6.0 * std::log2(23.0 / budget.eps_sec);
    report.ell = std::fmax(0.0, ell);
    report.key_rate = params.pulse_count > 0.0 ? report.ell / params.pulse_count : 0.0;
    report.aborted = report.phi1_upper > params.phi_tol;
    return report;
}

}  // namespace finitekey
