#include "finitekey/channel_sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace finitekey {

void ChannelModel::validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(eta_d)) throw std::domain_error("eta_d: must be in [0,1]");
    if (!in_unit(Y0)) throw std::domain_error("Y0: must be in [0,1]");
    if (!in_unit(e_d)) throw std::domain_error("e_d: must be in [0,1]");
    if (!in_unit(e0)) throw std::domain_error("e0: must be in [0,1]");
    if (!(alpha > 0.0)) throw std::domain_error("alpha: must be positive");
    if (!(L >= 0.0)) throw std::domain_error("L: must be nonnegative");
}

double ChannelModel::overall_efficiency() const {
    return eta_d * std::pow(10.0, -alpha * L / 10.0);
}

GainAndError gains_and_errors(const ChannelModel& model, double intensity) {
    model.validate();
    if (!(intensity >= 0.0)) throw std::domain_error("intensity: must be nonnegative");
    const double eta = model.overall_efficiency();
    const double gain = 1.0 - (1.0 - model.Y0) * std::exp(-intensity * eta);
    const double error_gain = model.e_d * gain + (model.e0 - model.e_d) * model.Y0;
    return {gain, error_gain};
}

ObservedCounts simulate_counts(const ChannelModel& model, const ProtocolParams& params) {
    params.validate();
    const double N = params.pulse_count;
    const GainAndError mu = gains_and_errors(model, params.mu);
    const GainAndError nu = gains_and_errors(model, params.nu);
    const GainAndError vac = gains_and_errors(model, 0.0);

    ObservedCounts c;
    auto fill = [&](Intensity i, const GainAndError& g, double p_int, double basis_z,
                    double basis_x) {
        c.n(i, Basis::z) = N * p_int * basis_z * params.q_z * g.gain;
        c.n(i, Basis::x) = N * p_int * basis_x * params.q_x() * g.gain;
        c.m(i, Basis::z) = N * p_int * basis_z * params.q_z * g.error_gain;
        c.m(i, Basis::x) = N * p_int * basis_x * params.q_x() * g.error_gain;
    };
    fill(Intensity::signal, mu, params.p_mu, params.p_z, params.p_x());
    fill(Intensity::decoy, nu, params.p_nu, params.p_z, params.p_x());
    // Vacuum pulses carry no sender basis; only the receiver basis factors in.
    fill(Intensity::vacuum, vac, params.p_vac(), 1.0, 1.0);
    return c;
}

ObservedCounts simulate_counts_stochastic(const ChannelModel& model,
                                          const ProtocolParams& params, uint64_t seed) {
    const ObservedCounts mean = simulate_counts(model, params);
    std::mt19937_64 rng(seed);

    ObservedCounts c;
    for (auto i : {Intensity::signal, Intensity::decoy, Intensity::vacuum}) {
        const GainAndError g = gains_and_errors(
            model, i == Intensity::signal ? params.mu
                                          : (i == Intensity::decoy ? params.nu : 0.0));
        const double err_frac = g.gain > 0.0 ? g.error_gain / g.gain : 0.0;
        for (auto b : {Basis::z, Basis::x}) {
            const double expected = mean.n(i, b);
            long long detected = 0;
            if (expected > 0.0) {
                std::poisson_distribution<long long> det(expected);
                detected = det(rng);
            }
            long long errors = 0;
            if (detected > 0 && err_frac > 0.0) {
                std::binomial_distribution<long long> err(detected, err_frac);
                errors = err(rng);
            }
            c.n(i, b) = static_cast<double>(detected);
            c.m(i, b) = static_cast<double>(errors);
        }
    }
    return c;
}

}  // namespace finitekey
