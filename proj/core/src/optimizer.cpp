#include "finitekey/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace finitekey {

namespace {

constexpr int kDims = 6;
using Point = std::array<double, kDims>;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

double logit(double s) {
    s = std::clamp(s, 1e-12, 1.0 - 1e-12);
    return std::log(s / (1.0 - s));
}

// Unconstrained coordinates -> feasible protocol parameters. The nested
// ranges (nu below mu, p_nu inside the remaining probability mass) make every
// image point feasible by construction.
ProtocolParams decode(const Point& u, const OptimizationSpace& sp,
                      const ProtocolParams& base) {
    ProtocolParams p = base;
    p.mu = sp.mu_lo + (sp.mu_hi - sp.mu_lo) * logistic(u[0]);
    p.nu = sp.nu_lo + (p.mu - sp.nu_gap - sp.nu_lo) * logistic(u[1]);
    p.p_mu = sp.prob_lo + (sp.prob_hi - 2.0 * sp.prob_lo) * logistic(u[2]);
    p.p_nu = sp.prob_lo + (sp.prob_hi - p.p_mu - sp.prob_lo) * logistic(u[3]);
    p.p_z = sp.prob_lo + (sp.prob_hi - sp.prob_lo) * logistic(u[4]);
    p.q_z = sp.prob_lo + (sp.prob_hi - sp.prob_lo) * logistic(u[5]);
    return p;
}

// Best-effort inverse of decode, for warm starts.
Point encode(const ProtocolParams& p, const OptimizationSpace& sp) {
    Point u;
    u[0] = logit((p.mu - sp.mu_lo) / (sp.mu_hi - sp.mu_lo));
    u[1] = logit((p.nu - sp.nu_lo) / std::fmax(p.mu - sp.nu_gap - sp.nu_lo, 1e-9));
    u[2] = logit((p.p_mu - sp.prob_lo) / (sp.prob_hi - 2.0 * sp.prob_lo));
    u[3] = logit((p.p_nu - sp.prob_lo) /
                 std::fmax(sp.prob_hi - p.p_mu - sp.prob_lo, 1e-9));
    u[4] = logit((p.p_z - sp.prob_lo) / (sp.prob_hi - sp.prob_lo));
    u[5] = logit((p.q_z - sp.prob_lo) / (sp.prob_hi - sp.prob_lo));
    return u;
}

struct Objective {
    const ChannelModel& model;
    const SecurityBudget& budget;
    Method method;
    const OptimizationSpace& space;
    const ProtocolParams& base;
    const PipelineOptions& opts;
    mutable long evals = 0;

    // Negative key rate; Nelder-Mead minimizes.
    double operator()(const Point& u) const {
        ++evals;
        const ProtocolParams p = decode(u, space, base);
        const ObservedCounts counts = simulate_counts(model, p);
        return -key_length(counts, p, budget, method, opts).key_rate;
    }
};

// Standard Nelder-Mead on R^6 with an evaluation budget.
Point nelder_mead(const Objective& f, const Point& start, int max_evals,
                  double rel_tol, double& best_value) {
    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
    const int n = kDims;

    std::vector<Point> x(n + 1, start);
    std::vector<double> fx(n + 1);
    for (int i = 0; i < n; ++i) x[i + 1][i] += 0.5;
    long evals_start = f.evals;
    for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

    auto order = [&] {
        std::vector<int> idx(n + 1);
        for (int i = 0; i <= n; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return fx[a] < fx[b]; });
        std::vector<Point> x2(n + 1);
        std::vector<double> f2(n + 1);
        for (int i = 0; i <= n; ++i) { x2[i] = x[idx[i]]; f2[i] = fx[idx[i]]; }
        x.swap(x2);
        fx.swap(f2);
    };

    while (f.evals - evals_start < max_evals) {
        order();
        if (std::fabs(fx[n] - fx[0]) <=
            rel_tol * (std::fabs(fx[0]) + rel_tol)) {
            break;
        }
        Point centroid{};
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < kDims; ++d) centroid[d] += x[i][d] / n;
        }
        auto along = [&](double t) {
            Point p;
            for (int d = 0; d < kDims; ++d) p[d] = centroid[d] + t * (centroid[d] - x[n][d]);
            return p;
        };
        const Point xr = along(kReflect);
        const double fr = f(xr);
        if (fr < fx[0]) {
            const Point xe = along(kExpand);
            const double fe = f(xe);
            if (fe < fr) { x[n] = xe; fx[n] = fe; }
            else { x[n] = xr; fx[n] = fr; }
        } else if (fr < fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
        } else {
            const bool outside = fr < fx[n];
            const Point xc = along(outside ? kContract : -kContract);
            const double fc = f(xc);
            if (fc < (outside ? fr : fx[n])) {
                x[n] = xc;
                fx[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int d = 0; d < kDims; ++d) {
                        x[i][d] = x[0][d] + kShrink * (x[i][d] - x[0][d]);
                    }
                    fx[i] = f(x[i]);
                }
            }
        }
    }
    order();
    best_value = fx[0];
    return x[0];
}

}  // namespace

OptimizationResult optimize_keyrate(const ChannelModel& model,
                                    const SecurityBudget& budget, Method method,
                                    const OptimizationSpace& space,
                                    const OptimizerConfig& cfg,
                                    const ProtocolParams& base,
                                    const PipelineOptions& opts,
                                    const std::optional<ProtocolParams>& warm_start) {
    model.validate();
    budget.validate();
    const Objective objective{model, budget, method, space, base, opts};

    // Coarse grid seed: 4 points per dimension in transform coordinates.
    // The outer levels sit near the box faces (logistic(3.5) ~ 0.97) so that
    // edge optima, e.g. strongly biased basis choices, seed a start.
    const std::array<double, 4> grid = {-3.5, -1.2, 1.2, 3.5};
    std::vector<std::pair<double, Point>> seeds;
    Point u{};
    for (double a : grid) { u[0] = a;
    for (double b : grid) { u[1] = b;
    for (double c : grid) { u[2] = c;
    for (double d : grid) { u[3] = d;
    for (double e : grid) { u[4] = e;
    for (double g : grid) { u[5] = g;
        seeds.emplace_back(objective(u), u);
    }}}}}}
    std::stable_sort(seeds.begin(), seeds.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    double best_f = seeds.front().first;
    Point best_u = seeds.front().second;

    std::vector<Point> starts;
    if (warm_start) starts.push_back(encode(*warm_start, space));
    for (int i = 0; i < cfg.starts && i < static_cast<int>(seeds.size()); ++i) {
        starts.push_back(seeds[i].second);
    }
    // Jittered restarts around the best seed keep the multimodal (mu, nu)
    // landscape from trapping every start in one basin.
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> jitter(0.0, 1.0);
    for (int i = 0; i < cfg.starts / 2; ++i) {
        Point p = seeds.front().second;
        for (double& v : p) v += jitter(rng);
        starts.push_back(p);
    }

    for (const Point& s : starts) {
        double value = 0.0;
        Point x = nelder_mead(objective, s, cfg.max_evals, cfg.rel_tol, value);
        // One restart with a fresh simplex; Nelder-Mead simplexes often
        // degenerate near curved valleys and a restart recovers cheaply.
        x = nelder_mead(objective, x, cfg.max_evals, cfg.rel_tol, value);
        if (value < best_f) {
            best_f = value;
            best_u = x;
        }
    }

    OptimizationResult result;
    result.params = decode(best_u, space, base);
    result.report = key_length(simulate_counts(model, result.params), result.params,
                               budget, method, opts);
    result.key_rate = result.report.key_rate;
    return result;
}

}  // namespace finitekey
