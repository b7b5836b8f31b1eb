#include "finitekey/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "finitekey/numerics.hpp"

namespace finitekey {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sum of exp(terms), accumulated from the smallest term up.
double sum_exp_ascending(std::vector<double>& log_terms) {
    if (log_terms.empty()) return 0.0;
    std::sort(log_terms.begin(), log_terms.end());
    const double top = log_terms.back();
    if (top == kNegInf) return 0.0;
    double acc = 0.0;
    for (double lt : log_terms) acc += std::exp(lt - top);
    return std::exp(top) * acc;
}

}  // namespace

void HypergeomInstance::validate() const {
    if (ones < 0 || ones > population) {
        throw std::domain_error("HypergeomInstance: ones outside [0, population]");
    }
    if (sample <= 0 || sample >= population) {
        throw std::domain_error("HypergeomInstance: sample outside (0, population)");
    }
}

double log_hypergeom_pmf(const HypergeomInstance& inst, int j) {
    inst.validate();
    const int N = inst.population, M = inst.ones, k = inst.sample;
    if (j < std::max(0, k - (N - M)) || j > std::min(k, M)) return kNegInf;
    return ln_binomial(M, j) + ln_binomial(N - M, k - j) - ln_binomial(N, k);
}

double hypergeom_failure_prob(int n, int k, const SamplingBoundFn& gamma_fn,
                              double epsilon) {
    if (n <= 0 || k <= 0) throw std::domain_error("hypergeom_failure_prob: n, k > 0");
    const int population = n + k;
    if (population > 2000) {
        throw std::domain_error("hypergeom_failure_prob: population above 2000");
    }

    // gamma depends on (j, epsilon) only; hoist it out of the M loop.
    std::vector<double> threshold(k + 1);
    for (int j = 0; j <= k; ++j) {
        const double lambda = static_cast<double>(j) / k;
        threshold[j] = lambda + gamma_fn(n, k, lambda, epsilon);
    }

    double worst = 0.0;
    std::vector<double> fails;
    for (int M = 0; M <= population; ++M) {
        fails.clear();
        const HypergeomInstance inst{population, M, k};
        const int j_lo = std::max(0, k - (population - M));
        const int j_hi = std::min(k, M);
        for (int j = j_lo; j <= j_hi; ++j) {
            const double chi = static_cast<double>(M - j) / n;
            if (chi > threshold[j]) fails.push_back(log_hypergeom_pmf(inst, j));
        }
        worst = std::fmax(worst, sum_exp_ascending(fails));
    }
    return worst;
}

void BinomialInstance::validate() const {
    if (trials < 1) throw std::domain_error("BinomialInstance: trials must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("BinomialInstance: p outside [0,1]");
    }
}

double log_binomial_pmf(const BinomialInstance& inst, int j) {
    inst.validate();
    const int N = inst.trials;
    if (j < 0 || j > N) return kNegInf;
    if (inst.p == 0.0) return j == 0 ? 0.0 : kNegInf;
    if (inst.p == 1.0) return j == N ? 0.0 : kNegInf;
    return ln_binomial(N, j) + j * std::log(inst.p) + (N - j) * std::log1p(-inst.p);
}

double binomial_tail(const BinomialInstance& inst, double threshold,
                     TailDirection direction) {
    inst.validate();
    const int N = inst.trials;
    if (N > 100000) throw std::domain_error("binomial_tail: trials above 100000");

    int lo, hi;
    if (direction == TailDirection::ge) {
        lo = std::max(0, static_cast<int>(std::ceil(threshold - 1e-12)));
        hi = N;
        if (lo > N) return 0.0;
    } else {
        lo = 0;
        hi = std::min(N, static_cast<int>(std::floor(threshold + 1e-12)));
        if (hi < 0) return 0.0;
    }
    std::vector<double> logs;
    logs.reserve(hi - lo + 1);
    for (int j = lo; j <= hi; ++j) logs.push_back(log_binomial_pmf(inst, j));
    return std::fmin(1.0, sum_exp_ascending(logs));
}

CoverageMiss coverage_failure(const BinomialInstance& inst, const IntervalFn& interval) {
    inst.validate();
    const int N = inst.trials;
    if (N > 100000) throw std::domain_error("coverage_failure: trials above 100000");
    const double x_star = N * inst.p;

    std::vector<double> below, above;
    for (int j = 0; j <= N; ++j) {
        const double lp = log_binomial_pmf(inst, j);
        if (lp == kNegInf) continue;
        const auto [lo, hi] = interval(static_cast<double>(j));
        if (x_star < lo) below.push_back(lp);
        if (x_star > hi) above.push_back(lp);
    }
    return {sum_exp_ascending(below), sum_exp_ascending(above)};
}

}  // namespace finitekey
