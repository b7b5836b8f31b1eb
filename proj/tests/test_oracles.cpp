#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "finitekey/oracles.hpp"
#include "finitekey/tail_bounds.hpp"

using namespace finitekey;

TEST_CASE("hypergeometric pmf sums to one") {
    for (int M : {0, 7, 50, 100}) {
        const HypergeomInstance inst{100, M, 30};
        double total = 0.0;
        for (int j = 0; j <= 30; ++j) {
            const double lp = log_hypergeom_pmf(inst, j);
            if (std::isfinite(lp)) total += std::exp(lp);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("binomial pmf sums to one") {
    for (double p : {0.0, 0.001, 0.37, 1.0}) {
        const BinomialInstance inst{500, p};
        double total = 0.0;
        for (int j = 0; j <= 500; ++j) {
            const double lp = log_binomial_pmf(inst, j);
            if (std::isfinite(lp)) total += std::exp(lp);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("binomial_tail edge thresholds") {
    const BinomialInstance inst{10, 0.5};
    CHECK(binomial_tail(inst, 0.0, TailDirection::ge) == doctest::Approx(1.0));
    CHECK(binomial_tail(inst, 11.0, TailDirection::ge) == 0.0);
    CHECK(binomial_tail(inst, 10.0, TailDirection::le) == doctest::Approx(1.0));
    CHECK(binomial_tail(inst, -1.0, TailDirection::le) == 0.0);
    // complementary halves plus the shared atom
    const double ge6 = binomial_tail(inst, 6.0, TailDirection::ge);
    const double le5 = binomial_tail(inst, 5.0, TailDirection::le);
    CHECK(ge6 + le5 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("binomial_tail agrees with a direct small-case sum") {
    // N = 4, p = 0.3: P[X >= 3] = 4 p^3 (1-p) + p^4
    const BinomialInstance inst{4, 0.3};
    const double expect = 4 * 0.027 * 0.7 + 0.0081;
    CHECK(binomial_tail(inst, 3.0, TailDirection::ge) ==
          doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("chernoff upper bound passes the exact binomial tail at 1e-10") {
    const double x_star = 1e4 * 0.01;
    const double upper = chernoff_upper_observed(x_star, 1e-10, BoundMode::analytic);
    const double tail = binomial_tail({10000, 0.01}, upper, TailDirection::ge);
    CHECK(tail <= 1e-10);
    CHECK(tail > 0.0);
}

TEST_CASE("size guards") {
    CHECK_THROWS_AS(hypergeom_failure_prob(1500, 1500, {}, 1e-3), std::domain_error);
    CHECK_THROWS_AS(binomial_tail({200000, 0.5}, 3.0, TailDirection::ge),
                    std::domain_error);
    CHECK_THROWS_AS(log_hypergeom_pmf({100, 101, 30}, 2), std::domain_error);
    CHECK_THROWS_AS(log_binomial_pmf({100, 1.5}, 2), std::domain_error);
}

TEST_CASE("hypergeom_failure_prob with infinite slack is zero") {
    const auto one = [](double, double, double, double) { return 1.0; };
    CHECK(hypergeom_failure_prob(50, 50, one, 1e-3) == 0.0);
}

TEST_CASE("hypergeom_failure_prob with zero slack is at least one half") {
    const auto zero = [](double, double, double, double) { return 0.0; };
    CHECK(hypergeom_failure_prob(50, 50, zero, 1e-3) >= 0.5);
}

TEST_CASE("no single failing outcome pattern carries more than epsilon") {
    // The per-pattern guarantee behind the root equation: every (j, M) cell
    // the claim excludes has pmf at most epsilon. (The summed tail across a
    // composition can exceed epsilon; the acceptance suite measures that.)
    const int n = 100, k = 100;
    const double eps = 1e-3;
    auto gamma = [&](double lam) {
        return sampling_gamma({double(n), double(k), lam, eps}, Method::ours_numeric)
            .width;
    };
    double worst_cell = 0.0;
    for (int M = 0; M <= n + k; ++M) {
        const HypergeomInstance inst{n + k, M, k};
        for (int j = std::max(0, k - (n + k - M)); j <= std::min(k, M); ++j) {
            const double lam = double(j) / k;
            const double chi = double(M - j) / n;
            if (chi > lam + gamma(lam) + 1e-15) {
                worst_cell = std::fmax(worst_cell, std::exp(log_hypergeom_pmf(inst, j)));
            }
        }
    }
    CHECK(worst_cell <= eps * (1 + 1e-9));
    CHECK(worst_cell > 0.0);
}

TEST_CASE("coverage_failure trivial intervals") {
    const BinomialInstance inst{200, 0.3};
    const auto everything = [](double) { return std::pair<double, double>(0.0, 200.0); };
    const CoverageMiss none = coverage_failure(inst, everything);
    CHECK(none.below == 0.0);
    CHECK(none.above == 0.0);

    const auto point = [](double x) { return std::pair<double, double>(x, x); };
    const CoverageMiss all = coverage_failure(inst, point);
    CHECK(all.below + all.above == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("variant analytic interval covers at the advertised rate") {
    const double eps = 1e-6;
    const BinomialInstance inst{10000, 0.02};
    const auto interval = [&](double x) {
        return std::pair<double, double>(
            variant_lower_expected(x, eps, BoundMode::analytic),
            variant_upper_expected(x, eps, BoundMode::analytic));
    };
    const CoverageMiss miss = coverage_failure(inst, interval);
    CHECK(miss.below <= eps);
    CHECK(miss.above <= eps);
}

TEST_CASE("oracle results are deterministic") {
    const auto gamma = [](double n, double k, double lam, double eps) {
        return sampling_gamma({n, k, lam, eps}, Method::ours_analytic).width;
    };
    const double a = hypergeom_failure_prob(40, 60, gamma, 1e-2);
    const double b = hypergeom_failure_prob(40, 60, gamma, 1e-2);
    CHECK(a == b);
}
