#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "finitekey/numerics.hpp"

using namespace finitekey;

namespace {

// Independent erfc via the series for small a and the Lentz continued
// fraction for large a; only used to cross-check erfc_inv.
double erfc_reference(double a) {
    if (a < 0.0) return 2.0 - erfc_reference(-a);
    if (a < 2.0) {
        // erf(a) = 2/sqrt(pi) * sum_k (-1)^k a^(2k+1) / (k! (2k+1))
        double term = a, sum = a;
        for (int k = 1; k < 200; ++k) {
            term *= -a * a / k;
            sum += term / (2 * k + 1);
            if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
        }
        return 1.0 - 2.0 / std::sqrt(M_PI) * sum;
    }
    // erfc(a) = exp(-a^2)/sqrt(pi) * 1/(a + 1/2/(a + 2/2/(a + 3/2/(a + ...))))
    double cf = 0.0;
    for (int k = 120; k >= 1; --k) cf = 0.5 * k / (a + cf);
    return std::exp(-a * a) / std::sqrt(M_PI) / (a + cf);
}

}  // namespace

TEST_CASE("binary_entropy values and edges") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    // high-precision reference for h(0.11)
    CHECK(binary_entropy(0.11) == doctest::Approx(0.499915958164528).epsilon(1e-12));
    CHECK_THROWS_AS(binary_entropy(-0.1), std::domain_error);
    CHECK_THROWS_AS(binary_entropy(1.1), std::domain_error);
}

TEST_CASE("binary_entropy symmetry") {
    for (double x = 0.0; x <= 0.5; x += 0.01) {
        CHECK(binary_entropy(x) == doctest::Approx(binary_entropy(1.0 - x)).epsilon(1e-13));
    }
}

TEST_CASE("ln_binomial small integers and edges") {
    CHECK(ln_binomial(5, 2) == doctest::Approx(std::log(10.0)).epsilon(1e-14));
    CHECK(ln_binomial(7, 0) == 0.0);
    CHECK(ln_binomial(7, 7) == 0.0);
    // exact big-integer value: ln C(100,50)
    CHECK(ln_binomial(100, 50) == doctest::Approx(66.7838416517).epsilon(1e-10));
    CHECK_THROWS_AS(ln_binomial(5, -1), std::domain_error);
    CHECK_THROWS_AS(ln_binomial(5, 6), std::domain_error);
}

TEST_CASE("ln_binomial matches exact integer binomials up to n = 500") {
    // long double Pascal row accumulation as the independent route
    for (int n : {10, 57, 123, 500}) {
        long double c = 1.0L;
        for (int j = 1; j <= n / 2; ++j) {
            c = c * (n - j + 1) / j;
            const double expect = static_cast<double>(std::log(c));
            CHECK(ln_binomial(n, j) == doctest::Approx(expect).epsilon(1e-10));
        }
    }
}

TEST_CASE("erfc_inv known points") {
    CHECK(erfc_inv(1.0) == 0.0);
    CHECK(erfc_inv(0.5) == doctest::Approx(0.476936276204470).epsilon(1e-12));
    // bisection on the reference erfc puts the root of erfc(a) = 2e-10 here
    CHECK(erfc_inv(2e-10) == doctest::Approx(4.49814728953).epsilon(1e-10));
    CHECK_THROWS_AS(erfc_inv(0.0), std::domain_error);
    CHECK_THROWS_AS(erfc_inv(2.0), std::domain_error);
    CHECK_THROWS_AS(erfc_inv(-1.0), std::domain_error);
}

TEST_CASE("erfc(erfc_inv(y)) = y over the full range") {
    for (double ly = -15.0; ly <= 0.27; ly += 0.25) {
        const double y = std::pow(10.0, ly);  // up to ~1.86
        if (y >= 2.0) continue;
        const double a = erfc_inv(y);
        CHECK(std::erfc(a) == doctest::Approx(y).epsilon(1e-10));
        CHECK(erfc_reference(a) == doctest::Approx(y).epsilon(1e-9));
    }
}

TEST_CASE("find_root basics") {
    RootConfig cfg;
    auto linear = [](double x) { return x - 1.0; };
    CHECK(find_root(linear, make_bracket(linear, 0.0, 2.0), cfg) ==
          doctest::Approx(1.0).epsilon(1e-12));

    auto quad = [](double x) { return x * x - 2.0; };
    CHECK(find_root(quad, make_bracket(quad, 1.0, 2.0), cfg) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("find_root stays inside the bracket") {
    auto f = [](double x) { return std::tanh(8.0 * (x - 0.3)); };
    const Bracket br = make_bracket(f, -1.0, 4.0);
    const double root = find_root(f, br);
    CHECK(root >= br.lo);
    CHECK(root <= br.hi);
    CHECK(root == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("find_root rejects sign-preserving brackets") {
    auto f = [](double x) { return x * x + 1.0; };
    CHECK_THROWS_AS(make_bracket(f, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(find_root(f, Bracket{-1.0, 1.0, 2.0, 2.0}, RootConfig{}),
                    std::invalid_argument);
}

TEST_CASE("expand_bracket doubles out to a sign change") {
    auto f = [](double x) { return 100.0 - x; };
    const Bracket br = expand_bracket(f, 0.0, 1.0);
    CHECK(br.hi >= 100.0);
    CHECK(find_root(f, br) == doctest::Approx(100.0).epsilon(1e-12));

    auto never = [](double) { return 1.0; };
    CHECK_THROWS_AS(expand_bracket(never, 0.0, 1.0), std::runtime_error);
}
