#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "frond/special.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace frond;

namespace {

// Independent extended-precision series oracle; relies on libm's lgammal
// instead of the library's gamma path.
long double mlf_series_ld(long double z, long double beta, long double alpha = 1.0L) {
    long double sum = 0.0L;
    const long double log_abs_z = z == 0.0L ? 0.0L : std::log(std::fabs(z));
    for (int j = 0; j < 2000; ++j) {
        long double term = j == 0 ? 1.0L / std::exp(lgammal(alpha))
                                  : std::exp(j * log_abs_z - lgammal(j * beta + alpha));
        if (z < 0.0L && (j & 1)) {
            term = -term;
        }
        sum += term;
        if (j > 5 && std::fabs(term) < 1e-25L * std::fabs(sum)) {
            break;
        }
    }
    return sum;
}

}  // namespace

TEST_CASE("gamma matches closed forms") {
    REQUIRE_THAT(gamma_fn(1.0), WithinRel(1.0, 1e-14));
    REQUIRE_THAT(gamma_fn(0.5), WithinRel(1.7724538509055160273, 1e-14));
    REQUIRE_THAT(gamma_fn(5.0), WithinRel(24.0, 1e-14));
    REQUIRE_THAT(gamma_fn(2.0), WithinRel(1.0, 1e-14));
    // Reflection branch: Gamma(-0.5) = -2 sqrt(pi).
    REQUIRE_THAT(gamma_fn(-0.5), WithinRel(-3.5449077018110320546, 1e-13));
}

TEST_CASE("gamma stays within 1e-13 of an independent implementation on [0.01, 170]") {
    for (int i = 0; i <= 2000; ++i) {
        const double x = 0.01 + (170.0 - 0.01) * i / 2000.0;
        const double mine = gamma_fn(x);
        const double ref = std::tgamma(x);
        REQUIRE_THAT(mine, WithinRel(ref, 1e-13));
    }
}

TEST_CASE("gamma satisfies the recurrence on [0.5, 20]") {
    for (int i = 0; i <= 500; ++i) {
        const double x = 0.5 + (20.0 - 0.5) * i / 500.0;
        REQUIRE_THAT(gamma_fn(x + 1.0), WithinRel(x * gamma_fn(x), 1e-12));
    }
}

TEST_CASE("gamma error paths") {
    REQUIRE_THROWS_AS(gamma_fn(0.0), numeric_error);
    REQUIRE_THROWS_AS(gamma_fn(-3.0), numeric_error);
    REQUIRE_THROWS_AS(gamma_fn(172.0), numeric_error);
    REQUIRE_THROWS_AS(gamma_fn(std::nan("")), numeric_error);
}

TEST_CASE("log_gamma is consistent with gamma") {
    for (double x : {0.3, 0.7, 1.0, 2.5, 10.0, 50.0, 120.0}) {
        REQUIRE_THAT(log_gamma(x), WithinAbs(std::lgamma(x), 1e-12 * std::max(1.0, std::fabs(std::lgamma(x)))));
    }
    // Large arguments that gamma itself cannot represent.
    REQUIRE_THAT(log_gamma(500.0), WithinRel(std::lgamma(500.0), 1e-13));
}

TEST_CASE("mlf at zero is exactly one") {
    for (double beta : {0.1, 0.37, 0.5, 0.9, 1.0, 2.0}) {
        REQUIRE(mlf(0.0, beta) == 1.0);
    }
}

TEST_CASE("mlf reduces to exp at beta = 1") {
    for (int i = 0; i <= 50; ++i) {
        const double z = -2.0 + 7.0 * i / 50.0;
        REQUIRE_THAT(mlf(z, 1.0), WithinRel(std::exp(z), 1e-10));
    }
}

TEST_CASE("mlf at beta = 1/2 matches the erfc identity") {
    // E_{1/2}(z) = exp(z^2) erfc(-z); std::erfc is the independent route.
    const double oracle = std::exp(1.0) * std::erfc(-1.0);
    REQUIRE_THAT(oracle, WithinRel(5.0089800807622835, 1e-13));
    REQUIRE_THAT(mlf(1.0, 0.5), WithinRel(oracle, 1e-12));
    // Cross-check against direct summation in extended precision.
    REQUIRE_THAT(mlf(1.0, 0.5),
                 WithinRel(static_cast<double>(mlf_series_ld(1.0L, 0.5L)), 1e-13));
}

TEST_CASE("mlf agrees with the extended-precision series across the range") {
    const double beta = GENERATE(0.2, 0.4, 0.6, 0.8, 1.0);
    for (double z : {-2.0, -1.0, -0.25, 0.5, 1.5, 3.0}) {
        if (z < mlf_safe_zmin(beta) || z > mlf_safe_zmax(beta)) {
            continue;
        }
        const double ref = static_cast<double>(mlf_series_ld(z, beta));
        REQUIRE_THAT(mlf(z, beta), WithinRel(ref, 1e-11));
    }
}

TEST_CASE("mlf is strictly increasing in z for z >= 0") {
    const double beta = GENERATE(0.3, 0.5, 0.8, 1.0);
    double prev = mlf(0.0, beta);
    for (int i = 1; i <= 40; ++i) {
        const double z = 0.05 * i;
        const double cur = mlf(z, beta);
        REQUIRE(cur > prev);
        prev = cur;
    }
}

TEST_CASE("mlf two-parameter form") {
    // E_{1,2}(z) = (exp(z) - 1) / z.
    for (double z : {0.5, 1.0, 2.0}) {
        REQUIRE_THAT(mlf(z, 1.0, 2.0), WithinRel((std::exp(z) - 1.0) / z, 1e-11));
    }
    REQUIRE_THAT(mlf(0.0, 0.7, 2.0), WithinRel(1.0 / gamma_fn(2.0), 1e-14));
}

TEST_CASE("mlf reduces to hyperbolic and trigonometric closed forms") {
    // E_2(z^2) = cosh(z) and E_4(z^4) = (cos(z) + cosh(z)) / 2.
    for (double z : {0.25, 0.5, 1.0, 2.0, 3.0}) {
        REQUIRE_THAT(mlf(z * z, 2.0), WithinRel(std::cosh(z), 1e-12));
        REQUIRE_THAT(mlf(z * z * z * z, 4.0),
                     WithinRel(0.5 * (std::cos(z) + std::cosh(z)), 1e-12));
    }
    // Negative argument at order two: E_2(-z^2) = cos(z).
    for (double z : {0.5, 1.0, 2.0}) {
        REQUIRE_THAT(mlf(-z * z, 2.0), WithinRel(std::cos(z), 1e-11));
    }
}

TEST_CASE("mlf converges within the budget across the safe range boundary") {
    // Property: the documented range really is series-safe with the default
    // 400-term budget.
    const double beta = GENERATE(0.1, 0.25, 0.5, 0.75, 1.0);
    const double zmax = mlf_safe_zmax(beta);
    for (double frac : {0.5, 0.9, 1.0}) {
        REQUIRE(std::isfinite(mlf(frac * zmax, beta)));
    }
    REQUIRE(std::isfinite(mlf(mlf_safe_zmin(beta), beta)));
}

TEST_CASE("mlf rejects out-of-range and bad arguments") {
    REQUIRE_THROWS_AS(mlf(mlf_safe_zmax(0.5) * 1.01, 0.5), numeric_error);
    REQUIRE_THROWS_AS(mlf(-6.5, 1.0), numeric_error);
    REQUIRE_THROWS_AS(mlf(std::nan(""), 0.5), numeric_error);
    MlfParams bad;
    bad.beta = -1.0;
    REQUIRE_THROWS_AS(mlf(1.0, bad), config_error);
    bad.beta = 0.5;
    bad.tol = 0.0;
    REQUIRE_THROWS_AS(mlf(1.0, bad), config_error);
    bad.tol = 1e-12;
    bad.max_terms = 0;
    REQUIRE_THROWS_AS(mlf(1.0, bad), config_error);
}

TEST_CASE("mlf reports non-convergence when the term budget is too small") {
    MlfParams tight;
    tight.beta = 1.0;
    tight.max_terms = 3;
    REQUIRE_THROWS_AS(mlf(5.0, tight), numeric_error);
}

TEST_CASE("mlf_bound reduces to exp at beta = 1") {
    REQUIRE_THAT(mlf_bound(1.0, 0.5, 2.0), WithinRel(std::exp(1.0), 1e-12));
    REQUIRE_THAT(mlf_bound(1.0, 1.0, 4.0), WithinRel(std::exp(4.0), 1e-12));
}

TEST_CASE("mlf_bound matches the erfc oracle at beta = 1/2") {
    REQUIRE_THAT(mlf_bound(0.5, 1.0, 1.0), WithinRel(std::exp(1.0) * std::erfc(-1.0), 1e-12));
}

TEST_CASE("mlf_bound is larger at larger beta in the slow-growth regime") {
    REQUIRE(mlf_bound(0.3, 0.5, 10.0) < mlf_bound(0.9, 0.5, 10.0));
}

TEST_CASE("mlf_bound validates arguments") {
    REQUIRE_THROWS_AS(mlf_bound(0.0, 0.5, 1.0), config_error);
    REQUIRE_THROWS_AS(mlf_bound(1.5, 0.5, 1.0), config_error);
    REQUIRE_THROWS_AS(mlf_bound(0.5, 0.0, 1.0), config_error);
    REQUIRE_THROWS_AS(mlf_bound(0.5, 0.5, -1.0), config_error);
}

TEST_CASE("bound scan is strictly increasing for L < 1 and T = 10") {
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) {
        grid.push_back(0.1 * i);
    }
    for (double L : {0.3, 0.5, 0.7}) {
        const BoundScan scan = bound_monotonicity_scan(L, 10.0, grid);
        REQUIRE(scan.rows.size() == grid.size());
        REQUIRE(scan.strictly_increasing);
    }
}

TEST_CASE("bound scan spot values") {
    const BoundScan scan = bound_monotonicity_scan(0.9, 10.0, {0.5, 1.0});
    REQUIRE(scan.strictly_increasing);
    REQUIRE_THAT(scan.rows[0].bound,
                 WithinRel(static_cast<double>(
                               mlf_series_ld(0.9L * std::sqrt(10.0L), 0.5L)),
                           1e-11));
    REQUIRE_THAT(scan.rows[1].bound, WithinRel(std::exp(9.0), 1e-11));
}

TEST_CASE("bound scan singleton is vacuously increasing") {
    const BoundScan scan = bound_monotonicity_scan(0.5, 10.0, {0.5});
    REQUIRE(scan.rows.size() == 1);
    REQUIRE(scan.strictly_increasing);
}

TEST_CASE("bound scan validates the grid") {
    REQUIRE_THROWS_AS(bound_monotonicity_scan(0.5, 10.0, {}), config_error);
    REQUIRE_THROWS_AS(bound_monotonicity_scan(0.5, 10.0, {0.5, 0.4}), config_error);
    REQUIRE_THROWS_AS(bound_monotonicity_scan(0.5, 10.0, {0.0, 0.5}), config_error);
    REQUIRE_THROWS_AS(bound_monotonicity_scan(0.5, 10.0, {0.5, 1.2}), config_error);
}
