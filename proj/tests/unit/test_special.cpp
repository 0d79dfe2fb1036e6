#include <doctest.h>

#include <cmath>

#include "pitof/quadrature.hpp"
#include "pitof/special.hpp"

using namespace pitof;

TEST_CASE("E1 spot values") {
    CHECK(exp_integral_e1(1.0) == doctest::Approx(0.2193839344).epsilon(1e-9));
    CHECK(exp_integral_e1(0.5) == doctest::Approx(0.5597735948).epsilon(1e-9));
    CHECK(exp_integral_e1(2.0) == doctest::Approx(0.0489005107).epsilon(1e-8));
}

TEST_CASE("E1 matches its defining integral") {
    // independent oracle: adaptive quadrature of exp(-t)/t with a tail cut
    for (double x = 0.01; x <= 30.0; x *= 1.9) {
        const double oracle = integrate_adaptive(
            [](double t) { return std::exp(-t) / t; }, x, x + 45.0, 1e-13, 1e-320);
        CHECK(exp_integral_e1(x) == doctest::Approx(oracle).epsilon(1e-10));
    }
}

TEST_CASE("E1 domain errors") {
    CHECK_THROWS_AS(exp_integral_e1(0.0), std::domain_error);
    CHECK_THROWS_AS(exp_integral_e1(-1.0), std::domain_error);
}

TEST_CASE("scaled variants agree with the plain ones and survive large x") {
    for (double x : {0.05, 0.7, 1.0, 2.5, 20.0}) {
        CHECK(exp_integral_e1_scaled(x) ==
              doctest::Approx(std::exp(x) * exp_integral_e1(x)).epsilon(1e-12));
        CHECK(exp_integral_e2_scaled(x) ==
              doctest::Approx(std::exp(x) * (std::exp(-x) - x * exp_integral_e1(x)))
                  .epsilon(1e-9));
    }
    // No underflow in scaled space; asymptotically E1s ~ 1/x, E2s ~ 1/x.
    const double e1s = exp_integral_e1_scaled(5000.0);
    CHECK(e1s > 0.0);
    CHECK(e1s == doctest::Approx(1.0 / 5000.0).epsilon(1e-3));
    CHECK(exp_integral_e2_scaled(5000.0) == doctest::Approx(1.0 / 5000.0).epsilon(1e-3));
}

TEST_CASE("scaled E1 difference matches direct subtraction away from cancellation") {
    for (double a : {0.2, 1.5, 6.0}) {
        for (double dx : {0.5, 2.0, 10.0}) {
            const double direct = exp_integral_e1(a) - exp_integral_e1(a + dx);
            CHECK(e1_diff_scaled(a, dx) ==
                  doctest::Approx(std::exp(a) * direct).epsilon(1e-11));
        }
    }
}

TEST_CASE("scaled E1 difference is stable for tiny dx") {
    // reference: int_0^dx exp(-u)/(a+u) du ~ dx/a for dx -> 0
    const double a = 0.8;
    for (double dx : {1e-6, 1e-9, 1e-12}) {
        const double v = e1_diff_scaled(a, dx);
        CHECK(v == doctest::Approx(dx / a).epsilon(1e-5));
    }
    CHECK(e1_diff_scaled(a, 0.0) == 0.0);
}
