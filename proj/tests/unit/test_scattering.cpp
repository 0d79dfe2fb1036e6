#include <doctest.h>

#include <cmath>
#include <random>

#include "pitof/scattering.hpp"
#include "pitof/special.hpp"

using namespace pitof;

namespace {

// Quadrature oracle for the amplitude-weighted mean phase of a density.
double mean_phase_oracle(Polarization pol, const FogParams& fog) {
    const QuadratureSpec q = QuadratureSpec::for_decay(fog.phi0(), fog.sigma_i());
    auto density = [&](double phi) {
        return pol == Polarization::polarized ? amp_density_polarized(phi, fog)
                                              : amp_density_unpolarized(phi, fog);
    };
    const double num = integrate_adaptive([&](double p) { return p * density(p); }, fog.phi0(),
                                          q.tail_cutoff, 1e-12, 1e-300);
    const double den =
        integrate_adaptive(density, fog.phi0(), q.tail_cutoff, 1e-12, 1e-300);
    return num / den;
}

} // namespace

TEST_CASE("FogParams invariants") {
    const FogParams fog(0.6, 0.4, 0.2);
    CHECK(fog.sigma_total() == doctest::Approx(1.0));
    CHECK(fog.alpha() == doctest::Approx(0.6));
    CHECK_THROWS(FogParams(0.0, 0.4, 0.2));
    CHECK_THROWS(FogParams(0.6, -0.1, 0.2));
    CHECK_THROWS(FogParams(0.6, 0.4, 0.0));
    const FogParams twice = fog.scaled(2.0);
    CHECK(twice.sigma_i() == doctest::Approx(1.2));
    CHECK(twice.alpha() == doctest::Approx(fog.alpha()));
}

TEST_CASE("amplitude densities: spot values and identities") {
    // sigma_i = sigma_p = tiny -> pure inverse square
    const FogParams weak(1e-12, 0.0, 0.5);
    CHECK(amp_density_polarized(1.0, weak) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(amp_density_polarized(2.0, weak) ==
          doctest::Approx(0.25 * amp_density_polarized(1.0, weak)).epsilon(1e-9));

    const FogParams fog(0.5, 0.5, 0.5);
    CHECK(amp_density_polarized(1.0, fog) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(amp_density_unpolarized(1.0, fog) ==
          doctest::Approx(std::exp(-0.5) * (1.0 - std::exp(-0.5))).epsilon(1e-12));

    // fully polarization-preserving medium: no unpolarized backscatter
    const FogParams preserving(0.5, 0.0, 0.5);
    CHECK(amp_density_unpolarized(1.0, preserving) == 0.0);
    CHECK(amp_density_unpolarized(17.3, preserving) == 0.0);

    CHECK_THROWS_AS(amp_density_polarized(0.4, fog), std::domain_error);
    CHECK_THROWS_AS(amp_density_unpolarized(0.4, fog), std::domain_error);

    // additivity and pointwise DoP identity over random draws
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int i = 0; i < 200; ++i) {
        const FogParams f(u(rng), u(rng), 0.05);
        const double phi = 0.05 + u(rng);
        const double pol = amp_density_polarized(phi, f);
        const double unp = amp_density_unpolarized(phi, f);
        const double total = std::exp(-f.sigma_i() * phi) / (phi * phi);
        CHECK(pol + unp == doctest::Approx(total).epsilon(1e-12));
        CHECK(pol / (pol + unp) == doctest::Approx(std::exp(-f.sigma_p() * phi)).epsilon(1e-12));
    }
}

TEST_CASE("polarized mean phase: closed form vs quadrature oracle") {
    CHECK(mean_phase_polarized(1.0, 1.0).value == doctest::Approx(1.477377).epsilon(1e-6));
    CHECK(mean_phase_polarized(1.0, 1.0).value ==
          doctest::Approx(mean_phase_oracle(Polarization::polarized, FogParams(0.5, 0.5, 1.0)))
              .epsilon(1e-9));

    // sigma -> large: the density collapses onto phi0
    const MeanPhase big = mean_phase_polarized(100.0, 1.0);
    CHECK(big.value > 1.0);
    CHECK(big.value < 1.02);

    // strictly decreasing on a log grid
    double prev = mean_phase_polarized(0.1, 0.7).value;
    for (double s = 0.13; s <= 50.0; s *= 1.3) {
        const double v = mean_phase_polarized(s, 0.7).value;
        CHECK(v < prev);
        CHECK(v > 0.7);
        prev = v;
    }

    // saturation flag far out; value still sane
    const MeanPhase sat = mean_phase_polarized(2000.0, 1.0);
    CHECK(sat.saturated);
    CHECK(sat.value > 1.0);
    CHECK(sat.value < 1.001);
}

TEST_CASE("unpolarized mean phase: closed form vs quadrature oracle") {
    const FogParams fog(0.5, 0.5, 1.0);
    CHECK(mean_phase_unpolarized(fog).value ==
          doctest::Approx(mean_phase_oracle(Polarization::unpolarized, fog)).epsilon(1e-6));

    CHECK_THROWS_AS(mean_phase_unpolarized(FogParams(0.5, 0.0, 1.0)), std::domain_error);

    // unpolarized weight favours longer paths
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> s(0.1, 5.0);
    std::uniform_real_distribution<double> p0(0.05, 1.0);
    for (int i = 0; i < 50; ++i) {
        const FogParams f(s(rng), s(rng), p0(rng));
        CHECK(mean_phase_unpolarized(f).value >
              mean_phase_polarized(f.sigma_total(), f.phi0()).value);
    }

    // sigma_p -> 0 limit: mean of the (1/phi) exp(-sigma_i phi) density
    const double si = 0.7, phi0 = 0.4;
    const double limit =
        std::exp(-si * phi0) / (si * exp_integral_e1(si * phi0));
    CHECK(mean_phase_unpolarized(FogParams(si, 1e-4, phi0)).value ==
          doctest::Approx(limit).epsilon(1e-4));

    // strictly decreasing in the intensity fraction at fixed total decay:
    // the alpha root of the calibration inversion is unique
    for (double sigma : {0.4, 2.0, 8.0}) {
        double prev = 1e300;
        for (double a = 0.02; a < 0.999; a += 0.02) {
            const double v =
                mean_phase_unpolarized(FogParams(a * sigma, (1.0 - a) * sigma, 0.3)).value;
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("backscatter phasor integral") {
    const FogParams fog(0.5, 0.5, 1.0);
    const QuadratureSpec quad = QuadratureSpec::for_decay(1.0, 0.5);

    SUBCASE("closed-form mass for the polarized density at sigma=1, phi0=1") {
        // exp(-1) - E1(1), by parts
        const PhasorIntegral z =
            backscatter_phasor_integral(Polarization::polarized, fog, quad);
        CHECK(z.mass == doctest::Approx(0.1484955).epsilon(1e-6));
        CHECK(std::abs(z.vec) <= z.mass);
    }

    SUBCASE("|Z| <= M over random fog draws") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> s(0.05, 8.0);
        std::uniform_real_distribution<double> p0(0.05, 1.5);
        for (int i = 0; i < 200; ++i) {
            const FogParams f(s(rng), s(rng), p0(rng));
            const QuadratureSpec q = QuadratureSpec::for_decay(f.phi0(), f.sigma_i());
            for (Polarization pol : {Polarization::polarized, Polarization::unpolarized}) {
                const PhasorIntegral z = backscatter_phasor_integral(pol, f, q);
                CHECK(std::abs(z.vec) <= z.mass * (1.0 + 1e-12));
            }
        }
    }

    SUBCASE("narrow density: arg(Z) approaches the closed-form mean") {
        const FogParams narrow(2.0, 2.0, 1.0); // sigma*phi0 = 4
        const QuadratureSpec q = QuadratureSpec::for_decay(1.0, 2.0);
        const PhasorIntegral z = backscatter_phasor_integral(Polarization::polarized, narrow, q);
        CHECK(std::arg(z.vec) ==
              doctest::Approx(mean_phase_polarized(4.0, 1.0).value).epsilon(0.02));
    }
}

TEST_CASE("k ratio of the integrated unpolarized backscatter") {
    const QuadratureSpec quad = QuadratureSpec::for_decay(1.0, 0.5);

    // frozen oracle value (adaptive quadrature of |Z|/M at these parameters)
    CHECK(k_ratio_unpolarized(FogParams(0.5, 0.5, 1.0), 0.71, quad) ==
          doctest::Approx(0.519677663985).epsilon(1e-6));

    // always below k0 for spread densities
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> s(0.05, 5.0);
    for (int i = 0; i < 50; ++i) {
        const FogParams f(s(rng), s(rng), 0.3);
        const double k = k_ratio_unpolarized(f, 0.71, QuadratureSpec::for_decay(0.3, f.sigma_i()));
        CHECK(k > 0.0);
        CHECK(k < 0.71);
    }

    // point-mass limit: k -> k0
    const FogParams sharp(50.0, 50.0, 1.0);
    CHECK(k_ratio_unpolarized(sharp, 0.71, QuadratureSpec::for_decay(1.0, 50.0)) ==
          doctest::Approx(0.71).epsilon(0.01));
}
