#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "pitof/phasor.hpp"

using namespace pitof;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("decode: constant taps are degenerate") {
    const Phasor p = decode_taps({2.0, 2.0, 2.0, 2.0});
    CHECK(p.amplitude == 0.0);
    CHECK(p.phase == 0.0);
    CHECK(p.offset == doctest::Approx(2.0));
    CHECK(p.degenerate);
}

TEST_CASE("decode: hand-evaluated four-tap sample") {
    // i135-i45 = 2, i90-i0 = 0
    const Phasor p = decode_taps({2.0, 1.0, 2.0, 3.0});
    CHECK(p.amplitude == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.phase == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(p.offset == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(p.degenerate);
}

TEST_CASE("encode: substitution into the tap convention") {
    const TapSet a = encode_taps({1.0, kPi / 2, 2.0});
    CHECK(a.i0 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(a.i45 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.i90 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(a.i135 == doctest::Approx(3.0).epsilon(1e-12));

    const TapSet b = encode_taps({1.0, 0.0, 2.0});
    CHECK(b.i0 == doctest::Approx(1.0));
    CHECK(b.i45 == doctest::Approx(2.0));
    CHECK(b.i90 == doctest::Approx(3.0));
    CHECK(b.i135 == doctest::Approx(2.0));

    const TapSet c = encode_taps({0.0, 1.234, 5.0});
    for (double v : {c.i0, c.i45, c.i90, c.i135}) CHECK(v == doctest::Approx(5.0));
}

TEST_CASE("round-trip decode(encode(p)) over randomized phasors") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> amp(0.0, 10.0);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    for (int i = 0; i < 20000; ++i) {
        Phasor p;
        p.amplitude = amp(rng);
        p.phase = ph(rng);
        p.offset = p.amplitude + amp(rng); // keep taps nonnegative: a <= s
        const Phasor q = decode_taps(encode_taps(p));
        CHECK(q.amplitude == doctest::Approx(p.amplitude).epsilon(1e-10));
        CHECK(q.offset == doctest::Approx(p.offset).epsilon(1e-10));
        if (p.amplitude > 1e-9) {
            double dphi = std::fabs(q.phase - p.phase);
            dphi = std::min(dphi, kTwoPi - dphi);
            CHECK(dphi < 1e-10);
        }
    }
}

TEST_CASE("tap subtraction cancels equal modulation") {
    const TapSet d = tap_subtract({4.0, 3.0, 4.0, 5.0}, {2.0, 1.0, 2.0, 3.0});
    CHECK(d.is_difference);
    const Phasor p = decode_taps(d);
    CHECK(p.amplitude == doctest::Approx(0.0));
    CHECK(p.offset == doctest::Approx(2.0));

    const TapSet x{1.5, 2.5, 0.25, 9.0};
    const Phasor self = decode_taps(tap_subtract(x, x));
    CHECK(self.amplitude == 0.0);
    CHECK(self.degenerate);
}

TEST_CASE("decode is linear: tap difference equals complex difference") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> amp(0.1, 5.0);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    for (int i = 0; i < 100; ++i) {
        Phasor a{amp(rng), ph(rng), 8.0 + amp(rng)};
        Phasor b{amp(rng), ph(rng), amp(rng)};
        const TapSet ta = encode_taps(a);
        const TapSet tb = encode_taps(b);
        const Phasor d = decode_taps(tap_subtract(ta, tb));
        const std::complex<double> expect =
            std::polar(a.amplitude, a.phase) - std::polar(b.amplitude, b.phase);
        CHECK(d.amplitude == doctest::Approx(std::abs(expect)).epsilon(1e-10));
        CHECK(d.offset == doctest::Approx(a.offset - b.offset).epsilon(1e-10));
        if (std::abs(expect) > 1e-9) {
            double dphi = std::fabs(d.phase - wrap_phase(std::arg(expect)));
            dphi = std::min(dphi, kTwoPi - dphi);
            CHECK(dphi < 1e-9);
        }
    }
}

TEST_CASE("ambient subtraction shifts only the offset") {
    const auto r = subtract_ambient({5.0, 5.0, 5.0, 5.0}, 3.0);
    CHECK_FALSE(r.clipped);
    CHECK(decode_taps(r.taps).offset == doctest::Approx(2.0));

    const auto identity = subtract_ambient({2.0, 1.0, 2.0, 3.0}, 0.0);
    CHECK(identity.taps.i45 == doctest::Approx(1.0));

    const auto shifted = subtract_ambient({2.0, 1.0, 2.0, 3.0}, 1.0);
    const Phasor before = decode_taps(TapSet{2.0, 1.0, 2.0, 3.0});
    const Phasor after = decode_taps(shifted.taps);
    CHECK(after.amplitude == doctest::Approx(before.amplitude).epsilon(1e-12));
    CHECK(after.phase == doctest::Approx(before.phase).epsilon(1e-12));
    CHECK(after.offset == doctest::Approx(before.offset - 1.0).epsilon(1e-12));

    const auto clipped = subtract_ambient({2.0, 1.0, 2.0, 3.0}, 2.0);
    CHECK(clipped.clipped);
    CHECK(clipped.taps.i45 == 0.0);
}

TEST_CASE("offset-shift invariance of decode") {
    const TapSet base{1.0, 2.0, 3.0, 2.0};
    TapSet shifted = base;
    for (double* v : {&shifted.i0, &shifted.i45, &shifted.i90, &shifted.i135}) *v += 4.25;
    const Phasor a = decode_taps(base);
    const Phasor b = decode_taps(shifted);
    CHECK(a.amplitude == doctest::Approx(b.amplitude));
    CHECK(a.phase == doctest::Approx(b.phase));
    CHECK(b.offset == doctest::Approx(a.offset + 4.25));
}

TEST_CASE("phasor_to_complex spot values and wrapping") {
    const auto a = phasor_to_complex({1.0, 0.0, 2.0});
    CHECK(a.vec.real() == doctest::Approx(1.0));
    CHECK(a.vec.imag() == doctest::Approx(0.0));
    CHECK(a.offset == 2.0);

    const auto b = phasor_to_complex({1.0, kPi / 2, 0.0});
    CHECK(b.vec.real() == doctest::Approx(0.0));
    CHECK(b.vec.imag() == doctest::Approx(1.0));

    const auto c = phasor_to_complex({2.0, kPi, 1.0});
    CHECK(c.vec.real() == doctest::Approx(-2.0));

    CHECK(wrap_phase(-0.5) == doctest::Approx(kTwoPi - 0.5));
    CHECK(wrap_phase(kTwoPi) == doctest::Approx(0.0));
    for (double phi : {-12.3, -0.1, 0.0, 5.9, 123.4}) {
        const double w = wrap_phase(phi);
        CHECK(w >= 0.0);
        CHECK(w < kTwoPi);
    }
}
