#include "pitof/phasor.hpp"

#include <cmath>
#include <stdexcept>

namespace pitof {

double wrap_phase(double phi) {
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    // fmod can round back onto the period boundary
    if (w >= kTwoPi) w = 0.0;
    return w;
}

Phasor decode_taps(const TapSet& taps) {
    if (!std::isfinite(taps.i0) || !std::isfinite(taps.i45) ||
        !std::isfinite(taps.i90) || !std::isfinite(taps.i135))
        throw std::invalid_argument("decode_taps: non-finite tap sample");

    const double dy = taps.i135 - taps.i45;
    const double dx = taps.i90 - taps.i0;

    Phasor p;
    p.offset = (taps.i0 + taps.i45 + taps.i90 + taps.i135) / 4.0;
    p.amplitude = 0.5 * std::hypot(dy, dx);
    if (dy == 0.0 && dx == 0.0) {
        p.phase = 0.0;
        p.degenerate = true;
    } else {
        p.phase = wrap_phase(std::atan2(dy, dx));
    }
    return p;
}

TapSet encode_taps(const Phasor& p) {
    if (p.amplitude < 0.0)
        throw std::invalid_argument("encode_taps: negative amplitude");

    // Correlation phase is twice the tap label: 2*psi in {0, 90, 180, 270} deg.
    const double c = std::cos(p.phase);
    const double s = std::sin(p.phase);
    TapSet t;
    t.i0 = p.offset - p.amplitude * c;                       // cos(phi - 0)
    t.i45 = p.offset - p.amplitude * s;                      // cos(phi - pi/2)
    t.i90 = p.offset + p.amplitude * c;                      // cos(phi - pi)
    t.i135 = p.offset + p.amplitude * s;                     // cos(phi - 3pi/2)
    return t;
}

TapSet tap_subtract(const TapSet& x, const TapSet& y) {
    TapSet d;
    d.i0 = x.i0 - y.i0;
    d.i45 = x.i45 - y.i45;
    d.i90 = x.i90 - y.i90;
    d.i135 = x.i135 - y.i135;
    d.is_difference = true;
    return d;
}

AmbientResult subtract_ambient(const TapSet& taps, double ambient, double tolerance) {
    if (ambient < 0.0)
        throw std::invalid_argument("subtract_ambient: negative ambient level");

    AmbientResult r;
    r.taps = taps;
    for (double* v : {&r.taps.i0, &r.taps.i45, &r.taps.i90, &r.taps.i135}) {
        *v -= ambient;
        if (*v < 0.0) {
            if (*v < -tolerance) r.clipped = true;
            *v = 0.0;
        }
    }
    return r;
}

ComplexPhasor phasor_to_complex(const Phasor& p) {
    return {std::polar(p.amplitude, p.phase), p.offset};
}

Phasor phasor_from_complex(const std::complex<double>& vec, double offset) {
    Phasor p;
    p.amplitude = std::abs(vec);
    p.offset = offset;
    if (vec.real() == 0.0 && vec.imag() == 0.0) {
        p.phase = 0.0;
        p.degenerate = true;
    } else {
        p.phase = wrap_phase(std::arg(vec));
    }
    return p;
}

} // namespace pitof
