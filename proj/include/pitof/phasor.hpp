#pragma once

#include <complex>

namespace pitof {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wrap an angle into [0, 2*pi).
double wrap_phase(double phi);

/// Amplitude/phase/offset triple of an amplitude-modulated signal at one pixel.
/// `degenerate` marks a decode with zero modulation where the phase carries no
/// information (it is reported as 0).
struct Phasor {
    double amplitude = 0.0;
    double phase = 0.0;   // radians, wrapped to [0, 2*pi)
    double offset = 0.0;
    bool degenerate = false;
};

/// Four correlation samples at reference phase labels {0, 45, 90, 135} degrees.
/// `is_difference` marks tap-sets formed by subtraction, for which negative
/// values are legitimate.
struct TapSet {
    double i0 = 0.0;
    double i45 = 0.0;
    double i90 = 0.0;
    double i135 = 0.0;
    bool is_difference = false;
};

/// Recover (amplitude, phase, offset) from four taps:
///   a = 0.5 * sqrt((i135-i45)^2 + (i90-i0)^2)
///   phi = atan2(i135-i45, i90-i0), wrapped to [0, 2*pi)
///   s = (i0+i45+i90+i135) / 4
/// A constant tap-set decodes to amplitude 0 with the degenerate flag set.
Phasor decode_taps(const TapSet& taps);

/// Forward tap synthesis: i_psi = s - a*cos(phi - 2*psi) at the four labels.
/// Exact inverse of decode_taps.
TapSet encode_taps(const Phasor& p);

/// Componentwise tap difference, flagged as a difference tap-set. Decoding the
/// result equals complex-plane subtraction of the decoded operands.
TapSet tap_subtract(const TapSet& x, const TapSet& y);

struct AmbientResult {
    TapSet taps;
    bool clipped = false; // a tap went negative beyond the tolerance and was clamped
};

/// Subtract a per-pixel ambient level from all four taps. Taps driven negative
/// beyond `tolerance` are clamped at zero and reported via `clipped`.
AmbientResult subtract_ambient(const TapSet& taps, double ambient, double tolerance = 1e-9);

struct ComplexPhasor {
    std::complex<double> vec; // a * exp(i*phi)
    double offset = 0.0;
};

ComplexPhasor phasor_to_complex(const Phasor& p);

/// Rebuild a Phasor from a complex vector and offset (inverse of phasor_to_complex).
Phasor phasor_from_complex(const std::complex<double>& vec, double offset);

} // namespace pitof
