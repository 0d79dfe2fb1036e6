#pragma once

#include "pitof/capture.hpp"

namespace pitof {

/// Everything the reconstruction needs besides the capture itself.
struct CalibrationParams {
    double k0 = 0.0;
    double phi0 = 0.0;
    double mod_freq = 0.0;
    Plane<double> alpha;   // per-pixel sigma_i / sigma, median-infilled
    double alpha_median = 0.0;

    void validate() const;
};

/// Amplitude-to-offset ratio from a fog-free, ambient-subtracted reference
/// capture: median over valid pixels of decoded a/s on the cross channel.
/// Throws NumericError when no pixel carries modulation.
double calibrate_k0(const CaptureStack& reference);

struct AlphaCalibration {
    Plane<double> alpha;  // infilled, clamped to (eps, 1-eps)
    MaskPlane recovered;  // pixels solved directly (not infilled)
    double median = 0.0;
};

/// Per-pixel alpha from an empty-fog capture (backscatter only, no objects):
///   1. polarized mean phase from the PDI decode -> sigma by inverting the
///      closed-form polarized mean,
///   2. unpolarized mean phase from the cross decode -> sigma_i by root
///      finding with sigma held fixed,
///   3. alpha = sigma_i / sigma.
/// Pixels that fail either inversion are filled with the median of recovered
/// neighbours.
AlphaCalibration calibrate_alpha(const CaptureStack& empty_fog, double phi0, int threads = 1);

/// The configured near-range phase. Simulation derives it from the fog onset
/// distance; hardware would supply it from geometric calibration.
double resolve_phi0(const CameraConfig& config);

} // namespace pitof
