#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "pitof/capture.hpp"
#include "pitof/scattering.hpp"

namespace pitof {

/// Scene description: per-pixel geometry and albedo, plus the medium.
/// An absent fog means a clear scene (no backscatter at all).
struct SceneSpec {
    Plane<double> depth;       // meters, inside the unambiguous range
    Plane<double> reflectance; // [0, 1]
    std::optional<FogParams> fog;
    std::optional<Plane<double>> ambient; // per-pixel constant added to every tap

    void validate(const CameraConfig& cam) const;
};

enum class NoiseMode { none, gaussian, shot };

/// Tap-domain sensor noise. Gaussian scales with the pixel's pre-noise offset
/// level; shot scales with sqrt of each tap. Fully determined by the seed and
/// pixel position, independent of threading.
struct NoiseSpec {
    NoiseMode mode = NoiseMode::none;
    double scale = 0.0;
    std::uint64_t seed = 0;
};

enum class IntegrationMode {
    infinite,  // backscatter integrated over [phi0, tail cutoff] as the model assumes
    truncated, // integrated only up to the target phase (physical mismatch probe)
};

enum class BackscatterPhase {
    analytic,   // phasor phase = closed-form amplitude-weighted mean (model-consistent)
    integrated, // phasor phase = arg of the phasor integral
};

struct SimOptions {
    IntegrationMode integration = IntegrationMode::infinite;
    BackscatterPhase phase = BackscatterPhase::analytic;
    double polarized_target_fraction = 0.0; // stress knob; the model assumes 0
    int threads = 1;
};

/// Pre-noise components each capture is assembled from, recorded per pixel.
struct GroundTruth {
    Plane<Phasor> target_u;
    Plane<Phasor> backscatter_p;
    Plane<Phasor> backscatter_u;
    std::optional<FogParams> fog;
    Plane<double> depth;
};

/// Unpolarized target phasor per pixel: phase from depth, amplitude
/// reflectance/phi^2 * exp(-sigma_i*phi) (unit source power), offset a/k0.
Plane<Phasor> simulate_target(const SceneSpec& scene, const CameraConfig& cam);

/// Integrated (polarized, unpolarized) backscatter phasors per pixel.
std::pair<Plane<Phasor>, Plane<Phasor>> simulate_backscatter(const SceneSpec& scene,
                                                             const CameraConfig& cam,
                                                             const SimOptions& opt);

/// Full forward model: compose channel phasors, encode taps, add ambient,
/// apply noise. Ground truth snapshots the pre-noise components.
std::pair<CaptureStack, GroundTruth> synthesize_capture(const SceneSpec& scene,
                                                        const CameraConfig& cam,
                                                        const NoiseSpec& noise,
                                                        const SimOptions& opt = {});

} // namespace pitof
