#pragma once

#include <optional>

#include "pitof/image.hpp"

namespace pitof {

/// Propagation speed used for the phase<->depth conversion, m/s.
inline constexpr double kLightSpeed = 3.0e8;

/// Static acquisition parameters of the simulated four-tap camera.
struct CameraConfig {
    double mod_freq = 80e6; // Hz
    double k0 = 0.71;       // amplitude-to-offset ratio of unscattered light
    double phi0 = 0.0;      // radians; phase of the nearest fog distance
    int width = 0;
    int height = 0;
    // Optional per-pixel phase bias of the illumination geometry (the source
    // sits beside the sensor, not behind it).
    std::optional<Plane<double>> illum_phase_offset;

    void validate() const;
    double unambiguous_range() const { return kLightSpeed / (2.0 * mod_freq); }
};

/// phi = 4*pi*f*z / c. Depth must lie inside the single-period range
/// (0, c/(2f)); wrapping is out of scope.
double depth_to_phase(double z, const CameraConfig& cam);

/// Exact inverse of depth_to_phase.
double phase_to_depth(double phi, const CameraConfig& cam);

} // namespace pitof
