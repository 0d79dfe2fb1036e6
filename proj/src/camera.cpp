#include "pitof/camera.hpp"

#include <cmath>
#include <numbers>

#include "pitof/errors.hpp"

namespace pitof {

void CameraConfig::validate() const {
    if (!(mod_freq > 0.0)) throw ConfigError("camera: mod_freq must be > 0");
    if (!(k0 > 0.0 && k0 <= 1.0)) throw ConfigError("camera: k0 must be in (0, 1]");
    if (!(phi0 > 0.0)) throw ConfigError("camera: phi0 must be > 0");
    if (width <= 0 || height <= 0) throw ConfigError("camera: dimensions must be positive");
    if (illum_phase_offset &&
        (illum_phase_offset->width() != width || illum_phase_offset->height() != height))
        throw ConfigError("camera: illumination offset plane does not match dimensions");
}

double depth_to_phase(double z, const CameraConfig& cam) {
    const double range = cam.unambiguous_range();
    if (!(z > 0.0) || !(z < range))
        throw ConfigError("depth_to_phase: depth outside the single-period range");
    return 4.0 * std::numbers::pi * cam.mod_freq * z / kLightSpeed;
}

double phase_to_depth(double phi, const CameraConfig& cam) {
    return phi * kLightSpeed / (4.0 * std::numbers::pi * cam.mod_freq);
}

} // namespace pitof
