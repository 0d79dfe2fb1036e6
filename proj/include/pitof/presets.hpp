#pragma once

#include <string>

#include "pitof/simulate.hpp"

namespace pitof {

/// Default near-range fog onset of the synthetic chamber. 0.25 m puts the
/// backscatter energy in the same regime as the target returns, where both
/// the density ladder and the noise behaviour are meaningful.
inline constexpr double kDefaultFogOnsetMeters = 0.25;

/// Density ladder: thin is the base medium, medium and thick scale both decay
/// rates by 2x and 4x (alpha is a property of the particles, not the density,
/// so it stays fixed across the ladder).
struct FogPreset {
    std::string name;
    double density_factor = 1.0;
};

/// Returns the fog parameters for "thin" | "medium" | "thick" at the given
/// phi0. Throws ConfigError for unknown names.
FogParams fog_preset(const std::string& name, double phi0);

/// Horizontal staircase depth plane: `steps` equal-width risers spanning
/// [z_near, z_far].
Plane<double> staircase_depth(int width, int height, double z_near, double z_far, int steps);

/// Default camera used by the synthetic fixtures (80 MHz, k0 = 0.71, phi0
/// from the 5 cm fog onset).
CameraConfig default_camera(int width, int height);

/// Staircase test scene with a mild reflectance gradient and the named fog
/// preset ("none" for a clear capture; reflectance 0 everywhere for an
/// empty-chamber calibration capture when `empty` is set).
SceneSpec preset_scene(const std::string& fog_name, const CameraConfig& cam, bool empty = false);

} // namespace pitof
