#include "pitof/presets.hpp"

#include <cmath>
#include <numbers>

#include "pitof/errors.hpp"

namespace pitof {

namespace {

// Base (thin) medium. The ladder was picked so the cross-polarization
// baseline error grows strictly with density on the shipped staircase scene.
constexpr double kBaseSigmaI = 0.3;
constexpr double kBaseSigmaP = 0.2;

} // namespace

FogParams fog_preset(const std::string& name, double phi0) {
    double factor;
    if (name == "thin")
        factor = 1.0;
    else if (name == "medium")
        factor = 2.0;
    else if (name == "thick")
        factor = 4.0;
    else
        throw ConfigError("unknown fog preset: " + name);
    return FogParams(kBaseSigmaI * factor, kBaseSigmaP * factor, phi0);
}

Plane<double> staircase_depth(int width, int height, double z_near, double z_far, int steps) {
    if (steps < 1) throw ConfigError("staircase_depth: need at least one step");
    if (!(z_far > z_near) || !(z_near > 0.0))
        throw ConfigError("staircase_depth: bad depth range");
    Plane<double> depth(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int step = std::min(steps - 1, x * steps / width);
            depth.at(x, y) = z_near + (z_far - z_near) * step / std::max(steps - 1, 1);
        }
    }
    return depth;
}

CameraConfig default_camera(int width, int height) {
    CameraConfig cam;
    cam.mod_freq = 80e6;
    cam.k0 = 0.71;
    cam.width = width;
    cam.height = height;
    cam.phi0 = 4.0 * std::numbers::pi * cam.mod_freq * kDefaultFogOnsetMeters / kLightSpeed;
    return cam;
}

SceneSpec preset_scene(const std::string& fog_name, const CameraConfig& cam, bool empty) {
    SceneSpec scene;
    scene.depth = staircase_depth(cam.width, cam.height, 0.3, 0.9, 6);
    scene.reflectance = Plane<double>(cam.width, cam.height, 0.0);
    if (!empty) {
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x)
                scene.reflectance.at(x, y) = 0.6 + 0.4 * y / std::max(cam.height - 1, 1);
    }
    if (fog_name != "none") scene.fog = fog_preset(fog_name, cam.phi0);
    return scene;
}

} // namespace pitof
