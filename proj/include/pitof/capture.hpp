#pragma once

#include <optional>

#include "pitof/camera.hpp"
#include "pitof/image.hpp"
#include "pitof/phasor.hpp"

namespace pitof {

/// Raw four-tap correlation samples for both polarizer orientations, plus
/// optional ambient frames captured with the illumination off.
struct CaptureStack {
    int width = 0;
    int height = 0;
    Plane<TapSet> parallel;
    Plane<TapSet> cross;
    std::optional<Plane<double>> ambient_parallel;
    std::optional<Plane<double>> ambient_cross;
    CameraConfig camera;

    void validate() const;
};

} // namespace pitof
