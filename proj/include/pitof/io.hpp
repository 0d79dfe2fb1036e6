#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pitof/calibrate.hpp"
#include "pitof/capture.hpp"
#include "pitof/metrics.hpp"
#include "pitof/simulate.hpp"

namespace pitof {

inline constexpr const char* kToolVersion = "0.1.0";

/// Binary tap-stack container ("PITF"): magic, version, dimensions, per-plane
/// descriptors, then row-major float32 little-endian planes. Writers are
/// atomic (temp file + rename) and readers verify the exact file size.
void write_capture(const std::string& path, const CaptureStack& stack);

/// Reads the tap planes; the camera block stays default-initialized (it lives
/// in the manifest, not the binary container).
CaptureStack read_capture(const std::string& path);

/// Raw row-major float32 plane, no header; dimensions travel in the sibling
/// plane manifest.
void write_plane_f32(const std::string& path, const Plane<double>& plane);
Plane<double> read_plane_f32(const std::string& path, int width, int height);

void write_plane_manifest(const std::string& path, int width, int height,
                          const std::string& quantity);
struct PlaneMeta {
    int width = 0;
    int height = 0;
    std::string quantity;
};
PlaneMeta read_plane_manifest(const std::string& path, bool strict = false);

/// Capture provenance: camera, medium ground truth (synthetic captures),
/// noise, simulator options.
struct SimManifest {
    CameraConfig camera;
    std::optional<FogParams> fog;
    double alpha = 0.0; // ground-truth sigma_i/sigma when fog is present
    NoiseSpec noise;
    IntegrationMode integration = IntegrationMode::infinite;
    BackscatterPhase phase_model = BackscatterPhase::analytic;
    double polarized_target_fraction = 0.0;
    std::string tool_version = kToolVersion;
};

void write_manifest(const std::string& path, const SimManifest& manifest);

/// Unknown keys raise ConfigError in strict mode.
SimManifest read_manifest(const std::string& path, bool strict = false);

/// Calibration JSON plus the per-pixel alpha as an attached float32 plane
/// (sibling file, referenced by name).
void write_calibration(const std::string& path, const CalibrationParams& calib);
CalibrationParams read_calibration(const std::string& path, bool strict = false);

struct MetricsRow {
    std::string scene;
    std::string method;
    std::string fog_preset;
    DepthMetrics metrics;
    double runtime_ms = 0.0;
};

/// Appends one CSV row, creating the file (with the definition header) on
/// first use.
void append_metrics_row(const std::string& path, const MetricsRow& row);

/// Model intensity-decay curves over a distance grid, as CSV text with
/// columns distance_m, intensity_nofog (inverse-square), intensity_fog
/// (extra exp(-sigma_i*phi)), intensity_fog_polarizer (extra exp(-sigma_p*phi)).
std::string decay_curve_csv(double sigma_i, double sigma_p, const CameraConfig& cam,
                            double min_dist, double max_dist, int steps);

} // namespace pitof
