#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pitof/errors.hpp"
#include "pitof/io.hpp"
#include "pitof/presets.hpp"
#include "pitof/reconstruct.hpp"

namespace fs = std::filesystem;
using namespace pitof;

namespace {

// Exit codes: 1 usage, 2 config, 3 io, 4 numeric.
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

std::string sibling_json(const std::string& path) {
    fs::path p(path);
    p.replace_extension(".json");
    return p.string();
}

struct GlobalOpts {
    int threads = 1;
    bool strict_manifest = false;
    std::optional<std::uint64_t> seed_override;
};

void attach_camera(CaptureStack& stack, const SimManifest& manifest,
                   const std::string& capture_path) {
    if (manifest.camera.width != stack.width || manifest.camera.height != stack.height)
        throw ConfigError("manifest dimensions do not match the tap stack: " + capture_path);
    stack.camera = manifest.camera;
    stack.camera.validate();
}

void write_named_plane(const std::string& path, const Plane<double>& plane,
                       const std::string& quantity) {
    write_plane_f32(path, plane);
    write_plane_manifest(sibling_json(path), plane.width(), plane.height(), quantity);
}

Plane<double> mask_to_plane(const MaskPlane& mask) {
    Plane<double> p(mask.width(), mask.height(), 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i) p[i] = mask[i] ? 1.0 : 0.0;
    return p;
}

MaskPlane plane_to_mask(const Plane<double>& p) {
    MaskPlane m(p.width(), p.height(), 0);
    for (std::size_t i = 0; i < p.size(); ++i) m[i] = p[i] > 0.5 ? 1 : 0;
    return m;
}

int run_simulate(const GlobalOpts& g, int width, int height, const std::string& preset,
                 double sigma_i, double sigma_p, double fog_onset, double depth_near,
                 double depth_far, int steps, bool empty, double ambient,
                 const std::string& noise_mode, double noise_scale, std::uint64_t seed,
                 const std::string& integration, const std::string& phase_model,
                 double polarized_fraction, double mod_freq, double k0,
                 const std::string& out_stack, std::string out_manifest,
                 std::string out_depth) {
    CameraConfig cam;
    cam.mod_freq = mod_freq;
    cam.k0 = k0;
    cam.width = width;
    cam.height = height;
    cam.phi0 = 4.0 * std::numbers::pi * mod_freq * fog_onset / kLightSpeed;
    cam.validate();

    SceneSpec scene;
    scene.depth = staircase_depth(width, height, depth_near, depth_far, steps);
    scene.reflectance = Plane<double>(width, height, 0.0);
    if (!empty)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                scene.reflectance.at(x, y) = 0.6 + 0.4 * y / std::max(height - 1, 1);
    if (ambient > 0.0) scene.ambient = Plane<double>(width, height, ambient);

    if (preset != "none") {
        scene.fog = fog_preset(preset, cam.phi0);
    } else if (sigma_i > 0.0) {
        scene.fog = FogParams(sigma_i, sigma_p, cam.phi0);
    }

    NoiseSpec noise;
    if (noise_mode == "none")
        noise.mode = NoiseMode::none;
    else if (noise_mode == "gaussian")
        noise.mode = NoiseMode::gaussian;
    else if (noise_mode == "shot")
        noise.mode = NoiseMode::shot;
    else
        throw ConfigError("unknown noise mode: " + noise_mode);
    noise.scale = noise_scale;
    noise.seed = g.seed_override.value_or(seed);

    SimOptions opt;
    opt.integration =
        integration == "truncated" ? IntegrationMode::truncated : IntegrationMode::infinite;
    if (integration != "truncated" && integration != "infinite")
        throw ConfigError("unknown integration mode: " + integration);
    opt.phase =
        phase_model == "integrated" ? BackscatterPhase::integrated : BackscatterPhase::analytic;
    if (phase_model != "integrated" && phase_model != "analytic")
        throw ConfigError("unknown backscatter phase model: " + phase_model);
    opt.polarized_target_fraction = polarized_fraction;
    opt.threads = g.threads;

    auto [stack, gt] = synthesize_capture(scene, cam, noise, opt);
    write_capture(out_stack, stack);

    SimManifest manifest;
    manifest.camera = cam;
    manifest.fog = scene.fog;
    manifest.alpha = scene.fog ? scene.fog->alpha() : 0.0;
    manifest.noise = noise;
    manifest.integration = opt.integration;
    manifest.phase_model = opt.phase;
    manifest.polarized_target_fraction = opt.polarized_target_fraction;
    if (out_manifest.empty()) out_manifest = sibling_json(out_stack);
    write_manifest(out_manifest, manifest);

    if (out_depth.empty())
        out_depth = (fs::path(out_stack).parent_path() /
                     (fs::path(out_stack).stem().string() + ".depth_gt.f32"))
                        .string();
    write_named_plane(out_depth, gt.depth, "depth_m");

    std::printf("wrote %s (%dx%d, fog=%s, noise=%s %.4g, seed=%llu)\n", out_stack.c_str(),
                width, height, scene.fog ? preset.c_str() : "none", noise_mode.c_str(),
                noise_scale, static_cast<unsigned long long>(noise.seed));
    return 0;
}

int run_calibrate(const GlobalOpts& g, const std::string& reference,
                  const std::string& empty_fog, double manual_alpha, double manual_k0,
                  bool collapse_alpha, const std::string& out) {
    CalibrationParams calib;

    std::string phi0_source;
    if (!reference.empty()) {
        const SimManifest m = read_manifest(sibling_json(reference), g.strict_manifest);
        CaptureStack ref = read_capture(reference);
        attach_camera(ref, m, reference);
        calib.k0 = calibrate_k0(ref);
        calib.phi0 = resolve_phi0(m.camera);
        calib.mod_freq = m.camera.mod_freq;
        phi0_source = reference;
    } else if (manual_k0 > 0.0) {
        calib.k0 = manual_k0;
    } else {
        throw ConfigError("calibrate: need --reference or --k0");
    }

    if (!empty_fog.empty()) {
        const SimManifest m = read_manifest(sibling_json(empty_fog), g.strict_manifest);
        CaptureStack fog = read_capture(empty_fog);
        attach_camera(fog, m, empty_fog);
        if (calib.phi0 == 0.0) {
            calib.phi0 = resolve_phi0(m.camera);
            calib.mod_freq = m.camera.mod_freq;
        }
        AlphaCalibration alpha = calibrate_alpha(fog, calib.phi0, g.threads);
        calib.alpha_median = alpha.median;
        if (collapse_alpha) {
            calib.alpha = Plane<double>(fog.width, fog.height, alpha.median);
        } else {
            calib.alpha = std::move(alpha.alpha);
        }
    } else if (manual_alpha > 0.0 && manual_alpha < 1.0) {
        calib.alpha_median = manual_alpha;
    } else {
        throw ConfigError("calibrate: need --empty-fog or --alpha");
    }

    if (!(calib.phi0 > 0.0) || !(calib.mod_freq > 0.0))
        throw ConfigError("calibrate: no capture manifest supplied phi0/mod_freq");

    write_calibration(out, calib);
    std::printf("calibration: k0=%.9f alpha_median=%.9f phi0=%.9f -> %s\n", calib.k0,
                calib.alpha_median, calib.phi0, out.c_str());
    return 0;
}

int run_reconstruct(const GlobalOpts& g, const std::string& capture,
                    const std::string& calibration, const std::string& method,
                    const std::string& optimizer, bool global_alpha, bool per_pixel_sigma,
                    double noise_floor_abs, double noise_floor_rel,
                    const std::string& out_prefix) {
    const SimManifest manifest = read_manifest(sibling_json(capture), g.strict_manifest);
    CaptureStack stack = read_capture(capture);
    attach_camera(stack, manifest, capture);

    ReconstructOptions opt;
    opt.threads = g.threads;
    opt.global_alpha = global_alpha;
    opt.per_pixel_sigma = per_pixel_sigma;
    opt.noise_floor_abs = noise_floor_abs;
    opt.noise_floor_rel = noise_floor_rel;
    opt.fit.optimizer = optimizer == "bisection" ? Optimizer::bisection : Optimizer::adam;

    const auto t0 = std::chrono::steady_clock::now();
    DepthMap depth;
    std::optional<BackscatterEstimate> est;
    if (method == "ours") {
        const CalibrationParams calib = read_calibration(calibration, g.strict_manifest);
        auto [d, e] = reconstruct_depth(stack, calib, opt);
        depth = std::move(d);
        est = std::move(e);
    } else if (method == "cross") {
        depth = baseline_depth(stack, BaselineChannel::cross, opt);
    } else if (method == "parallel") {
        depth = baseline_depth(stack, BaselineChannel::parallel, opt);
    } else if (method == "pdi") {
        depth = baseline_depth(stack, BaselineChannel::pdi, opt);
    } else {
        std::fprintf(stderr, "unknown method: %s\n", method.c_str());
        return kExitUsage;
    }
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();

    write_named_plane(out_prefix + ".depth.f32", depth.depth, "depth_m");
    write_named_plane(out_prefix + ".mask.f32", mask_to_plane(depth.valid), "mask");
    if (est) {
        write_named_plane(out_prefix + ".sigma.f32", est->sigma_map, "sigma");
        write_named_plane(out_prefix + ".phase_u.f32", est->phase_u, "radians");
        write_named_plane(out_prefix + ".amp_u.f32", est->amp_u, "amplitude");

        std::size_t valid = 0;
        std::size_t alt = 0;
        double worst_residual = 0.0;
        for (std::size_t i = 0; i < est->valid.size(); ++i) {
            valid += est->valid[i];
            alt += est->alt_branch[i];
            worst_residual = std::max(worst_residual, est->residual[i]);
        }
        nlohmann::json diag;
        diag["sigma_global"] = est->sigma_global;
        diag["fog_detected"] = est->fog_detected;
        diag["valid_fraction"] = static_cast<double>(valid) / est->valid.size();
        diag["alt_branch_pixels"] = alt;
        diag["worst_amplitude_residual"] = worst_residual;
        diag["runtime_ms"] = ms;
        std::ofstream(out_prefix + ".diag.json") << diag.dump(2) << "\n";
    }
    std::printf("reconstructed %s via %s in %.1f ms\n", capture.c_str(), method.c_str(), ms);
    return 0;
}

int run_evaluate(const GlobalOpts& g, const std::string& depth_file,
                 const std::string& gt_file, const std::string& mask_file,
                 const std::string& scene, const std::string& method,
                 const std::string& preset, double runtime_ms, const std::string& out) {
    const PlaneMeta meta = read_plane_manifest(sibling_json(depth_file), g.strict_manifest);
    const Plane<double> depth = read_plane_f32(depth_file, meta.width, meta.height);
    const PlaneMeta gt_meta = read_plane_manifest(sibling_json(gt_file), g.strict_manifest);
    if (gt_meta.width != meta.width || gt_meta.height != meta.height)
        throw ConfigError("evaluate: depth and ground-truth dimensions differ");
    const Plane<double> gt = read_plane_f32(gt_file, gt_meta.width, gt_meta.height);

    std::optional<MaskPlane> mask;
    if (!mask_file.empty())
        mask = plane_to_mask(read_plane_f32(mask_file, meta.width, meta.height));

    MetricsRow row;
    row.scene = scene;
    row.method = method;
    row.fog_preset = preset;
    row.metrics = evaluate_depth(depth, gt, mask ? &*mask : nullptr);
    row.runtime_ms = runtime_ms;
    append_metrics_row(out, row);
    std::printf("%s/%s/%s: rmse=%.4f cm rel=%.5f std=%.4f cm valid=%.3f\n", scene.c_str(),
                method.c_str(), preset.c_str(), row.metrics.rmse_cm, row.metrics.rel_error,
                row.metrics.std_dev_cm, row.metrics.valid_fraction);
    return 0;
}

int run_decay_curve(double sigma_i, double sigma_p, double fog_onset, double mod_freq,
                    double min_dist, double max_dist, int steps, const std::string& out) {
    CameraConfig cam;
    cam.mod_freq = mod_freq;
    cam.width = cam.height = 1;
    cam.phi0 = 4.0 * std::numbers::pi * mod_freq * fog_onset / kLightSpeed;
    cam.k0 = 0.71;
    cam.validate();
    const std::string body = decay_curve_csv(sigma_i, sigma_p, cam, min_dist, max_dist, steps);
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw IoError("cannot open " + out);
    f << body;
    std::printf("wrote %s (%d rows)\n", out.c_str(), steps);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polarimetric four-tap ToF simulation and fog-robust depth reconstruction"};
    app.require_subcommand(1);

    GlobalOpts g;
    std::uint64_t seed_flag = 0;
    bool seed_given = false;
    app.add_option("--threads", g.threads, "worker threads for per-pixel stages");
    app.add_flag("--strict-manifest", g.strict_manifest, "reject unknown manifest keys");
    app.add_option("--seed", seed_flag, "override the noise seed")
        ->each([&seed_given](const std::string&) { seed_given = true; });

    // simulate
    auto* sim = app.add_subcommand("simulate", "synthesize a polarimetric four-tap capture");
    int width = 64, height = 48, steps = 6;
    std::string preset = "none", noise_mode = "none", integration = "infinite",
                phase_model = "analytic";
    double sigma_i = 0.0, sigma_p = 0.0;
    double fog_onset = kDefaultFogOnsetMeters;
    double depth_near = 0.3, depth_far = 0.9, ambient = 0.0;
    double noise_scale = 0.0, polarized_fraction = 0.0, mod_freq = 80e6, k0 = 0.71;
    std::uint64_t seed = 0;
    bool empty = false;
    std::string out_stack, out_manifest, out_depth;
    sim->add_option("--width", width);
    sim->add_option("--height", height);
    sim->add_option("--preset", preset, "thin|medium|thick|none");
    sim->add_option("--sigma-i", sigma_i, "intensity decay rate (rad^-1), overrides preset");
    sim->add_option("--sigma-p", sigma_p, "depolarization decay rate (rad^-1)");
    sim->add_option("--fog-onset", fog_onset, "nearest fog distance in meters (sets phi0)");
    sim->add_option("--depth-near", depth_near);
    sim->add_option("--depth-far", depth_far);
    sim->add_option("--steps", steps, "staircase step count");
    sim->add_flag("--empty", empty, "no objects (reflectance 0), for alpha calibration");
    sim->add_option("--ambient", ambient, "constant ambient level added to all taps");
    sim->add_option("--noise", noise_mode, "none|gaussian|shot");
    sim->add_option("--noise-scale", noise_scale);
    sim->add_option("--noise-seed", seed);
    sim->add_option("--integration", integration, "infinite|truncated");
    sim->add_option("--phase-model", phase_model, "analytic|integrated");
    sim->add_option("--polarized-target-fraction", polarized_fraction);
    sim->add_option("--mod-freq", mod_freq);
    sim->add_option("--k0", k0);
    sim->add_option("--out-stack", out_stack)->required();
    sim->add_option("--out-manifest", out_manifest);
    sim->add_option("--out-depth", out_depth);

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "recover k0 and the per-pixel alpha plane");
    std::string reference, empty_fog, cal_out;
    double manual_alpha = 0.0, manual_k0 = 0.0;
    bool collapse_alpha = false;
    cal->add_option("--reference", reference, "fog-free capture for k0");
    cal->add_option("--empty-fog", empty_fog, "empty-chamber fog capture for alpha");
    cal->add_option("--alpha", manual_alpha, "fixed global alpha instead of --empty-fog");
    cal->add_option("--k0", manual_k0, "fixed k0 instead of --reference");
    cal->add_flag("--collapse-alpha", collapse_alpha, "store the median as a uniform plane");
    cal->add_option("--out", cal_out)->required();

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "depth from a capture");
    std::string capture, calibration, method = "ours", optimizer = "adam", out_prefix;
    bool global_alpha = false, per_pixel_sigma = false;
    double noise_floor_abs = 0.0, noise_floor_rel = 1e-9;
    rec->add_option("--capture", capture)->required();
    rec->add_option("--calibration", calibration);
    rec->add_option("--method", method, "ours|cross|parallel|pdi");
    rec->add_option("--optimizer", optimizer, "adam|bisection");
    rec->add_flag("--global-alpha", global_alpha);
    rec->add_flag("--per-pixel-sigma", per_pixel_sigma);
    rec->add_option("--noise-floor-abs", noise_floor_abs);
    rec->add_option("--noise-floor-rel", noise_floor_rel);
    rec->add_option("--out-prefix", out_prefix)->required();

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "append depth-accuracy metrics to a CSV");
    std::string depth_file, gt_file, mask_file, scene_name = "scene", eval_method = "ours",
                eval_preset = "none", metrics_out;
    double runtime_ms = 0.0;
    eva->add_option("--depth", depth_file)->required();
    eva->add_option("--ground-truth", gt_file)->required();
    eva->add_option("--mask", mask_file);
    eva->add_option("--scene", scene_name);
    eva->add_option("--method", eval_method);
    eva->add_option("--preset", eval_preset);
    eva->add_option("--runtime-ms", runtime_ms);
    eva->add_option("--out", metrics_out)->required();

    // decay-curve
    auto* dec = app.add_subcommand("decay-curve", "intensity decay model curves");
    double dc_sigma_i = 0.6, dc_sigma_p = 0.4, dc_onset = kDefaultFogOnsetMeters,
           dc_freq = 80e6, dc_min = 0.1, dc_max = 1.5;
    int dc_steps = 50;
    std::string dc_out;
    dec->add_option("--sigma-i", dc_sigma_i);
    dec->add_option("--sigma-p", dc_sigma_p);
    dec->add_option("--fog-onset", dc_onset);
    dec->add_option("--mod-freq", dc_freq);
    dec->add_option("--min-dist", dc_min);
    dec->add_option("--max-dist", dc_max);
    dec->add_option("--steps", dc_steps);
    dec->add_option("--out", dc_out)->required();

    try {
        app.parse(argc, argv);
        if (seed_given) g.seed_override = seed_flag;

        if (sim->parsed())
            return run_simulate(g, width, height, preset, sigma_i, sigma_p, fog_onset,
                                depth_near, depth_far, steps, empty, ambient, noise_mode,
                                noise_scale, seed, integration, phase_model,
                                polarized_fraction, mod_freq, k0, out_stack, out_manifest,
                                out_depth);
        if (cal->parsed())
            return run_calibrate(g, reference, empty_fog, manual_alpha, manual_k0,
                                 collapse_alpha, cal_out);
        if (rec->parsed())
            return run_reconstruct(g, capture, calibration, method, optimizer, global_alpha,
                                   per_pixel_sigma, noise_floor_abs, noise_floor_rel,
                                   out_prefix);
        if (eva->parsed())
            return run_evaluate(g, depth_file, gt_file, mask_file, scene_name, eval_method,
                                eval_preset, runtime_ms, metrics_out);
        if (dec->parsed())
            return run_decay_curve(dc_sigma_i, dc_sigma_p, dc_onset, dc_freq, dc_min, dc_max,
                                   dc_steps, dc_out);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    }
}
