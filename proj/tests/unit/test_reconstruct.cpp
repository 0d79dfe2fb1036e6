#include <doctest.h>

#include <cmath>
#include <complex>

#include "pitof/errors.hpp"
#include "pitof/metrics.hpp"
#include "pitof/presets.hpp"
#include "pitof/reconstruct.hpp"
#include "pitof/simulate.hpp"

using namespace pitof;

namespace {

CalibrationParams exact_calibration(const CameraConfig& cam, const SceneSpec& scene) {
    CalibrationParams calib;
    calib.k0 = cam.k0;
    calib.phi0 = cam.phi0;
    calib.mod_freq = cam.mod_freq;
    const double alpha = scene.fog ? scene.fog->alpha() : 0.5;
    calib.alpha = Plane<double>(cam.width, cam.height, alpha);
    calib.alpha_median = alpha;
    return calib;
}

} // namespace

TEST_CASE("pdi_backscatter extracts the polarized component") {
    CameraConfig cam = default_camera(12, 9);
    SceneSpec scene = preset_scene("medium", cam);
    auto [stack, gt] = synthesize_capture(scene, cam, NoiseSpec{});

    SUBCASE("matches ground truth on a noise-free stack") {
        const PdiResult pdi = pdi_backscatter(stack);
        for (std::size_t i = 0; i < pdi.phasor.size(); ++i) {
            CHECK(pdi.valid[i] == 1);
            CHECK(pdi.phasor[i].amplitude ==
                  doctest::Approx(gt.backscatter_p[i].amplitude).epsilon(1e-9));
            CHECK(pdi.phasor[i].phase ==
                  doctest::Approx(gt.backscatter_p[i].phase).epsilon(1e-9));
        }
    }

    SUBCASE("fog-free stack masks every pixel") {
        SceneSpec clear = preset_scene("none", cam);
        auto [clear_stack, clear_gt] = synthesize_capture(clear, cam, NoiseSpec{});
        const PdiResult pdi = pdi_backscatter(clear_stack);
        for (std::size_t i = 0; i < pdi.valid.size(); ++i) CHECK(pdi.valid[i] == 0);
    }

    SUBCASE("ambient cancels in the difference") {
        SceneSpec lit = scene;
        lit.ambient = Plane<double>(cam.width, cam.height, 2.5);
        auto [lit_stack, lit_gt] = synthesize_capture(lit, cam, NoiseSpec{});
        const PdiResult a = pdi_backscatter(stack);
        const PdiResult b = pdi_backscatter(lit_stack);
        for (std::size_t i = 0; i < a.phasor.size(); ++i) {
            CHECK(a.phasor[i].amplitude == doctest::Approx(b.phasor[i].amplitude).epsilon(1e-9));
            CHECK(a.phasor[i].phase == doctest::Approx(b.phasor[i].phase).epsilon(1e-9));
        }
    }
}

TEST_CASE("fit_sigma recovers the decay rate") {
    const double phi0 = 0.3;
    const int w = 8, h = 6;

    SUBCASE("exact forward phase, both optimizers, cross-checked") {
        const double truth = 1.5;
        Plane<double> phase(w, h, mean_phase_polarized(truth, phi0).value);
        MaskPlane valid(w, h, 1);

        FitConfig adam;
        adam.optimizer = Optimizer::adam;
        const SigmaFit fa = fit_sigma(phase, valid, phi0, adam);

        FitConfig bis;
        bis.optimizer = Optimizer::bisection;
        const SigmaFit fb = fit_sigma(phase, valid, phi0, bis);

        CHECK(fa.sigma_global == doctest::Approx(truth).epsilon(1e-4));
        CHECK(fb.sigma_global == doctest::Approx(truth).epsilon(1e-4));
        CHECK(std::fabs(fa.sigma_global - fb.sigma_global) < 1e-5);
    }

    SUBCASE("median aggregation over mixed per-pixel values") {
        Plane<double> phase(3, 1, 0.0);
        phase[0] = mean_phase_polarized(1.0, phi0).value;
        phase[1] = mean_phase_polarized(2.0, phi0).value;
        phase[2] = mean_phase_polarized(100.0, phi0).value;
        MaskPlane valid(3, 1, 1);
        FitConfig cfg;
        cfg.optimizer = Optimizer::bisection;
        const SigmaFit f = fit_sigma(phase, valid, phi0, cfg, 0.0);
        CHECK(f.sigma_global == doctest::Approx(2.0).epsilon(1e-6));
    }

    SUBCASE("phase at or below phi0 is masked") {
        Plane<double> phase(w, h, mean_phase_polarized(2.0, phi0).value);
        phase[3] = phi0 * 0.5;
        phase[4] = phi0;
        MaskPlane valid(w, h, 1);
        FitConfig cfg;
        const SigmaFit f = fit_sigma(phase, valid, phi0, cfg);
        CHECK(f.valid[3] == 0);
        CHECK(f.valid[4] == 0);
        CHECK(f.valid[0] == 1);
    }

    SUBCASE("all pixels unfittable raises a pipeline error") {
        Plane<double> phase(w, h, 0.01); // below phi0
        MaskPlane valid(w, h, 1);
        FitConfig cfg;
        CHECK_THROWS_AS(fit_sigma(phase, valid, phi0, cfg), NumericError);
    }
}

TEST_CASE("predict_unpolarized_phase") {
    const double phi0 = 0.2;
    Plane<double> alpha(6, 4, 0.6);
    MaskPlane valid(6, 4, 1);
    const Plane<double> out = predict_unpolarized_phase(2.0, alpha, phi0, valid);
    const double expect = mean_phase_unpolarized(FogParams(1.2, 0.8, phi0)).value;
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(valid[i] == 1);
        CHECK(out[i] == doctest::Approx(expect).epsilon(1e-12));
    }

    // alpha -> 1 leaves no unpolarized component: masked, not thrown
    alpha[5] = 1.0;
    MaskPlane valid2(6, 4, 1);
    predict_unpolarized_phase(2.0, alpha, phi0, valid2);
    CHECK(valid2[5] == 0);
    CHECK(valid2[0] == 1);
}

TEST_CASE("solve_amplitude branches and residuals") {
    const double k0 = 0.71;

    SUBCASE("fog-free pixel yields the zero root") {
        Plane<Phasor> cross(1, 1);
        cross[0] = Phasor{0.71, 1.0, 1.0}; // a = k0 * s exactly
        Plane<double> phase_u(1, 1, 0.9);
        Plane<double> kr(1, 1, 0.5);
        MaskPlane valid(1, 1, 1);
        const AmplitudeSolve s = solve_amplitude(cross, phase_u, kr, k0, valid);
        CHECK(valid[0] == 1);
        CHECK(s.amp_u[0] == doctest::Approx(0.0));
        CHECK(s.alt_branch[0] == 0);
    }

    SUBCASE("model-consistent pixel recovers the exact amplitude with tiny residual") {
        // compose a cross phasor from target + half unpolarized backscatter
        const FogParams fog(0.6, 0.4, 0.16755);
        const QuadratureSpec quad = QuadratureSpec::for_decay(fog.phi0(), fog.sigma_i());
        const PhasorIntegral z =
            backscatter_phasor_integral(Polarization::unpolarized, fog, quad);
        const double phase_su = mean_phase_unpolarized(fog).value;
        const double amp_su = 0.5 * std::abs(z.vec);
        const double off_su = 0.5 * z.mass / k0;
        const double k_true = k0 * std::abs(z.vec) / z.mass;

        const double amp_t = 0.5 * 0.02;
        const double phase_t = 3.1;
        const double off_t = amp_t / k0;

        const std::complex<double> c =
            std::polar(amp_t, phase_t) + std::polar(amp_su, phase_su);
        Plane<Phasor> cross(1, 1);
        cross[0] = Phasor{std::abs(c), wrap_phase(std::arg(c)), off_t + off_su};
        Plane<double> phase_u(1, 1, phase_su);
        Plane<double> kr(1, 1, k_true);
        MaskPlane valid(1, 1, 1);
        const AmplitudeSolve s = solve_amplitude(cross, phase_u, kr, k0, valid);
        CHECK(valid[0] == 1);
        CHECK(s.amp_u[0] == doctest::Approx(amp_su).epsilon(1e-2));
        CHECK(s.residual[0] < 1e-9);
    }

    SUBCASE("impossible geometry masks the pixel") {
        Plane<Phasor> cross(1, 1);
        cross[0] = Phasor{5.0, 1.0, 1.0}; // amplitude far above k0*s
        Plane<double> phase_u(1, 1, 4.5); // far away in angle
        Plane<double> kr(1, 1, 0.3);
        MaskPlane valid(1, 1, 1);
        solve_amplitude(cross, phase_u, kr, k0, valid);
        CHECK(valid[0] == 0);
    }
}

TEST_CASE("remove_scattering geometry") {
    Plane<Phasor> cross(3, 1);
    cross[0] = Phasor{1.0, 1.2, 2.0};
    cross[1] = Phasor{1.0, 1.2, 2.0};
    cross[2] = Phasor{1.0, 1.2, 2.0};
    Plane<double> phase_u(3, 1, 0.0);
    Plane<double> amp_u(3, 1, 0.0);
    MaskPlane valid(3, 1, 1);

    // amp 0: identity
    phase_u[0] = 0.7;
    auto [amp_a, phase_a] = remove_scattering(cross, phase_u, amp_u, valid);
    CHECK(amp_a[0] == doctest::Approx(1.0));
    CHECK(phase_a[0] == doctest::Approx(1.2));

    // collinear subtraction: phase unchanged, amplitude reduced
    phase_u[1] = 1.2;
    amp_u[1] = 0.4;
    MaskPlane valid_b(3, 1, 1);
    auto [amp_b, phase_b] = remove_scattering(cross, phase_u, amp_u, valid_b);
    CHECK(amp_b[1] == doctest::Approx(0.6));
    CHECK(phase_b[1] == doctest::Approx(1.2));

    // exact known subtraction
    const std::complex<double> target = std::polar(0.3, 2.9);
    const std::complex<double> fogvec = std::polar(0.5, 0.4);
    const std::complex<double> meas = target + fogvec;
    Plane<Phasor> cross2(1, 1);
    cross2[0] = Phasor{std::abs(meas), wrap_phase(std::arg(meas)), 1.0};
    Plane<double> pu(1, 1, 0.4);
    Plane<double> au(1, 1, 0.5);
    MaskPlane v2(1, 1, 1);
    auto [amp_c, phase_c] = remove_scattering(cross2, pu, au, v2);
    CHECK(amp_c[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(phase_c[0] == doctest::Approx(2.9).epsilon(1e-12));
}

TEST_CASE("reconstruct_depth end to end on model-consistent fog") {
    CameraConfig cam = default_camera(24, 16);
    SceneSpec scene = preset_scene("medium", cam);
    auto [stack, gt] = synthesize_capture(scene, cam, NoiseSpec{});
    const CalibrationParams calib = exact_calibration(cam, scene);

    ReconstructOptions opt;
    auto [depth, est] = reconstruct_depth(stack, calib, opt);
    CHECK(est.fog_detected);
    CHECK(est.sigma_global == doctest::Approx(scene.fog->sigma_total()).epsilon(1e-6));

    const DepthMetrics m = evaluate_depth(depth.depth, gt.depth, &depth.valid);
    CHECK(m.valid_fraction > 0.95);
    CHECK(m.rmse_cm < 0.1);

    SUBCASE("per-pixel phase error under 1e-3 rad") {
        for (std::size_t i = 0; i < depth.depth.size(); ++i) {
            if (!depth.valid[i]) continue;
            const double true_phase = depth_to_phase(gt.depth[i], cam);
            CHECK(std::fabs(depth.phase[i] - true_phase) < 1e-3);
        }
    }

    SUBCASE("quadratic closure residuals stay below 1e-9") {
        for (std::size_t i = 0; i < est.residual.size(); ++i)
            if (est.valid[i]) CHECK(est.residual[i] < 1e-9);
    }

    SUBCASE("scale invariance: a global tap rescale moves nothing but amplitudes") {
        CaptureStack scaled = stack;
        for (auto* plane : {&scaled.parallel, &scaled.cross})
            for (std::size_t i = 0; i < plane->size(); ++i)
                for (double* v : {&(*plane)[i].i0, &(*plane)[i].i45, &(*plane)[i].i90,
                                  &(*plane)[i].i135})
                    *v *= 7.0;
        auto [depth2, est2] = reconstruct_depth(scaled, calib, opt);
        CHECK(est2.sigma_global == doctest::Approx(est.sigma_global).epsilon(1e-9));
        for (std::size_t i = 0; i < depth.depth.size(); ++i) {
            if (!depth.valid[i] || !depth2.valid[i]) continue;
            CHECK(depth2.depth[i] == doctest::Approx(depth.depth[i]).epsilon(1e-9));
            CHECK(depth2.amplitude[i] == doctest::Approx(7.0 * depth.amplitude[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("reconstruct_depth with an illumination phase-offset plane") {
    CameraConfig cam = default_camera(16, 12);
    Plane<double> offset(16, 12, 0.0);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 16; ++x)
            offset.at(x, y) = 0.12 * x / 15.0; // source left of the sensor
    cam.illum_phase_offset = offset;

    SceneSpec scene = preset_scene("medium", cam);
    auto [stack, gt] = synthesize_capture(scene, cam, NoiseSpec{});
    const CalibrationParams calib = exact_calibration(cam, scene);

    auto [depth, est] = reconstruct_depth(stack, calib, ReconstructOptions{});
    const DepthMetrics m = evaluate_depth(depth.depth, gt.depth, &depth.valid);
    CHECK(m.valid_fraction > 0.95);
    CHECK(m.rmse_cm < 0.1);
}

TEST_CASE("ablation flags: per-pixel sigma and collapsed alpha") {
    CameraConfig cam = default_camera(12, 9);
    SceneSpec scene = preset_scene("medium", cam);
    auto [stack, gt] = synthesize_capture(scene, cam, NoiseSpec{});
    const CalibrationParams calib = exact_calibration(cam, scene);

    ReconstructOptions per_pixel;
    per_pixel.per_pixel_sigma = true;
    auto [d1, e1] = reconstruct_depth(stack, calib, per_pixel);

    ReconstructOptions collapsed;
    collapsed.global_alpha = true;
    auto [d2, e2] = reconstruct_depth(stack, calib, collapsed);

    // uniform fog: both ablations coincide with the default result
    auto [d0, e0] = reconstruct_depth(stack, calib, ReconstructOptions{});
    for (std::size_t i = 0; i < d0.depth.size(); ++i) {
        if (!d0.valid[i]) continue;
        CHECK(d1.depth[i] == doctest::Approx(d0.depth[i]).epsilon(1e-7));
        CHECK(d2.depth[i] == doctest::Approx(d0.depth[i]).epsilon(1e-12));
    }
}

TEST_CASE("reconstruct_depth on a zero-fog capture equals the cross baseline") {
    CameraConfig cam = default_camera(16, 12);
    SceneSpec scene = preset_scene("none", cam);
    auto [stack, gt] = synthesize_capture(scene, cam, NoiseSpec{});

    CalibrationParams calib = exact_calibration(cam, scene);
    ReconstructOptions opt;
    auto [depth, est] = reconstruct_depth(stack, calib, opt);
    CHECK_FALSE(est.fog_detected);

    const DepthMap base = baseline_depth(stack, BaselineChannel::cross, opt);
    for (std::size_t i = 0; i < depth.depth.size(); ++i) {
        CHECK(depth.valid[i] == base.valid[i]);
        if (depth.valid[i]) CHECK(depth.depth[i] == doctest::Approx(base.depth[i]).epsilon(1e-12));
    }
}

TEST_CASE("baseline_depth behaviors") {
    CameraConfig cam = default_camera(16, 12);

    SUBCASE("fog-free: all baselines agree with ground truth") {
        SceneSpec scene = preset_scene("none", cam);
        auto [stack, gt] = synthesize_capture(scene, cam, NoiseSpec{});
        for (BaselineChannel ch : {BaselineChannel::cross, BaselineChannel::parallel}) {
            const DepthMap d = baseline_depth(stack, ch);
            const DepthMetrics m = evaluate_depth(d.depth, gt.depth, &d.valid);
            CHECK(m.valid_fraction > 0.99);
            CHECK(m.rmse_cm < 1e-6);
        }
    }

    SUBCASE("thick fog pulls the cross baseline shallow") {
        // targets beyond the fog's center of mass, where the bias is toward it
        SceneSpec scene = preset_scene("thick", cam);
        scene.depth = staircase_depth(cam.width, cam.height, 0.55, 1.1, 6);
        auto [stack, gt] = synthesize_capture(scene, cam, NoiseSpec{});
        const DepthMap d = baseline_depth(stack, BaselineChannel::cross);
        std::size_t shallow = 0, valid = 0;
        for (std::size_t i = 0; i < d.depth.size(); ++i) {
            if (!d.valid[i]) continue;
            ++valid;
            if (d.depth[i] < gt.depth[i]) ++shallow;
        }
        CHECK(valid > 0);
        CHECK(shallow == valid); // every pixel biased toward the fog
    }

    SUBCASE("pdi baseline on empty fog reports the fog body itself") {
        SceneSpec scene = preset_scene("medium", cam, /*empty=*/true);
        auto [stack, gt] = synthesize_capture(scene, cam, NoiseSpec{});
        const DepthMap d = baseline_depth(stack, BaselineChannel::pdi);
        const double fog_phase = mean_phase_polarized(scene.fog->sigma_total(), cam.phi0).value;
        const double fog_depth = phase_to_depth(fog_phase, cam);
        for (std::size_t i = 0; i < d.depth.size(); ++i) {
            if (!d.valid[i]) continue;
            CHECK(d.depth[i] == doctest::Approx(fog_depth).epsilon(1e-9));
        }
    }
}
