#include "pitof/simulate.hpp"

#include <cmath>
#include <complex>

#include "pitof/errors.hpp"
#include "pitof/parallel.hpp"

namespace pitof {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
    return (splitmix64(state) >> 11) * 0x1.0p-53;
}

// Deterministic per-pixel gaussian stream (Box-Muller, first deviate kept).
struct PixelRng {
    std::uint64_t state;
    bool have_spare = false;
    double spare = 0.0;

    explicit PixelRng(std::uint64_t key) : state(key) {
        // burn-in decorrelates nearby keys
        splitmix64(state);
    }

    double gaussian() {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        double u1 = uniform01(state);
        while (u1 <= 0.0) u1 = uniform01(state);
        const double u2 = uniform01(state);
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare = r * std::sin(kTwoPi * u2);
        have_spare = true;
        return r * std::cos(kTwoPi * u2);
    }
};

std::uint64_t pixel_key(std::uint64_t seed, std::uint64_t channel, std::uint64_t index) {
    std::uint64_t s = seed ^ (0xd1342543de82ef95ULL * (channel + 1));
    s ^= 0xaf251af3b0f025b5ULL * (index + 1);
    return s;
}

Phasor scale_phasor(const Phasor& p, double factor) {
    Phasor out = p;
    out.amplitude *= factor;
    out.offset *= factor;
    return out;
}

Phasor combine(std::initializer_list<Phasor> parts) {
    std::complex<double> vec{0.0, 0.0};
    double offset = 0.0;
    for (const Phasor& p : parts) {
        vec += std::polar(p.amplitude, p.phase);
        offset += p.offset;
    }
    return phasor_from_complex(vec, offset);
}

} // namespace

void SceneSpec::validate(const CameraConfig& cam) const {
    cam.validate();
    if (depth.width() != cam.width || depth.height() != cam.height)
        throw ConfigError("scene: depth plane does not match camera dimensions");
    if (!reflectance.same_shape(depth))
        throw ConfigError("scene: reflectance plane does not match depth plane");
    if (ambient && !ambient->same_shape(depth))
        throw ConfigError("scene: ambient plane does not match depth plane");
    const double range = cam.unambiguous_range();
    for (std::size_t i = 0; i < depth.size(); ++i) {
        if (!(depth[i] > 0.0) || !(depth[i] < range))
            throw ConfigError("scene: depth outside the single-period range");
        if (!(reflectance[i] >= 0.0) || !(reflectance[i] <= 1.0))
            throw ConfigError("scene: reflectance outside [0, 1]");
        if (ambient && !((*ambient)[i] >= 0.0))
            throw ConfigError("scene: negative ambient");
    }
    if (fog && !(fog->phi0() > 0.0)) throw ConfigError("scene: fog phi0 must be > 0");
}

void CaptureStack::validate() const {
    if (width <= 0 || height <= 0) throw ConfigError("capture: empty dimensions");
    if (parallel.width() != width || parallel.height() != height ||
        !cross.same_shape(parallel))
        throw ConfigError("capture: tap planes disagree on dimensions");
    if (ambient_parallel && (ambient_parallel->width() != width ||
                             ambient_parallel->height() != height))
        throw ConfigError("capture: ambient plane dimensions mismatch");
    if (ambient_cross && (ambient_cross->width() != width || ambient_cross->height() != height))
        throw ConfigError("capture: ambient plane dimensions mismatch");
}

Plane<Phasor> simulate_target(const SceneSpec& scene, const CameraConfig& cam) {
    scene.validate(cam);
    const double sigma_i = scene.fog ? scene.fog->sigma_i() : 0.0;
    Plane<Phasor> out(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const double z = scene.depth.at(x, y);
            double phi = depth_to_phase(z, cam);
            if (cam.illum_phase_offset) phi += cam.illum_phase_offset->at(x, y);
            Phasor p;
            p.amplitude = scene.reflectance.at(x, y) * std::exp(-sigma_i * phi) / (phi * phi);
            p.phase = wrap_phase(phi);
            p.offset = p.amplitude / cam.k0;
            p.degenerate = p.amplitude == 0.0;
            out.at(x, y) = p;
        }
    }
    return out;
}

std::pair<Plane<Phasor>, Plane<Phasor>> simulate_backscatter(const SceneSpec& scene,
                                                             const CameraConfig& cam,
                                                             const SimOptions& opt) {
    scene.validate(cam);
    Plane<Phasor> pol(cam.width, cam.height);
    Plane<Phasor> unpol(cam.width, cam.height);
    if (!scene.fog) return {pol, unpol};

    const FogParams fog = *scene.fog;
    const QuadratureSpec quad = QuadratureSpec::for_decay(fog.phi0(), fog.sigma_i());

    auto make_phasor = [&](Polarization which, double upper) {
        Phasor p;
        if (which == Polarization::unpolarized && fog.sigma_p() == 0.0) {
            p.degenerate = true;
            return p; // fully polarization-preserving medium
        }
        const PhasorIntegral z = backscatter_phasor_integral(which, fog, quad, upper);
        p.amplitude = std::abs(z.vec);
        p.offset = z.mass / cam.k0;
        if (opt.phase == BackscatterPhase::analytic) {
            p.phase = which == Polarization::polarized
                          ? mean_phase_polarized(fog.sigma_total(), fog.phi0()).value
                          : mean_phase_unpolarized(fog).value;
        } else {
            p.phase = wrap_phase(std::arg(z.vec));
        }
        p.degenerate = p.amplitude == 0.0;
        return p;
    };

    if (opt.integration == IntegrationMode::infinite) {
        // Fog is homogeneous: one integral serves every pixel.
        const Phasor p = make_phasor(Polarization::polarized, 0.0);
        const Phasor u = make_phasor(Polarization::unpolarized, 0.0);
        for (std::size_t i = 0; i < pol.size(); ++i) {
            pol[i] = p;
            unpol[i] = u;
        }
        return {pol, unpol};
    }

    // Truncated mode: backscatter only exists up to the target, so the
    // integration limit is per pixel.
    parallel_for(pol.size(), opt.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double phi_t = depth_to_phase(scene.depth[i], cam);
            const double upper = std::max(phi_t, fog.phi0() * (1.0 + 1e-9));
            pol[i] = make_phasor(Polarization::polarized, upper);
            unpol[i] = make_phasor(Polarization::unpolarized, upper);
        }
    });
    return {pol, unpol};
}

std::pair<CaptureStack, GroundTruth> synthesize_capture(const SceneSpec& scene,
                                                        const CameraConfig& cam,
                                                        const NoiseSpec& noise,
                                                        const SimOptions& opt) {
    scene.validate(cam);
    if (!(opt.polarized_target_fraction >= 0.0) || !(opt.polarized_target_fraction < 1.0))
        throw ConfigError("synthesize_capture: polarized target fraction must be in [0, 1)");

    GroundTruth gt;
    gt.depth = scene.depth;
    gt.fog = scene.fog;
    gt.target_u = simulate_target(scene, cam);
    auto [bp, bu] = simulate_backscatter(scene, cam, opt);
    gt.backscatter_p = std::move(bp);
    gt.backscatter_u = std::move(bu);

    // Backscatter phases ride on the same illumination geometry as the target.
    if (cam.illum_phase_offset) {
        for (int y = 0; y < cam.height; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                const double off = cam.illum_phase_offset->at(x, y);
                gt.backscatter_p.at(x, y).phase = wrap_phase(gt.backscatter_p.at(x, y).phase + off);
                gt.backscatter_u.at(x, y).phase = wrap_phase(gt.backscatter_u.at(x, y).phase + off);
            }
        }
    }

    CaptureStack stack;
    stack.width = cam.width;
    stack.height = cam.height;
    stack.camera = cam;
    stack.parallel = Plane<TapSet>(cam.width, cam.height);
    stack.cross = Plane<TapSet>(cam.width, cam.height);
    if (scene.ambient) {
        stack.ambient_parallel = *scene.ambient;
        stack.ambient_cross = *scene.ambient;
    }

    const double tau = opt.polarized_target_fraction;
    const std::size_t count = stack.parallel.size();
    parallel_for(count, opt.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const Phasor target_total = gt.target_u[i];
            const Phasor t_unpol = scale_phasor(target_total, 1.0 - tau);
            const Phasor t_pol = scale_phasor(target_total, tau);
            const Phasor s_pol = gt.backscatter_p[i];
            const Phasor s_unpol = gt.backscatter_u[i];

            // cross: 1/2 Su + 1/2 Tu; parallel: Sp + 1/2 Su + Tp + 1/2 Tu
            const Phasor cross_ph =
                combine({scale_phasor(s_unpol, 0.5), scale_phasor(t_unpol, 0.5)});
            const Phasor par_ph = combine({s_pol, scale_phasor(s_unpol, 0.5), t_pol,
                                           scale_phasor(t_unpol, 0.5)});

            TapSet cross_taps = encode_taps(cross_ph);
            TapSet par_taps = encode_taps(par_ph);

            const double ambient = scene.ambient ? (*scene.ambient)[i] : 0.0;
            for (double* v : {&cross_taps.i0, &cross_taps.i45, &cross_taps.i90, &cross_taps.i135,
                              &par_taps.i0, &par_taps.i45, &par_taps.i90, &par_taps.i135})
                *v += ambient;

            if (noise.mode != NoiseMode::none && noise.scale > 0.0) {
                PixelRng rng_c(pixel_key(noise.seed, 0, i));
                PixelRng rng_p(pixel_key(noise.seed, 1, i));
                auto perturb = [&noise](TapSet& t, PixelRng& rng) {
                    const double level = (t.i0 + t.i45 + t.i90 + t.i135) / 4.0;
                    for (double* v : {&t.i0, &t.i45, &t.i90, &t.i135}) {
                        const double sd = noise.mode == NoiseMode::gaussian
                                              ? noise.scale * level
                                              : noise.scale * std::sqrt(std::max(*v, 0.0));
                        *v += sd * rng.gaussian();
                    }
                };
                perturb(cross_taps, rng_c);
                perturb(par_taps, rng_p);
            }

            stack.cross[i] = cross_taps;
            stack.parallel[i] = par_taps;
        }
    });

    return {std::move(stack), std::move(gt)};
}

} // namespace pitof
