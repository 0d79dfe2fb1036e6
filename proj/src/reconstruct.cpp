#include "pitof/reconstruct.hpp"

#include <cmath>
#include <cstring>
#include <complex>
#include <mutex>
#include <unordered_map>

#include "pitof/errors.hpp"
#include "pitof/parallel.hpp"
#include "pitof/scattering.hpp"
#include "pitof/solvers.hpp"
#include "pitof/special.hpp"
#include "pitof/stats.hpp"

namespace pitof {

namespace {

// d/dsigma of the polarized mean-phase model phi0 * E1s(x)/E2s(x), x = sigma*phi0.
double mean_phase_polarized_deriv(double sigma, double phi0) {
    const double x = sigma * phi0;
    const double e1s = exp_integral_e1_scaled(x);
    const double e2s = exp_integral_e2_scaled(x);
    return phi0 * phi0 * (e1s * e1s - e2s / x) / (e2s * e2s);
}

Plane<TapSet> ambient_corrected_plane(const Plane<TapSet>& taps,
                                      const std::optional<Plane<double>>& ambient) {
    if (!ambient) return taps;
    Plane<TapSet> out = taps;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = subtract_ambient(out[i], (*ambient)[i]).taps;
    return out;
}

Plane<Phasor> decode_plane(const Plane<TapSet>& taps, const CameraConfig& cam) {
    Plane<Phasor> out(taps.width(), taps.height());
    for (std::size_t i = 0; i < taps.size(); ++i) {
        Phasor p = decode_taps(taps[i]);
        if (cam.illum_phase_offset && !p.degenerate)
            p.phase = wrap_phase(p.phase - (*cam.illum_phase_offset)[i]);
        out[i] = p;
    }
    return out;
}

double amplitude_noise_floor(const Plane<Phasor>& reference, const ReconstructOptions& opt) {
    std::vector<double> amps;
    amps.reserve(reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) amps.push_back(reference[i].amplitude);
    const double med = amps.empty() ? 0.0 : median_inplace(amps);
    return std::max(opt.noise_floor_abs, opt.noise_floor_rel * med);
}

// Memoized map evaluation keyed on the alpha bit pattern; calibration planes
// carry many repeated values so this collapses most of the quadrature work.
class AlphaCache {
public:
    double get(double alpha, const std::function<double(double)>& eval) {
        std::uint64_t key;
        static_assert(sizeof(key) == sizeof(alpha));
        std::memcpy(&key, &alpha, sizeof(key));
        {
            std::lock_guard lock(mu_);
            auto it = map_.find(key);
            if (it != map_.end()) return it->second;
        }
        const double v = eval(alpha);
        std::lock_guard lock(mu_);
        map_.emplace(key, v);
        return v;
    }

private:
    std::mutex mu_;
    std::unordered_map<std::uint64_t, double> map_;
};

DepthMap depth_from_phasors(const Plane<Phasor>& phasors, const CameraConfig& cam,
                            double floor) {
    DepthMap out;
    const int w = phasors.width();
    const int h = phasors.height();
    out.depth = Plane<double>(w, h, 0.0);
    out.phase = Plane<double>(w, h, 0.0);
    out.amplitude = Plane<double>(w, h, 0.0);
    out.valid = MaskPlane(w, h, 0);
    for (std::size_t i = 0; i < phasors.size(); ++i) {
        const Phasor& p = phasors[i];
        out.phase[i] = p.phase;
        out.amplitude[i] = p.amplitude;
        if (p.degenerate || p.amplitude <= floor || p.phase <= 0.0) continue;
        out.depth[i] = phase_to_depth(p.phase, cam);
        out.valid[i] = 1;
    }
    return out;
}

} // namespace

PdiResult pdi_backscatter(const CaptureStack& stack, const ReconstructOptions& opt) {
    stack.validate();
    const Plane<TapSet> par = ambient_corrected_plane(stack.parallel, stack.ambient_parallel);
    const Plane<TapSet> cro = ambient_corrected_plane(stack.cross, stack.ambient_cross);

    PdiResult out;
    out.phasor = Plane<Phasor>(stack.width, stack.height);
    out.valid = MaskPlane(stack.width, stack.height, 0);

    const Plane<Phasor> cross_ph = decode_plane(cro, stack.camera);
    out.noise_floor = amplitude_noise_floor(cross_ph, opt);

    for (std::size_t i = 0; i < out.phasor.size(); ++i) {
        Phasor p = decode_taps(tap_subtract(par[i], cro[i]));
        if (stack.camera.illum_phase_offset && !p.degenerate)
            p.phase = wrap_phase(p.phase - (*stack.camera.illum_phase_offset)[i]);
        out.phasor[i] = p;
        out.valid[i] = (!p.degenerate && p.amplitude > out.noise_floor) ? 1 : 0;
    }
    return out;
}

SigmaFit fit_sigma(const Plane<double>& phase_p, const MaskPlane& valid, double phi0,
                   const FitConfig& cfg, double min_fraction, int threads) {
    if (!(phi0 > 0.0)) throw ConfigError("fit_sigma: phi0 must be > 0");
    const double lo = cfg.sigma_lo > 0.0 ? cfg.sigma_lo : 1e-3 / phi0;
    const double hi = cfg.sigma_hi > 0.0 ? cfg.sigma_hi : 1e3 / phi0;
    if (!(lo > 0.0 && hi > lo)) throw ConfigError("fit_sigma: bad sigma bounds");

    SigmaFit out;
    out.sigma_map = Plane<double>(phase_p.width(), phase_p.height(), 0.0);
    out.residual = Plane<double>(phase_p.width(), phase_p.height(), 0.0);
    out.valid = MaskPlane(phase_p.width(), phase_p.height(), 0);

    const double phase_max = mean_phase_polarized(lo, phi0).value;
    const double phase_min = mean_phase_polarized(hi, phi0).value;

    parallel_for(phase_p.size(), threads, [&](std::size_t lo_i, std::size_t hi_i) {
        for (std::size_t i = lo_i; i < hi_i; ++i) {
            if (!valid[i]) continue;
            const double target = phase_p[i];
            // The model range is (phi0, f(sigma_lo)); anything outside cannot be fit.
            if (!(target > phase_min && target < phase_max)) continue;

            double sigma;
            if (cfg.optimizer == Optimizer::bisection) {
                const RootResult r = bisect_monotone(
                    [phi0](double s) { return mean_phase_polarized(s, phi0).value; }, target,
                    lo, hi, 1e-12 * lo, 260);
                if (!r.converged) continue;
                sigma = r.x;
            } else {
                // Adam on log(sigma) keeps the rate positive without projection.
                const double guess =
                    std::clamp(1.0 / std::max(target - phi0, 1e-6), lo * 1.001, hi * 0.999);
                AdamConfig ac;
                ac.learning_rate = cfg.learning_rate;
                ac.max_iters = cfg.max_iters;
                ac.tol = cfg.tol;
                const AdamResult r = adam_minimize(
                    [target, phi0](double u) {
                        const double s = std::exp(u);
                        const double diff = mean_phase_polarized(s, phi0).value - target;
                        const double grad =
                            2.0 * diff * mean_phase_polarized_deriv(s, phi0) * s;
                        return std::pair{diff * diff, grad};
                    },
                    std::log(guess), ac);
                if (!r.converged) continue;
                sigma = std::clamp(std::exp(r.x), lo, hi);
            }

            // Newton polish: a few exact steps close out the optimizer budget.
            for (int it = 0; it < 8; ++it) {
                const double diff = mean_phase_polarized(sigma, phi0).value - target;
                const double d = mean_phase_polarized_deriv(sigma, phi0);
                if (d == 0.0) break;
                const double next = std::clamp(sigma - diff / d, lo, hi);
                if (std::fabs(next - sigma) <= 1e-14 * sigma) {
                    sigma = next;
                    break;
                }
                sigma = next;
            }

            const double res = mean_phase_polarized(sigma, phi0).value - target;
            if (!(res * res < std::max(cfg.tol, 1e-10)))
                continue; // did not converge to the model
            out.sigma_map[i] = sigma;
            out.residual[i] = res;
            out.valid[i] = 1;
        }
    });

    std::vector<double> fits;
    fits.reserve(phase_p.size());
    for (std::size_t i = 0; i < out.sigma_map.size(); ++i)
        if (out.valid[i]) fits.push_back(out.sigma_map[i]);
    if (fits.size() < static_cast<std::size_t>(min_fraction * phase_p.size()) ||
        fits.empty())
        throw NumericError("fit_sigma: fewer than the minimum fraction of pixels converged");
    out.sigma_global = median_inplace(fits);
    return out;
}

Plane<double> predict_unpolarized_phase(double sigma_global, const Plane<double>& alpha,
                                        double phi0, MaskPlane& valid) {
    if (!(sigma_global > 0.0)) throw NumericError("predict_unpolarized_phase: sigma <= 0");
    Plane<double> out(alpha.width(), alpha.height(), 0.0);
    AlphaCache cache;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (!valid[i]) continue;
        const double a = alpha[i];
        if (!(a > 0.0) || !(a < 1.0)) {
            valid[i] = 0; // alpha -> 1 leaves no unpolarized component
            continue;
        }
        out[i] = cache.get(a, [sigma_global, phi0](double av) {
            return mean_phase_unpolarized(FogParams(av * sigma_global,
                                                    (1.0 - av) * sigma_global, phi0))
                .value;
        });
    }
    return out;
}

AmplitudeSolve solve_amplitude(const Plane<Phasor>& cross, const Plane<double>& phase_u,
                               const Plane<double>& k_ratio, double k0, MaskPlane& valid,
                               int threads) {
    AmplitudeSolve out;
    out.amp_u = Plane<double>(cross.width(), cross.height(), 0.0);
    out.residual = Plane<double>(cross.width(), cross.height(), 0.0);
    out.alt_branch = MaskPlane(cross.width(), cross.height(), 0);

    parallel_for(cross.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            if (!valid[i]) continue;
            const Phasor& c = cross[i];
            const double kr = k_ratio[i];
            if (!(kr > 0.0) || !(kr <= k0) || !(c.offset > 0.0)) {
                valid[i] = 0;
                continue;
            }
            const double ratio = k0 / kr;
            const double c1 = 1.0 - ratio * ratio;
            const double c2 = c.amplitude * std::cos(c.phase - phase_u[i]) -
                              ratio * k0 * c.offset;
            const double c3 = c.amplitude * c.amplitude - (k0 * c.offset) * (k0 * c.offset);
            const double scale = k0 * c.offset + c.amplitude;

            double roots[2];
            int n_roots = 0;
            if (std::fabs(c1) < 1e-14) {
                if (std::fabs(c2) > 1e-300) {
                    roots[n_roots++] = c3 / (2.0 * c2);
                }
            } else {
                double disc = c2 * c2 - c1 * c3;
                if (disc < 0.0 && disc > -1e-12 * scale * scale) disc = 0.0;
                if (disc >= 0.0) {
                    const double sq = std::sqrt(disc);
                    roots[n_roots++] = (c2 + sq) / c1; // default branch
                    roots[n_roots++] = (c2 - sq) / c1;
                }
            }

            const double tol = 1e-9 * scale;
            const double upper = kr * c.offset; // backscatter offset cannot exceed measured
            int chosen = -1;
            for (int r = 0; r < n_roots; ++r) {
                double a = roots[r];
                if (a < 0.0 && a > -tol) a = 0.0;
                if (a >= 0.0 && a <= upper + tol) {
                    roots[r] = std::min(std::max(a, 0.0), upper);
                    chosen = r;
                    break;
                }
            }
            if (chosen < 0) {
                valid[i] = 0; // both roots infeasible
                continue;
            }

            const double a_hat = roots[chosen];
            const std::complex<double> rec =
                std::polar(c.amplitude, c.phase) - std::polar(a_hat, phase_u[i]);
            const double closure =
                std::fabs(std::abs(rec) + a_hat * ratio - k0 * c.offset) /
                std::max(k0 * c.offset, 1e-300);
            out.amp_u[i] = a_hat;
            out.residual[i] = closure;
            out.alt_branch[i] = chosen == 1 ? 1 : 0;
        }
    });
    return out;
}

std::pair<Plane<double>, Plane<double>> remove_scattering(const Plane<Phasor>& cross,
                                                          const Plane<double>& phase_u,
                                                          const Plane<double>& amp_u,
                                                          MaskPlane& valid,
                                                          double amplitude_floor) {
    Plane<double> amp(cross.width(), cross.height(), 0.0);
    Plane<double> phase(cross.width(), cross.height(), 0.0);
    for (std::size_t i = 0; i < cross.size(); ++i) {
        if (!valid[i]) continue;
        const std::complex<double> rec =
            std::polar(cross[i].amplitude, cross[i].phase) - std::polar(amp_u[i], phase_u[i]);
        amp[i] = std::abs(rec);
        phase[i] = wrap_phase(std::arg(rec));
        if (!(amp[i] > amplitude_floor)) valid[i] = 0; // target below the noise floor
    }
    return {std::move(amp), std::move(phase)};
}

std::pair<DepthMap, BackscatterEstimate> reconstruct_depth(const CaptureStack& stack,
                                                           const CalibrationParams& calib,
                                                           const ReconstructOptions& opt) {
    stack.validate();
    calib.validate();
    const CameraConfig& cam = stack.camera;
    const int w = stack.width;
    const int h = stack.height;

    BackscatterEstimate est;
    est.phase_p = Plane<double>(w, h, 0.0);
    est.sigma_map = Plane<double>(w, h, 0.0);
    est.phase_u = Plane<double>(w, h, 0.0);
    est.amp_u = Plane<double>(w, h, 0.0);
    est.k_ratio = Plane<double>(w, h, 0.0);
    est.residual = Plane<double>(w, h, 0.0);
    est.valid = MaskPlane(w, h, 0);
    est.alt_branch = MaskPlane(w, h, 0);

    const Plane<TapSet> cro = ambient_corrected_plane(stack.cross, stack.ambient_cross);
    const Plane<Phasor> cross_ph = decode_plane(cro, cam);
    const double floor = amplitude_noise_floor(cross_ph, opt);

    const PdiResult pdi = pdi_backscatter(stack, opt);
    for (std::size_t i = 0; i < pdi.phasor.size(); ++i) est.phase_p[i] = pdi.phasor[i].phase;

    std::size_t pdi_valid = 0;
    for (std::size_t i = 0; i < pdi.valid.size(); ++i) pdi_valid += pdi.valid[i];
    est.fog_detected =
        pdi_valid >= static_cast<std::size_t>(opt.min_fog_fraction * pdi.valid.size()) &&
        pdi_valid > 0;

    if (!est.fog_detected) {
        // No measurable polarized backscatter: nothing to remove.
        DepthMap depth = depth_from_phasors(cross_ph, cam, floor);
        est.valid = depth.valid;
        return {std::move(depth), std::move(est)};
    }

    Plane<double> pdi_phase(w, h, 0.0);
    for (std::size_t i = 0; i < pdi_phase.size(); ++i) pdi_phase[i] = pdi.phasor[i].phase;
    SigmaFit fit = fit_sigma(pdi_phase, pdi.valid, calib.phi0, opt.fit, opt.min_fog_fraction,
                             opt.threads);
    est.sigma_map = fit.sigma_map;
    est.sigma_global = fit.sigma_global;
    est.valid = fit.valid;

    // Alpha plane: per-pixel from calibration, optionally collapsed to its median.
    Plane<double> alpha(w, h, calib.alpha_median);
    if (!opt.global_alpha && !calib.alpha.empty()) {
        if (calib.alpha.width() != w || calib.alpha.height() != h)
            throw ConfigError("reconstruct: calibration alpha plane dimensions mismatch");
        alpha = calib.alpha;
    }

    AlphaCache k_cache;
    est.phase_u = Plane<double>(w, h, 0.0);
    {
        AlphaCache phase_cache;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            if (!est.valid[i]) continue;
            const double sigma = opt.per_pixel_sigma ? est.sigma_map[i] : est.sigma_global;
            const double a = alpha[i];
            if (!(a > 0.0) || !(a < 1.0) || !(sigma > 0.0)) {
                est.valid[i] = 0;
                continue;
            }
            if (opt.per_pixel_sigma) {
                est.phase_u[i] =
                    mean_phase_unpolarized(FogParams(a * sigma, (1.0 - a) * sigma, calib.phi0))
                        .value;
                est.k_ratio[i] = k_ratio_unpolarized(
                    FogParams(a * sigma, (1.0 - a) * sigma, calib.phi0), calib.k0,
                    QuadratureSpec::for_decay(calib.phi0, a * sigma));
            } else {
                est.phase_u[i] = phase_cache.get(a, [&](double av) {
                    return mean_phase_unpolarized(
                               FogParams(av * sigma, (1.0 - av) * sigma, calib.phi0))
                        .value;
                });
                est.k_ratio[i] = k_cache.get(a, [&](double av) {
                    return k_ratio_unpolarized(
                        FogParams(av * sigma, (1.0 - av) * sigma, calib.phi0), calib.k0,
                        QuadratureSpec::for_decay(calib.phi0, av * sigma));
                });
            }
        }
    }

    AmplitudeSolve amp = solve_amplitude(cross_ph, est.phase_u, est.k_ratio, calib.k0,
                                         est.valid, opt.threads);
    est.amp_u = amp.amp_u;
    est.residual = amp.residual;
    est.alt_branch = amp.alt_branch;

    auto [target_amp, target_phase] =
        remove_scattering(cross_ph, est.phase_u, est.amp_u, est.valid, floor);

    DepthMap depth;
    depth.depth = Plane<double>(w, h, 0.0);
    depth.phase = target_phase;
    depth.amplitude = target_amp;
    depth.valid = est.valid;
    for (std::size_t i = 0; i < depth.depth.size(); ++i) {
        if (!depth.valid[i]) continue;
        if (!(target_phase[i] > 0.0)) {
            depth.valid[i] = 0;
            continue;
        }
        depth.depth[i] = phase_to_depth(target_phase[i], cam);
    }
    est.valid = depth.valid;
    return {std::move(depth), std::move(est)};
}

DepthMap baseline_depth(const CaptureStack& stack, BaselineChannel which,
                        const ReconstructOptions& opt) {
    stack.validate();
    const Plane<TapSet> par = ambient_corrected_plane(stack.parallel, stack.ambient_parallel);
    const Plane<TapSet> cro = ambient_corrected_plane(stack.cross, stack.ambient_cross);

    Plane<TapSet> chosen(stack.width, stack.height);
    switch (which) {
    case BaselineChannel::parallel: chosen = par; break;
    case BaselineChannel::cross: chosen = cro; break;
    case BaselineChannel::pdi:
        for (std::size_t i = 0; i < chosen.size(); ++i)
            chosen[i] = tap_subtract(par[i], cro[i]);
        break;
    }

    const Plane<Phasor> ph = decode_plane(chosen, stack.camera);
    const double floor = amplitude_noise_floor(ph, opt);
    return depth_from_phasors(ph, stack.camera, floor);
}

} // namespace pitof
