#include "pitof/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pitof/errors.hpp"
#include "pitof/parallel.hpp"
#include "pitof/scattering.hpp"
#include "pitof/solvers.hpp"

namespace pitof {

namespace {

constexpr double kAlphaClamp = 1e-6;

double median_of(std::vector<double>& values) {
    if (values.empty()) throw NumericError("median of empty set");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double m = values[mid];
    if (values.size() % 2 == 0) {
        const auto lower = std::max_element(values.begin(), values.begin() + mid);
        m = 0.5 * (m + *lower);
    }
    return m;
}

TapSet ambient_corrected(const TapSet& taps, const std::optional<Plane<double>>& ambient,
                         std::size_t i) {
    if (!ambient) return taps;
    return subtract_ambient(taps, (*ambient)[i]).taps;
}

} // namespace

void CalibrationParams::validate() const {
    if (!(k0 > 0.0 && k0 <= 1.0)) throw ConfigError("calibration: k0 must be in (0, 1]");
    if (!(phi0 > 0.0)) throw ConfigError("calibration: phi0 must be > 0");
    if (!(mod_freq > 0.0)) throw ConfigError("calibration: mod_freq must be > 0");
    for (std::size_t i = 0; i < alpha.size(); ++i)
        if (!(alpha[i] > 0.0 && alpha[i] < 1.0))
            throw ConfigError("calibration: alpha outside (0, 1)");
}

double calibrate_k0(const CaptureStack& reference) {
    reference.validate();
    std::vector<double> ratios;
    ratios.reserve(reference.cross.size());
    for (std::size_t i = 0; i < reference.cross.size(); ++i) {
        const TapSet taps = ambient_corrected(reference.cross[i], reference.ambient_cross, i);
        const Phasor p = decode_taps(taps);
        if (p.degenerate || !(p.offset > 0.0) || !(p.amplitude > 0.0)) continue;
        ratios.push_back(p.amplitude / p.offset);
    }
    if (ratios.empty())
        throw NumericError("calibrate_k0: no valid pixels (all degenerate)");
    return median_of(ratios);
}

AlphaCalibration calibrate_alpha(const CaptureStack& empty_fog, double phi0, int threads) {
    empty_fog.validate();
    if (!(phi0 > 0.0)) throw ConfigError("calibrate_alpha: phi0 must be > 0");

    const std::size_t count = empty_fog.cross.size();
    const int w = empty_fog.width;
    const int h = empty_fog.height;

    AlphaCalibration out;
    out.alpha = Plane<double>(w, h, 0.0);
    out.recovered = MaskPlane(w, h, 0);

    const double sigma_lo = 1e-3 / phi0;
    const double sigma_hi = 1e3 / phi0;

    parallel_for(count, threads, [&](std::size_t lo_i, std::size_t hi_i) {
        for (std::size_t i = lo_i; i < hi_i; ++i) {
            const TapSet par = ambient_corrected(empty_fog.parallel[i], empty_fog.ambient_parallel, i);
            const TapSet cro = ambient_corrected(empty_fog.cross[i], empty_fog.ambient_cross, i);

            const Phasor pdi = decode_taps(tap_subtract(par, cro));
            const Phasor cross_ph = decode_taps(cro);
            if (pdi.degenerate || cross_ph.degenerate || pdi.amplitude <= 0.0 ||
                cross_ph.amplitude <= 0.0)
                continue;

            double phase_p = pdi.phase;
            double phase_u = cross_ph.phase;
            if (empty_fog.camera.illum_phase_offset) {
                const double off = (*empty_fog.camera.illum_phase_offset)[i];
                phase_p = wrap_phase(phase_p - off);
                phase_u = wrap_phase(phase_u - off);
            }
            if (phase_p <= phi0 || phase_u <= phi0) continue;

            // Stage 1: total decay rate from the polarized mean phase.
            const RootResult sig = bisect_monotone(
                [phi0](double s) { return mean_phase_polarized(s, phi0).value; }, phase_p,
                sigma_lo, sigma_hi, 1e-10 * sigma_lo + 1e-12, 260);
            if (!sig.converged) continue;
            const double sigma = sig.x;

            // Stage 2: intensity decay rate from the unpolarized mean phase,
            // holding sigma fixed. Monotone decreasing in sigma_i.
            const double si_lo = sigma * kAlphaClamp;
            const double si_hi = sigma * (1.0 - kAlphaClamp);
            const RootResult si = bisect_monotone(
                [sigma, phi0](double s_i) {
                    return mean_phase_unpolarized(FogParams(s_i, sigma - s_i, phi0)).value;
                },
                phase_u, si_lo, si_hi, 1e-9 * sigma, 260);
            if (!si.converged) continue;

            const double alpha =
                std::clamp(si.x / sigma, kAlphaClamp, 1.0 - kAlphaClamp);
            out.alpha[i] = alpha;
            out.recovered[i] = 1;
        }
    });

    // Median infill for pixels the inversion could not solve.
    std::vector<double> valid_values;
    valid_values.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        if (out.recovered[i]) valid_values.push_back(out.alpha[i]);
    if (valid_values.empty())
        throw NumericError("calibrate_alpha: no pixel yielded a valid alpha");
    out.median = median_of(valid_values);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (out.recovered.at(x, y)) continue;
            std::vector<double> neigh;
            for (int r = 2; r <= std::max(w, h) && neigh.empty(); r *= 2) {
                for (int dy = -r; dy <= r; ++dy) {
                    for (int dx = -r; dx <= r; ++dx) {
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        if (out.recovered.at(nx, ny)) neigh.push_back(out.alpha.at(nx, ny));
                    }
                }
            }
            out.alpha.at(x, y) = neigh.empty() ? out.median : median_of(neigh);
        }
    }
    return out;
}

double resolve_phi0(const CameraConfig& config) {
    if (!(config.phi0 > 0.0)) throw ConfigError("resolve_phi0: phi0 missing or non-positive");
    return config.phi0;
}

} // namespace pitof
