#pragma once

#include "pitof/calibrate.hpp"
#include "pitof/capture.hpp"

namespace pitof {

enum class Optimizer { adam, bisection };

/// Decay-rate fit settings. Adam runs on log(sigma); bisection is the
/// convention-free cross-check exploiting monotonicity of the mean-phase model.
struct FitConfig {
    Optimizer optimizer = Optimizer::adam;
    double learning_rate = 0.05;
    int max_iters = 500;
    double tol = 1e-8; // on the squared phase residual
    double sigma_lo = 0.0; // 0 -> 1e-3 / phi0
    double sigma_hi = 0.0; // 0 -> 1e3 / phi0
};

struct ReconstructOptions {
    FitConfig fit;
    double noise_floor_abs = 0.0;
    double noise_floor_rel = 1e-9; // times the median cross amplitude
    bool global_alpha = false;     // collapse the alpha plane to its median
    bool per_pixel_sigma = false;  // ablation: skip the global sigma median
    double min_fog_fraction = 0.01; // PDI-valid fraction below which the scene counts as clear
    int threads = 1;
};

/// Intermediate fog estimates, mirroring the diagnostic maps of the pipeline.
struct BackscatterEstimate {
    Plane<double> phase_p;  // polarized backscatter mean phase (PDI)
    Plane<double> sigma_map;
    double sigma_global = 0.0;
    Plane<double> phase_u;  // predicted unpolarized backscatter phase
    Plane<double> amp_u;    // recovered unpolarized backscatter amplitude
    Plane<double> k_ratio;
    Plane<double> residual; // relative closure residual of the amplitude equation
    MaskPlane valid;
    MaskPlane alt_branch;   // quadratic solved by the non-default root
    bool fog_detected = true;
};

struct DepthMap {
    Plane<double> depth;     // meters
    Plane<double> phase;     // radians
    Plane<double> amplitude;
    MaskPlane valid;
};

struct PdiResult {
    Plane<Phasor> phasor;
    MaskPlane valid;
    double noise_floor = 0.0;
};

/// Polarized-backscatter phasor via tap-domain subtraction of the two
/// channels. Ambient (when present) is removed first; pixels whose PDI
/// amplitude sits below the noise floor are masked.
PdiResult pdi_backscatter(const CaptureStack& stack, const ReconstructOptions& opt = {});

struct SigmaFit {
    Plane<double> sigma_map;
    Plane<double> residual;
    MaskPlane valid;
    double sigma_global = 0.0;
};

/// Per-pixel decay rate from the polarized mean phase; global value is the
/// median of the valid fits. Throws NumericError when fewer than
/// min_fog_fraction of the pixels fit.
SigmaFit fit_sigma(const Plane<double>& phase_p, const MaskPlane& valid, double phi0,
                   const FitConfig& cfg, double min_fraction = 0.01, int threads = 1);

/// Unpolarized backscatter phase per pixel from the fitted sigma and the
/// calibrated alpha split (sigma_i = alpha*sigma, sigma_p = (1-alpha)*sigma).
Plane<double> predict_unpolarized_phase(double sigma_global, const Plane<double>& alpha,
                                        double phi0, MaskPlane& valid);

struct AmplitudeSolve {
    Plane<double> amp_u;
    Plane<double> residual;
    MaskPlane alt_branch;
};

/// Closed-form quadratic for the unpolarized backscatter amplitude. Both roots
/// are checked for feasibility (amp >= 0 and implied target offset >= 0); the
/// default branch wins ties, the alternate root is flagged when used.
/// Infeasible pixels are masked.
AmplitudeSolve solve_amplitude(const Plane<Phasor>& cross, const Plane<double>& phase_u,
                               const Plane<double>& k_ratio, double k0, MaskPlane& valid,
                               int threads = 1);

/// Complex subtraction of the estimated backscatter phasor from the cross
/// measurement; returns target amplitude and phase planes.
std::pair<Plane<double>, Plane<double>> remove_scattering(const Plane<Phasor>& cross,
                                                          const Plane<double>& phase_u,
                                                          const Plane<double>& amp_u,
                                                          MaskPlane& valid,
                                                          double amplitude_floor = 0.0);

/// Full pipeline: ambient removal, PDI, decay fit, unpolarized phase and
/// amplitude estimation, phasor subtraction, depth conversion.
std::pair<DepthMap, BackscatterEstimate> reconstruct_depth(const CaptureStack& stack,
                                                           const CalibrationParams& calib,
                                                           const ReconstructOptions& opt = {});

enum class BaselineChannel { parallel, cross, pdi };

/// Single-channel conventional reconstruction: decode, phase, depth.
DepthMap baseline_depth(const CaptureStack& stack, BaselineChannel which,
                        const ReconstructOptions& opt = {});

} // namespace pitof
