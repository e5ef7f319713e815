#pragma once

#include <string>
#include <vector>

#include "sqglab/dynamics.hpp"
#include "sqglab/littlewood_paley.hpp"

namespace sqglab {

/// Feedback parameters (mu, m, sigma, p) plus the configurable absolute
/// constants of hypotheses (H6)/(H7), all defaulting to 1.
struct NudgeParams {
    double mu = 0.0;
    int m = 0;
    double sigma = 1.0;
    double p = 8.0;
    double c0 = 1.0;    // (H6)
    double c0p = 1.0;   // (H7), first part
    double c0pp = 1.0;  // (H7), second part
};

struct HypothesisCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // lhs / rhs (>= 1 means satisfied), or structural slack
    bool ok = false;
};

struct AdmissibilityReport {
    std::vector<HypothesisCheck> checks;
    bool thresholds_ok = true;  // (H6)/(H7); structural violations throw instead
    double mu_threshold = 0.0;  // RHS of (H6)
    double m_threshold = 0.0;   // smallest integer m satisfying (H7)
};

/// (H1)-(H3) violations are hard errors; (H6)/(H7) are reported soft.
/// g_lp feeds (H6); g_sigma_inf (optional, <= 0 to skip) feeds the second
/// part of (H7) via the decay factor 2^{m(1-2/p-sigma)} G_{sigma,inf} <= c0'' G_{Lp}.
AdmissibilityReport check_hypotheses(const SqgParams& sqg, const NudgeParams& nudge,
                                     double g_lp, double g_sigma_inf = 0.0);

/// One step of the companion equation
///   d w/ds + kappa L^gamma w + u.grad w = f - mu S_m (w - v),
/// with the full linear symbol (including mu s_m(k)) treated exactly.
/// The data is sampled at the three stage times s, s+dt/2, s+dt.
SpectralField nudged_step(const SpectralField& state, const SpectralField& v_lo,
                          const SpectralField& v_mid, const SpectralField& v_hi,
                          const SqgParams& sqg, const NudgeParams& nudge,
                          const LPBlockSet& blocks, const StepperConfig& cfg, double t = 0.0);

/// Convenience overload holding the data fixed across the step.
SpectralField nudged_step(const SpectralField& state, const SpectralField& v_at_s,
                          const SqgParams& sqg, const NudgeParams& nudge,
                          const LPBlockSet& blocks, const StepperConfig& cfg, double t = 0.0);

enum class FeedbackOperator { LpLowpass, SharpProjection, DirectInsertion };

std::string to_string(FeedbackOperator op);

struct SyncRow {
    double s = 0.0;
    double err_l2proxy = 0.0;
    double err_hsigma = 0.0;
    double err_hminushalf = 0.0;
    double inserted_energy = 0.0;
};

struct RateFit {
    double rate = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
    bool windowed = false;  // true if fit over the [1e-9,1e-2]*initial window
};

struct SyncRecord {
    std::vector<SyncRow> rows;
    RateFit fit;
    double initial_error = 0.0;
    double terminal_error = 0.0;
    bool synchronized = false;
    FeedbackOperator op = FeedbackOperator::LpLowpass;
    double cutoff = 0.0;  // sharp/insertion wavenumber cutoff
    Trajectory w_samples;      // companion snapshots
    Trajectory theta_samples;  // lockstep reference snapshots (same cadence)
};

struct SyncOptions {
    double t_span = 0.0;            // <= 0: full reference span
    double sync_threshold = 1e-6;   // terminal < threshold * initial
    double fit_lo = 1e-9, fit_hi = 1e-2;
    int sample_every = 1;           // row cadence in steps
    int store_every = 0;            // w snapshot cadence in rows (0: ref cadence)
    double store_span = 0.0;        // store w/theta snapshots only for s <= this (0: all)
};

/// Twin experiment: the reference is re-integrated in lockstep from its first
/// sample with the same stepper, and the companion w sees v = S_{m-1} theta at
/// the RK4 stage values of the reference. Errors are recorded against the
/// lockstep reference.
SyncRecord synchronize_experiment(const SqgParams& sqg, const NudgeParams& nudge,
                                  const LPBlockSet& blocks, const StepperConfig& cfg,
                                  const Trajectory& ref, const SpectralField& w0,
                                  const SyncOptions& opt = {});

/// Same twin layout with the sharp projection P_h both as data and feedback.
SyncRecord sharp_nudging_experiment(const SqgParams& sqg, double mu, double cutoff,
                                    double sigma, const LPBlockSet& blocks,
                                    const StepperConfig& cfg, const Trajectory& ref,
                                    const SpectralField& w0, const SyncOptions& opt = {});

/// Direct-insertion determining-modes twin: w evolves freely but P_h w is
/// overwritten with P_h theta_ref after every step; the high-mode error
/// |(I-P_h)(w - theta_ref)| decides the "determining" classification
/// (threshold relative to the full initial error).
SyncRecord determining_modes_experiment(const SqgParams& sqg, const StepperConfig& cfg,
                                        double cutoff, double sigma, const Trajectory& ref,
                                        const SpectralField& w0, const SyncOptions& opt = {});

struct MuSearchResult {
    double mu_lo = 0.0;
    double mu_hi = 0.0;
    int runs = 0;
    std::vector<std::pair<double, bool>> classified;  // (mu, synchronized)
};

/// Bisection on mu at fixed m; endpoints must classify differently.
MuSearchResult minimal_mu_search(const SqgParams& sqg, const NudgeParams& nudge_template,
                                 const LPBlockSet& blocks, const StepperConfig& cfg,
                                 const Trajectory& ref, const SpectralField& w0,
                                 double mu_lo, double mu_hi, double tol,
                                 const SyncOptions& opt = {});

/// Energy balance of the companion equation with the mu-terms retained,
/// trapezoid over the sampled pair (w, v) trajectories.
ResidualSeries nudged_energy_check(const Trajectory& w_traj, const Trajectory& v_traj,
                                   const SqgParams& sqg, const NudgeParams& nudge,
                                   const LPBlockSet& blocks, double tolerance);

/// Least-squares exponential decay rate of err(s); window is [lo, hi] x initial.
RateFit fit_decay_rate(const std::vector<SyncRow>& rows, double lo = 1e-9, double hi = 1e-2);

} // namespace sqglab
