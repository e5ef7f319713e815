#pragma once

#include <string>
#include <vector>

#include "sqglab/nudging.hpp"

namespace sqglab {

/// Trajectory viewed as an element of X = C^1_b(R; S_{m-1} V_sigma): carries
/// the regularity index and the 2^{-(2+sigma)m} derivative weight. The
/// low_pass flag asserts the samples actually lie in the range of S_{m-1}.
struct BanachTrajectory {
    Trajectory traj;
    double sigma = 1.0;
    int m = 0;
    bool low_pass = false;

    BanachTrajectory() = default;
    BanachTrajectory(Trajectory t, double sigma_, int m_, bool low_pass_ = false);

    /// Constant-in-s trajectory on [0, span].
    static BanachTrajectory constant(const SpectralField& f, double span, std::size_t samples,
                                     double sigma, int m);
};

/// sup_s |v(s)|_{Hsigma} + 2^{-(2+sigma)m} sup_s |v'(s)|_{Hsigma}, with the
/// derivative by centered differences (one-sided at the endpoints).
double x_norm(const BanachTrajectory& v);

/// sup_s |v(s)|_{Hsigma} only.
double y_norm(const BanachTrajectory& v);

/// R = C (1 + kappa) (1 + |f|_{Hdot^{-gamma/2}} / kappa)^2; the attractor's
/// S_{m-1} projection lies in the X-ball of radius 4R.
double radius_R(const SqgParams& sqg, double C);

struct WMapConfig {
    double relax_time = 0.0;   // burn-in before the window
    double window_start = 0.0;
    double window_end = 1.0;
    double tol_forget = 1e-8;

    void validate(double mu) const;  // relax_time >= ln(1/tol_forget)/mu
};

/// Solve the companion equation from w(window_start - relax_time) = w0
/// (default 0) with data v (clamp-extended), return the window restriction
/// sampled on v's grid. The burn-in makes the window insensitive to the
/// artificial start to within tol_forget.
Trajectory w_map(const BanachTrajectory& v, const SqgParams& sqg, const NudgeParams& nudge,
                 const LPBlockSet& blocks, const StepperConfig& cfg, const WMapConfig& wcfg,
                 const SpectralField* w0 = nullptr);

struct LipschitzProbe {
    double dx = 0.0;                 // |v1 - v2|_X
    double ratio_y = 0.0;            // |S_m W(v1) - S_m W(v2)|_Y / dx
    double ratio_hminushalf = 0.0;   // sup_s |W(v1)-W(v2)|_{H^{-1/2}} / dx
};

LipschitzProbe w_map_lipschitz_probe(const BanachTrajectory& v1, const BanachTrajectory& v2,
                                     const SqgParams& sqg, const NudgeParams& nudge,
                                     const LPBlockSet& blocks, const StepperConfig& cfg,
                                     const WMapConfig& wcfg);

struct DetFormRhs {
    BanachTrajectory rhs;
    double lambda = 0.0;      // |v - S_m W(v)|_X ^ power
    double residual_x = 0.0;  // |v - S_m W(v)|_X
    Trajectory w;
};

/// Right-hand side of dv/dtau = -|v - S_m W(v)|_X^power (v - S_m theta_star).
DetFormRhs detform_rhs(const BanachTrajectory& v, const SpectralField& theta_star,
                       const SqgParams& sqg, const NudgeParams& nudge,
                       const LPBlockSet& blocks, const StepperConfig& cfg,
                       const WMapConfig& wcfg, int rhs_power = 2);

struct DetFormRow {
    double tau = 0.0;
    double residual_x = 0.0;
    double dist_to_steady_x = 0.0;
    double lambda = 0.0;
};

struct DetFormResult {
    std::vector<DetFormRow> rows;
    BanachTrajectory v_final;
    bool converged = false;
    bool aborted = false;
    bool inside_ball = true;  // v0 within 3R of S_m theta_star
    std::string note;
};

/// Explicit RK4 in tau; stops early when the residual drops below tol and
/// aborts (with diagnostics) after 10 consecutive residual increases.
DetFormResult detform_integrate(const BanachTrajectory& v0, const SpectralField& theta_star,
                                const SqgParams& sqg, const NudgeParams& nudge,
                                const LPBlockSet& blocks, const StepperConfig& cfg,
                                const WMapConfig& wcfg, double tau_span, double dtau,
                                double tol, int rhs_power = 2);

} // namespace sqglab
