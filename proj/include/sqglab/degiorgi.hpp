#pragma once

#include <vector>

#include "sqglab/nudging.hpp"

namespace sqglab {

/// Truncation levels lambda_n = M (1 - 2^{-n}) and the De Giorgi windows
/// s_n = s0 + delta_inf (1 - 2^{-n}).
struct LevelSetConfig {
    double M = 1.0;
    int n_max = 12;
    double delta_inf = 1.0;
    int oversample_factor = 2;

    double lambda(int n) const { return M * (1.0 - std::ldexp(1.0, -n)); }
};

/// Pointwise (f - lambda)_+.
PhysicalField truncate(const PhysicalField& f, double lambda);

struct LambdaDecomposition {
    PhysicalField phi_plus;   // (f - lambda)_+
    PhysicalField phi_minus;  // (-f - lambda)_+
    PhysicalField core;       // f restricted to |f| <= lambda, clamped at +-lambda
};

/// f = phi_plus - phi_minus + core, pointwise exact; |core| <= lambda.
LambdaDecomposition lambda_decompose(const PhysicalField& f, double lambda);

struct PhiEnergy {
    double l2_sq = 0.0;       // |phi(w)|^2 + |phi(-w)|^2, L2-proxy squared
    double hgamma2_sq = 0.0;  // same in Hdot^{gamma/2}
};

/// Level-set energies of the vector truncation Phi(w) = (phi(w), phi(-w)),
/// evaluated on an oversampled collocation grid (the truncation is not
/// band-limited) with fractional norms from the oversampled spectrum.
PhiEnergy phi_vector_energy(const SpectralField& w, double lambda, double gamma,
                            int oversample_factor = 2);

/// U_n(s_inf) = sup_{s_n <= s <= s_inf} |Phi_n(w)(s)|_{L2}^2
///              + kappa int_{s_n}^{s_inf} |Phi_n(w)|_{Hgamma/2}^2.
std::vector<double> level_energies(const Trajectory& w_traj, const LevelSetConfig& cfg,
                                   double gamma, double kappa);

struct LevelSetResidual {
    double s1 = 0.0, s2 = 0.0;
    double lhs = 0.0, rhs = 0.0;
    double residual = 0.0;  // rhs - lhs, should be >= -tolerance
};

/// The level-set energy inequality along a nudged run at a fixed level
/// lambda: LHS = |Phi(w)(s2)|^2_{L2} + kappa int |Phi(w)|^2_{Hgamma/2},
/// RHS = |Phi(w)(s1)|^2 + 2 sqrt2 int int |f + mu S_m v| |Phi(w)|
///       + 2 mu int int S(w_lambda) S~(phi(+-w)).
std::vector<LevelSetResidual> levelset_inequality_check(
    const Trajectory& w_traj, const Trajectory& v_traj, const SqgParams& sqg,
    const NudgeParams& nudge, double lambda, int pairs, int oversample_factor = 2);

/// alpha from 1/(P+Q) = (1-alpha)/2 + alpha (2-gamma)/4; errors if outside (0,1).
double interpolation_exponent(double P, double Q, double gamma);

struct IterationLemmaParams {
    double a = 1.0, b = 1.0;
    std::vector<double> d_list{2.0};
    double C = 1.0;
    double V0 = 1.0, V1 = 1.0;

    double d_min() const;
    double y0() const { return 3.0 * a / (2.0 * d_min() - 3.0); }
};

struct IterationLemmaReport {
    double y0 = 0.0;
    double m_threshold = 0.0;       // max-form with C0 = 1
    bool hypothesis_met = false;    // M >= m_threshold
    std::vector<double> sequence;   // V_0, V_1, then maximal recursion
    bool verdict = false;           // V_n <= V_0 2^{-n y0} for 2 <= n <= n_max
};

/// Generates the maximal sequence V_n = C 2^{na}/M^b sum_j V_{n-1}^{d_j}
/// from the given V_1 and checks the claimed geometric decay.
IterationLemmaReport iteration_lemma_check(const IterationLemmaParams& params, double M,
                                           int n_max);

struct LinftyBoundReport {
    double m_estimate = 0.0;   // the De Giorgi sup bound with constants 1
    double measured_sup = 0.0; // sup over samples of |w|_{Linf}
    double margin = 0.0;       // m_estimate / measured_sup
    double required_C = 0.0;   // smallest outer constant validating the bound
    double u0_measured = 0.0;
    double u0_bound = 0.0;     // 4 mu delta_inf G_L2^2
};

/// Evaluate the L^inf bound formula with measured U_0 and sup-norm.
LinftyBoundReport linfty_bound_estimate(const Trajectory& w_traj, const SqgParams& sqg,
                                        const NudgeParams& nudge, double rho0,
                                        double theta_hsigma, double delta_inf);

} // namespace sqglab
