#pragma once

#include <cmath>

namespace sqglab::bounds {

/// The a priori bound constants of the companion equation, implemented
/// verbatim with every unspecified absolute constant exposed as a parameter
/// defaulting to 1. Inputs named F_* are already divided by kappa.

inline double f_lp(double kappa, double f_lp_norm) { return f_lp_norm / kappa; }

inline double f_hminusgamma2(double kappa, double f_norm) { return f_norm / kappa; }

/// G_{L2}^2 = C (kappa/mu F_{H^{-gamma/2}}^2 + Theta_{Hsigma}^2)
inline double g_l2_sq(double kappa, double mu, double F_hmg2, double theta_hsigma,
                      double C = 1.0) {
    return C * (kappa / mu * F_hmg2 * F_hmg2 + theta_hsigma * theta_hsigma);
}

/// G~_{Lp}^p = C (kappa^p/mu^p (F_Lp^p + (G_L2/p)^p) + Theta_Lp^p + 2^{m(p-2)} G_L2^p)
inline double g_lp_tilde_pow_p(double kappa, double mu, double p, int m, double F_lp,
                               double theta_lp, double g_l2, double C = 1.0) {
    double km = std::pow(kappa / mu, p);
    return C * (km * (std::pow(F_lp, p) + std::pow(g_l2 / p, p)) + std::pow(theta_lp, p) +
                std::pow(2.0, m * (p - 2.0)) * std::pow(g_l2, p));
}

/// Xi_{r,alpha} = C (sup_s |w|_{L^r} / kappa)^{2 alpha/(gamma-1-2/r)}
inline double xi(double sup_lr, double kappa, double gamma, double r, double alpha,
                 double C = 1.0) {
    return C * std::pow(sup_lr / kappa, 2.0 * alpha / (gamma - 1.0 - 2.0 / r));
}

/// G~_{Hsigma}^2 = C (kappa/mu F_{H^{sigma-gamma/2}}^2 + Theta_{Hsigma}^2 + Xi G_L2^2)
inline double g_hsigma_tilde_sq(double kappa, double mu, double F_hsmg2, double theta_hsigma,
                                double xi_p_sigma, double g_l2, double C = 1.0) {
    return C * (kappa / mu * F_hsmg2 * F_hsmg2 + theta_hsigma * theta_hsigma +
                xi_p_sigma * g_l2 * g_l2);
}

/// G_{Lp} = kappa/mu F_Lp + Theta_{Hsigma}
inline double g_lp(double kappa, double mu, double F_lp, double theta_hsigma) {
    return kappa / mu * F_lp + theta_hsigma;
}

/// U_0 <= 4 mu delta_inf G_L2^2
inline double u0_bound(double mu, double delta_inf, double g_l2_squared) {
    return 4.0 * mu * delta_inf * g_l2_squared;
}

/// M_inf = C (mu/kappa)^{1/(gamma-2/p)} [ (kappa/mu F_Lp + rho0 + 1)
///         (U0^{gamma/2} + U0^{gamma/2 - 1/p}) ]^{1/(gamma-2/p)}
inline double m_infty(double kappa, double mu, double gamma, double p, double F_lp,
                      double rho0, double u0, double C = 1.0) {
    if (u0 <= 0.0) return 0.0;
    double expo = 1.0 / (gamma - 2.0 / p);
    double inner = (kappa / mu * F_lp + rho0 + 1.0) *
                   (std::pow(u0, 0.5 * gamma) + std::pow(u0, 0.5 * gamma - 1.0 / p));
    return C * std::pow(mu / kappa, expo) * std::pow(inner, expo);
}

/// De Giorgi sup bound (constants 1): ( max{1/(delta_inf kappa),
/// mu/kappa (kappa/mu F_Lp + rho0 + 1)} (U0^{g/2} + U0^{g/2-1/p}) )^{1/(g-2/p)}
inline double dg_sup_bound(double kappa, double mu, double gamma, double p, double F_lp,
                           double rho0, double delta_inf, double u0, double C = 1.0) {
    if (u0 <= 0.0) return 0.0;
    double amp = std::max(1.0 / (delta_inf * kappa),
                          mu / kappa * (kappa / mu * F_lp + rho0 + 1.0));
    double inner = amp * (std::pow(u0, 0.5 * gamma) + std::pow(u0, 0.5 * gamma - 1.0 / p));
    return C * std::pow(inner, 1.0 / (gamma - 2.0 / p));
}

/// G_{sigma,inf}^2 = C (F_{H^{sigma-gamma/2}}^2 + Theta_sigma^2 +
///                     (M_inf/kappa)^{2 sigma/(gamma-1-2/p)} G_L2^2)
inline double g_sigma_infty_sq(double F_hsmg2, double theta_hsigma, double m_inf,
                               double kappa, double sigma, double gamma, double p,
                               double g_l2, double C = 1.0) {
    return C * (F_hsmg2 * F_hsmg2 + theta_hsigma * theta_hsigma +
                std::pow(m_inf / kappa, 2.0 * sigma / (gamma - 1.0 - 2.0 / p)) * g_l2 * g_l2);
}

/// G_{Hsigma}^2 = C (F_{H^{sigma-gamma/2}}^2 + Theta_{Hsigma}^2 +
///                  (G_Lp/kappa)^{2 sigma/(gamma-1-2/p)} G_L2^2)
inline double g_hsigma_sq(double F_hsmg2, double theta_hsigma, double g_lp_val, double kappa,
                          double sigma, double gamma, double p, double g_l2, double C = 1.0) {
    return C * (F_hsmg2 * F_hsmg2 + theta_hsigma * theta_hsigma +
                std::pow(g_lp_val / kappa, 2.0 * sigma / (gamma - 1.0 - 2.0 / p)) * g_l2 * g_l2);
}

/// A_{alpha,r}(m) = 2^{m(1 - 2/r - alpha)}
inline double lowpass_decay(double alpha, double r, int m) {
    return std::pow(2.0, m * (1.0 - 2.0 / r - alpha));
}

/// Determining-parameter threshold: h^{-1} > c0 (Theta_Lp / kappa)^{1/(gamma-1-2/p)}
inline double determining_cutoff(double theta_lp, double kappa, double gamma, double p,
                                 double c0 = 1.0) {
    return c0 * std::pow(theta_lp / kappa, 1.0 / (gamma - 1.0 - 2.0 / p));
}

} // namespace sqglab::bounds
