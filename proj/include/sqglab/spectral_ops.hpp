#pragma once

#include <string>

#include "sqglab/field.hpp"
#include "sqglab/rng.hpp"

namespace sqglab {

/// Inverse transform: values theta(x_j) = sum_k theta_hat(k) e^{i k.x_j}.
PhysicalField to_physical(const SpectralField& f);

/// Forward transform; the mean (and Nyquist line) is forcibly zeroed and
/// Hermitian symmetry re-enforced, so round trips are exact on retained modes.
SpectralField to_spectral(const PhysicalField& f);

/// Forward transform retaining the mean. Only the level-set diagnostics use
/// this: truncations (f - lambda)_+ are genuinely not mean-zero, and the j=-1
/// Littlewood-Paley block passes the mean through.
SpectralField to_spectral_with_mean(const PhysicalField& f);

/// Multiplier |k|^beta (k != 0); negative beta is fine on mean-zero fields.
SpectralField fractional_laplacian(const SpectralField& f, double beta);

/// u = R_perp(theta): u1_hat = i k2/|k| theta_hat, u2_hat = -i k1/|k| theta_hat.
VelocityField riesz_velocity(const SpectralField& theta);

/// Same multipliers, kept in spectral space (used where physical u is not needed).
void riesz_velocity_spectral(const SpectralField& theta, SpectralField& u1, SpectralField& u2);

/// Pseudo-spectral u.grad(theta), dealiased by the component-wise 2/3 rule,
/// mean re-zeroed.
SpectralField advection_term(const SpectralField& theta);

/// ( sum_{k!=0} |k|^{2 sigma} |coeff|^2 )^{1/2}. sigma = 0 is the L2-proxy.
double sobolev_norm(const SpectralField& f, double sigma);

/// Uniform-grid quadrature of the L^p integral norm; p = inf gives max |values|.
double lebesgue_norm(const PhysicalField& f, double p);

/// Zero all coefficients with Euclidean |k| > cutoff (ties kept).
SpectralField project_modes(const SpectralField& f, double cutoff);

/// Zero all coefficients with max(|k1|,|k2|) > the grid's dealias cutoff.
void dealias(SpectralField& f);

/// L2-proxy pairing sum_k Re(a_hat conj(b_hat)).
double inner_product(const SpectralField& a, const SpectralField& b);

/// Band-limited random field: unit-variance complex Gaussian coefficients on
/// 0 < |k| <= max_wavenumber, symmetrized, mean-zero, scaled so that the
/// Hdot^sigma norm equals target_norm.
SpectralField random_field(const TorusGrid& grid, RngStream& rng, int max_wavenumber,
                           double sigma, double target_norm);

/// Zero-pad onto a factor-larger grid (same coefficients, same dealias fraction).
SpectralField oversample(const SpectralField& f, int factor);

/// SQGF snapshot format: "SQGF" magic, u32 version, u32 n, then n*n complex
/// coefficients as little-endian (real, imag) doubles in row-major FFT order.
void save_field(const SpectralField& f, const std::string& path);
SpectralField load_field(const std::string& path);

} // namespace sqglab
