#pragma once

#include <functional>
#include <vector>

#include "sqglab/field.hpp"
#include "sqglab/rng.hpp"

namespace sqglab {

/// Radial profile psi0 of the dyadic bumps: identically 1 for r <= 1/4,
/// identically 0 for r >= 1/2, smooth and non-increasing in between.
struct BumpProfile {
    std::function<double(double)> psi0;

    /// exp(-1/t)-based transition; hits the endpoint values exactly.
    static BumpProfile standard();
};

/// Evaluated dyadic multiplier tables phi_j(k) on the lattice, defining the
/// block projections Delta_j, the low/high passes S_m / T_m and tilde blocks.
/// phi_j(k) = psi0(|k| 2^{-j-1}) - psi0(|k| 2^{-j}) for j >= 0, phi_{-1} = psi0(|k|).
class LPBlockSet {
public:
    LPBlockSet(const TorusGrid& grid, const BumpProfile& profile);

    const TorusGrid& grid() const { return grid_; }
    int j_max() const { return j_max_; }

    /// phi_j table, lattice-flattened in FFT index order; j in [-1, j_max].
    const std::vector<double>& table(int j) const;

    /// Low-pass multiplier s_m(k) = sum_{j<=m} phi_j(k), evaluated in the
    /// telescoped closed form psi0(|k| 2^{-m-1}) so that s_m is exactly 1 on
    /// |k| <= 2^{m-1} and exactly 0 on |k| >= 2^m.
    const std::vector<double>& lowpass_table(int m) const;

    /// Sharp spectral projection indicator (|k| <= cutoff), same layout.
    std::vector<double> sharp_table(double cutoff) const;

private:
    TorusGrid grid_;
    BumpProfile profile_;
    int j_max_ = 0;
    std::vector<std::vector<double>> tables_;            // index j+1
    mutable std::vector<std::vector<double>> lowpass_;   // index m+1, built lazily
};

/// Delta_j f. j outside [-1, j_max] is an error.
SpectralField lp_block(const LPBlockSet& blocks, const SpectralField& f, int j);

/// S_m f; m >= -1 (m > j_max acts as identity up to the partition defect).
SpectralField lp_lowpass(const LPBlockSet& blocks, const SpectralField& f, int m);

/// T_m f = f - S_m f, exactly.
SpectralField lp_highpass(const LPBlockSet& blocks, const SpectralField& f, int m);

/// Tilde block: sum of Delta_l over |l - j| <= 2, clamped to the valid range.
SpectralField lp_tilde_block(const LPBlockSet& blocks, const SpectralField& f, int j);

/// Pointwise (sum_j (Delta_j f)^2)^{1/2} at collocation points.
PhysicalField square_function(const LPBlockSet& blocks, const SpectralField& f, bool tilde);

struct BernsteinReport {
    int j = 0;
    double beta = 0.0, p = 2.0, q = 2.0;
    int ensemble = 0;
    double max_lower = 0.0;    // C in C^{-1} 2^{j beta} |D_j g|_q <= |L^beta D_j g|_q
    double max_upper = 0.0;    // C in |L^beta D_j g|_q <= C 2^{j(beta+2(1/p-1/q))} |D_j g|_p
    double max_lowpass = 0.0;  // same with S_j in place of D_j
    double ceiling = 1e3;
    bool ok = true;
};

/// Empirical Bernstein constants over a random ensemble; flags failure only
/// if a ratio exceeds the configured ceiling.
BernsteinReport bernstein_check(const LPBlockSet& blocks, int ensemble_size, int j,
                                double beta, double p, double q, std::uint64_t seed,
                                double ceiling = 1e3);

/// Gaussian coefficients on every retained mode (no band limit); used by the
/// multiplier and inequality ensembles.
SpectralField random_full_spectrum_field(const TorusGrid& grid, RngStream& rng);

} // namespace sqglab
