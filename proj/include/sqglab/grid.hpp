#pragma once

#include <cmath>
#include <stdexcept>

namespace sqglab {

/// Uniform collocation grid on the 2-torus [-pi,pi)^2 with n points per
/// dimension. Spectral data lives on the wavenumber lattice |k_i| <= n/2 - 1;
/// the Nyquist row/column (k_i = -n/2) is kept identically zero.
struct TorusGrid {
    int n = 0;
    double dealias_fraction = 2.0 / 3.0;

    TorusGrid() = default;

    explicit TorusGrid(int points, double dealias = 2.0 / 3.0)
        : n(points), dealias_fraction(dealias) {
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("TorusGrid: n must be even and >= 8");
        if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
            throw std::invalid_argument("TorusGrid: dealias_fraction must be in (0,1]");
    }

    int size() const { return n * n; }

    /// Largest retained wavenumber per component.
    int max_mode() const { return n / 2 - 1; }

    /// Component-wise dealias cutoff: modes with max(|k1|,|k2|) above this
    /// are zeroed by the nonlinear term.
    double dealias_cutoff() const { return dealias_fraction * (n / 2); }

    /// Collocation coordinate of grid index i, in [-pi, pi).
    double coord(int i) const { return -M_PI + 2.0 * M_PI * i / n; }

    /// Logical wavenumber of FFT storage index.
    int wavenumber(int idx) const { return idx <= n / 2 - 1 ? idx : idx - n; }

    /// FFT storage index of logical wavenumber k in [-n/2, n/2-1].
    int fft_index(int k) const { return k >= 0 ? k : k + n; }

    bool retained(int k1, int k2) const {
        int m = max_mode();
        return k1 >= -m && k1 <= m && k2 >= -m && k2 <= m;
    }

    bool operator==(const TorusGrid& o) const {
        return n == o.n && dealias_fraction == o.dealias_fraction;
    }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

} // namespace sqglab
