#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "sqglab/grid.hpp"

namespace sqglab {

/// Mean-zero real periodic scalar field stored as Fourier coefficients
/// theta_hat(k) on the truncated lattice, row-major in FFT index order.
/// Convention: theta(x) = sum_k theta_hat(k) e^{i k.x} on [-pi,pi)^2.
class SpectralField {
public:
    SpectralField() = default;

    explicit SpectralField(const TorusGrid& grid)
        : grid_(grid), c_(static_cast<std::size_t>(grid.size()), {0.0, 0.0}) {}

    const TorusGrid& grid() const { return grid_; }
    int n() const { return grid_.n; }

    std::complex<double>& at_index(int i1, int i2) {
        return c_[static_cast<std::size_t>(i1) * grid_.n + i2];
    }
    const std::complex<double>& at_index(int i1, int i2) const {
        return c_[static_cast<std::size_t>(i1) * grid_.n + i2];
    }

    /// Coefficient at logical wavenumber (k1, k2), |k_i| <= n/2 - 1.
    std::complex<double>& at(int k1, int k2) {
        return at_index(grid_.fft_index(k1), grid_.fft_index(k2));
    }
    const std::complex<double>& at(int k1, int k2) const {
        return at_index(grid_.fft_index(k1), grid_.fft_index(k2));
    }

    std::vector<std::complex<double>>& data() { return c_; }
    const std::vector<std::complex<double>>& data() const { return c_; }

    /// Zero the mean and the (unused) Nyquist row/column.
    void enforce_zero_mean_and_nyquist() {
        if (c_.empty()) return;
        c_[0] = 0.0;
        int ny = grid_.n / 2;
        for (int i = 0; i < grid_.n; ++i) {
            at_index(ny, i) = 0.0;
            at_index(i, ny) = 0.0;
        }
    }

    /// Symmetrize so that coeff(-k) == conj(coeff(k)) exactly.
    void enforce_reality() {
        int n = grid_.n;
        for (int i1 = 0; i1 < n; ++i1) {
            int j1 = (n - i1) % n;
            for (int i2 = 0; i2 < n; ++i2) {
                int j2 = (n - i2) % n;
                if (i1 * n + i2 > j1 * n + j2) continue;
                auto a = at_index(i1, i2);
                auto b = std::conj(at_index(j1, j2));
                auto avg = 0.5 * (a + b);
                at_index(i1, i2) = avg;
                at_index(j1, j2) = std::conj(avg);
            }
        }
    }

    /// Max deviation from Hermitian symmetry (diagnostic).
    double reality_defect() const {
        double worst = 0.0;
        int n = grid_.n;
        for (int i1 = 0; i1 < n; ++i1) {
            int j1 = (n - i1) % n;
            for (int i2 = 0; i2 < n; ++i2) {
                int j2 = (n - i2) % n;
                double d = std::abs(at_index(i1, i2) - std::conj(at_index(j1, j2)));
                if (d > worst) worst = d;
            }
        }
        return worst;
    }

    double max_abs() const {
        double worst = 0.0;
        for (const auto& z : c_) worst = std::max(worst, std::abs(z));
        return worst;
    }

    bool all_finite() const {
        for (const auto& z : c_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    SpectralField& operator+=(const SpectralField& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (auto& z : c_) z *= s;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
    friend SpectralField operator*(SpectralField a, double s) { return a *= s; }

    void check_same_grid(const SpectralField& o) const {
        if (grid_ != o.grid_)
            throw std::invalid_argument("SpectralField: grid mismatch");
    }

private:
    TorusGrid grid_;
    std::vector<std::complex<double>> c_;
};

/// Real values on the n x n collocation grid, row-major (x1 index outer).
class PhysicalField {
public:
    PhysicalField() = default;

    explicit PhysicalField(const TorusGrid& grid)
        : grid_(grid), v_(static_cast<std::size_t>(grid.size()), 0.0) {}

    const TorusGrid& grid() const { return grid_; }
    int n() const { return grid_.n; }

    double& at(int i1, int i2) { return v_[static_cast<std::size_t>(i1) * grid_.n + i2]; }
    double at(int i1, int i2) const { return v_[static_cast<std::size_t>(i1) * grid_.n + i2]; }

    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

    double max_abs() const {
        double worst = 0.0;
        for (double x : v_) worst = std::max(worst, std::abs(x));
        return worst;
    }

private:
    TorusGrid grid_;
    std::vector<double> v_;
};

/// Divergence-free velocity (u1, u2) on a shared grid.
struct VelocityField {
    PhysicalField u1;
    PhysicalField u2;
};

} // namespace sqglab
