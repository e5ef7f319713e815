#include "sqglab/spectral_ops.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "fft.hpp"

namespace sqglab {

namespace {

// Phase (-1)^(k1+k2) mapping coefficients w.r.t. x in [-pi,pi) onto the
// DFT's implicit [0,2pi) grid. Self-inverse and real, so reality survives.
inline double grid_phase(int k1, int k2) {
    return ((k1 + k2) & 1) ? -1.0 : 1.0;
}

} // namespace

PhysicalField to_physical(const SpectralField& f) {
    const TorusGrid& g = f.grid();
    int n = g.n;
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(n) * n);
    std::vector<std::complex<double>> out(buf.size());
    for (int i1 = 0; i1 < n; ++i1) {
        int k1 = g.wavenumber(i1);
        for (int i2 = 0; i2 < n; ++i2) {
            int k2 = g.wavenumber(i2);
            buf[static_cast<std::size_t>(i1) * n + i2] =
                grid_phase(k1, k2) * f.at_index(i1, i2);
        }
    }
    detail::fft2d(n, buf.data(), out.data(), /*forward=*/false);
    PhysicalField p(g);
    for (std::size_t i = 0; i < out.size(); ++i) p.data()[i] = out[i].real();
    return p;
}

SpectralField to_spectral_with_mean(const PhysicalField& f) {
    const TorusGrid& g = f.grid();
    int n = g.n;
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(n) * n);
    std::vector<std::complex<double>> out(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = f.data()[i];
    detail::fft2d(n, buf.data(), out.data(), /*forward=*/true);
    SpectralField s(g);
    double inv = 1.0 / (static_cast<double>(n) * n);
    for (int i1 = 0; i1 < n; ++i1) {
        int k1 = g.wavenumber(i1);
        for (int i2 = 0; i2 < n; ++i2) {
            int k2 = g.wavenumber(i2);
            s.at_index(i1, i2) =
                grid_phase(k1, k2) * inv * out[static_cast<std::size_t>(i1) * n + i2];
        }
    }
    s.enforce_reality();
    return s;
}

SpectralField to_spectral(const PhysicalField& f) {
    SpectralField s = to_spectral_with_mean(f);
    s.enforce_zero_mean_and_nyquist();
    return s;
}

SpectralField fractional_laplacian(const SpectralField& f, double beta) {
    const TorusGrid& g = f.grid();
    SpectralField out(g);
    for (int i1 = 0; i1 < g.n; ++i1) {
        int k1 = g.wavenumber(i1);
        for (int i2 = 0; i2 < g.n; ++i2) {
            int k2 = g.wavenumber(i2);
            if (k1 == 0 && k2 == 0) continue;
            double k2mod = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
            out.at_index(i1, i2) = std::pow(k2mod, 0.5 * beta) * f.at_index(i1, i2);
        }
    }
    return out;
}

void riesz_velocity_spectral(const SpectralField& theta, SpectralField& u1, SpectralField& u2) {
    const TorusGrid& g = theta.grid();
    u1 = SpectralField(g);
    u2 = SpectralField(g);
    const std::complex<double> I(0.0, 1.0);
    for (int i1 = 0; i1 < g.n; ++i1) {
        int k1 = g.wavenumber(i1);
        for (int i2 = 0; i2 < g.n; ++i2) {
            int k2 = g.wavenumber(i2);
            if (k1 == 0 && k2 == 0) continue;
            double mod = std::sqrt(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
            auto t = theta.at_index(i1, i2);
            u1.at_index(i1, i2) = I * (k2 / mod) * t;
            u2.at_index(i1, i2) = -I * (k1 / mod) * t;
        }
    }
}

VelocityField riesz_velocity(const SpectralField& theta) {
    SpectralField u1, u2;
    riesz_velocity_spectral(theta, u1, u2);
    return VelocityField{to_physical(u1), to_physical(u2)};
}

void dealias(SpectralField& f) {
    const TorusGrid& g = f.grid();
    double cutoff = g.dealias_cutoff();
    for (int i1 = 0; i1 < g.n; ++i1) {
        int k1 = g.wavenumber(i1);
        for (int i2 = 0; i2 < g.n; ++i2) {
            int k2 = g.wavenumber(i2);
            if (std::max(std::abs(k1), std::abs(k2)) > cutoff)
                f.at_index(i1, i2) = 0.0;
        }
    }
}

SpectralField advection_term(const SpectralField& theta) {
    const TorusGrid& g = theta.grid();
    SpectralField u1h, u2h;
    riesz_velocity_spectral(theta, u1h, u2h);

    SpectralField dx(g), dy(g);
    const std::complex<double> I(0.0, 1.0);
    for (int i1 = 0; i1 < g.n; ++i1) {
        int k1 = g.wavenumber(i1);
        for (int i2 = 0; i2 < g.n; ++i2) {
            int k2 = g.wavenumber(i2);
            auto t = theta.at_index(i1, i2);
            dx.at_index(i1, i2) = I * static_cast<double>(k1) * t;
            dy.at_index(i1, i2) = I * static_cast<double>(k2) * t;
        }
    }

    PhysicalField u1 = to_physical(u1h);
    PhysicalField u2 = to_physical(u2h);
    PhysicalField tx = to_physical(dx);
    PhysicalField ty = to_physical(dy);

    PhysicalField prod(g);
    for (std::size_t i = 0; i < prod.data().size(); ++i)
        prod.data()[i] = u1.data()[i] * tx.data()[i] + u2.data()[i] * ty.data()[i];

    SpectralField adv = to_spectral(prod);
    dealias(adv);
    adv.enforce_zero_mean_and_nyquist();
    return adv;
}

double sobolev_norm(const SpectralField& f, double sigma) {
    const TorusGrid& g = f.grid();
    double acc = 0.0;
    for (int i1 = 0; i1 < g.n; ++i1) {
        int k1 = g.wavenumber(i1);
        for (int i2 = 0; i2 < g.n; ++i2) {
            int k2 = g.wavenumber(i2);
            if (k1 == 0 && k2 == 0) continue;
            double k2mod = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
            acc += std::pow(k2mod, sigma) * std::norm(f.at_index(i1, i2));
        }
    }
    return std::sqrt(acc);
}

double lebesgue_norm(const PhysicalField& f, double p) {
    if (std::isinf(p)) return f.max_abs();
    if (p < 1.0) throw std::invalid_argument("lebesgue_norm: p must be >= 1 or inf");
    const TorusGrid& g = f.grid();
    double cell = (2.0 * M_PI / g.n) * (2.0 * M_PI / g.n);
    double acc = 0.0;
    for (double v : f.data()) acc += std::pow(std::abs(v), p);
    return std::pow(cell * acc, 1.0 / p);
}

SpectralField project_modes(const SpectralField& f, double cutoff) {
    const TorusGrid& g = f.grid();
    SpectralField out(g);
    double c2 = cutoff * cutoff;
    for (int i1 = 0; i1 < g.n; ++i1) {
        int k1 = g.wavenumber(i1);
        for (int i2 = 0; i2 < g.n; ++i2) {
            int k2 = g.wavenumber(i2);
            double k2mod = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
            if (k2mod <= c2) out.at_index(i1, i2) = f.at_index(i1, i2);
        }
    }
    return out;
}

double inner_product(const SpectralField& a, const SpectralField& b) {
    a.check_same_grid(b);
    double acc = 0.0;
    const auto& x = a.data();
    const auto& y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    return acc;
}

SpectralField random_field(const TorusGrid& grid, RngStream& rng, int max_wavenumber,
                           double sigma, double target_norm) {
    SpectralField f(grid);
    int kmax = std::min(max_wavenumber, grid.max_mode());
    kmax = std::min(kmax, static_cast<int>(grid.dealias_cutoff()));
    for (int k1 = -kmax; k1 <= kmax; ++k1) {
        for (int k2 = -kmax; k2 <= kmax; ++k2) {
            // fill one half-plane, mirror the other
            if (k1 < 0 || (k1 == 0 && k2 <= 0)) continue;
            if (k1 * k1 + k2 * k2 > kmax * kmax) continue;
            std::complex<double> z(rng.normal(), rng.normal());
            f.at(k1, k2) = z;
            f.at(-k1, -k2) = std::conj(z);
        }
    }
    double norm = sobolev_norm(f, sigma);
    if (norm > 0.0 && target_norm > 0.0) f *= target_norm / norm;
    return f;
}

SpectralField oversample(const SpectralField& f, int factor) {
    if (factor < 1) throw std::invalid_argument("oversample: factor must be >= 1");
    const TorusGrid& g = f.grid();
    TorusGrid big(g.n * factor, g.dealias_fraction);
    SpectralField out(big);
    int m = g.max_mode();
    for (int k1 = -m; k1 <= m; ++k1)
        for (int k2 = -m; k2 <= m; ++k2)
            out.at(k1, k2) = f.at(k1, k2);
    return out;
}

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

} // namespace

void save_field(const SpectralField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("save_field: cannot open " + path);
    os.write(kMagic, 4);
    std::uint32_t ver = kVersion;
    std::uint32_t n = static_cast<std::uint32_t>(f.n());
    os.write(reinterpret_cast<const char*>(&ver), 4);
    os.write(reinterpret_cast<const char*>(&n), 4);
    for (const auto& z : f.data()) {
        double re = z.real(), im = z.imag();
        os.write(reinterpret_cast<const char*>(&re), 8);
        os.write(reinterpret_cast<const char*>(&im), 8);
    }
    if (!os) throw std::runtime_error("save_field: write failed for " + path);
}

SpectralField load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_field: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("load_field: bad magic in " + path);
    std::uint32_t ver = 0, n = 0;
    is.read(reinterpret_cast<char*>(&ver), 4);
    is.read(reinterpret_cast<char*>(&n), 4);
    if (!is || ver != kVersion)
        throw std::runtime_error("load_field: unsupported version in " + path);
    if (n < 8 || n % 2 != 0 || n > (1u << 16))
        throw std::runtime_error("load_field: invalid n in " + path);
    SpectralField f(TorusGrid(static_cast<int>(n)));
    for (auto& z : f.data()) {
        double re = 0.0, im = 0.0;
        is.read(reinterpret_cast<char*>(&re), 8);
        is.read(reinterpret_cast<char*>(&im), 8);
        z = {re, im};
    }
    if (!is) throw std::runtime_error("load_field: truncated file " + path);
    double scale = std::max(1.0, f.max_abs());
    if (std::abs(f.at(0, 0)) > 1e-12 * scale)
        throw std::runtime_error("load_field: mean is not zero in " + path);
    if (f.reality_defect() > 1e-12 * scale)
        throw std::runtime_error("load_field: reality violated in " + path);
    return f;
}

} // namespace sqglab
