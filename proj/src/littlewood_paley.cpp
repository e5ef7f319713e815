#include "sqglab/littlewood_paley.hpp"

#include <cmath>
#include <stdexcept>

#include "sqglab/spectral_ops.hpp"

namespace sqglab {

namespace {

double smooth_step(double t) {
    // h(t) = exp(-1/t) for t > 0, else 0
    return t > 0.0 ? std::exp(-1.0 / t) : 0.0;
}

double modulus(const TorusGrid& g, int i1, int i2) {
    double k1 = g.wavenumber(i1);
    double k2 = g.wavenumber(i2);
    return std::sqrt(k1 * k1 + k2 * k2);
}

} // namespace

BumpProfile BumpProfile::standard() {
    BumpProfile b;
    b.psi0 = [](double r) {
        if (r <= 0.25) return 1.0;
        if (r >= 0.5) return 0.0;
        double up = smooth_step((0.5 - r) / 0.25);
        double down = smooth_step((r - 0.25) / 0.25);
        return up / (up + down);
    };
    return b;
}

LPBlockSet::LPBlockSet(const TorusGrid& grid, const BumpProfile& profile)
    : grid_(grid), profile_(profile) {
    const auto& psi0 = profile_.psi0;
    if (!psi0) throw std::invalid_argument("LPBlockSet: empty profile");
    if (std::abs(psi0(0.25) - 1.0) > 1e-12 || std::abs(psi0(0.5)) > 1e-12 ||
        std::abs(psi0(0.0) - 1.0) > 1e-12)
        throw std::invalid_argument("LPBlockSet: profile violates psi0 endpoint constraints");
    double prev = 1.0;
    for (int i = 0; i <= 64; ++i) {
        double r = 0.25 + 0.25 * i / 64.0;
        double v = psi0(r);
        if (v < -1e-15 || v > 1.0 + 1e-15 || v > prev + 1e-12)
            throw std::invalid_argument("LPBlockSet: profile not monotone in [0,1] on (1/4,1/2)");
        prev = v;
    }

    // Smallest J with r_max 2^{-J-1} <= 1/4: the telescoped sum of blocks up
    // to J is then exactly 1 at every lattice point, corners included.
    double r_max = std::sqrt(2.0) * grid_.max_mode();
    j_max_ = 0;
    while (r_max * std::ldexp(1.0, -j_max_ - 1) > 0.25) ++j_max_;

    tables_.assign(static_cast<std::size_t>(j_max_) + 2,
                   std::vector<double>(static_cast<std::size_t>(grid_.size()), 0.0));
    for (int i1 = 0; i1 < grid_.n; ++i1) {
        for (int i2 = 0; i2 < grid_.n; ++i2) {
            std::size_t idx = static_cast<std::size_t>(i1) * grid_.n + i2;
            double r = modulus(grid_, i1, i2);
            tables_[0][idx] = psi0(r);
            for (int j = 0; j <= j_max_; ++j)
                tables_[static_cast<std::size_t>(j) + 1][idx] =
                    psi0(r * std::ldexp(1.0, -j - 1)) - psi0(r * std::ldexp(1.0, -j));
        }
    }

    // Partition-of-unity invariant, verified at build time.
    for (std::size_t idx = 0; idx < tables_[0].size(); ++idx) {
        double s = 0.0;
        for (const auto& t : tables_) s += t[idx];
        if (std::abs(s - 1.0) > 1e-12)
            throw std::runtime_error("LPBlockSet: partition of unity failed at a lattice point");
    }
}

const std::vector<double>& LPBlockSet::table(int j) const {
    if (j < -1 || j > j_max_)
        throw std::out_of_range("LPBlockSet: block index out of range");
    return tables_[static_cast<std::size_t>(j) + 1];
}

const std::vector<double>& LPBlockSet::lowpass_table(int m) const {
    if (m < -1) throw std::out_of_range("LPBlockSet: lowpass index must be >= -1");
    int mc = std::min(m, j_max_);
    if (lowpass_.size() < static_cast<std::size_t>(j_max_) + 2)
        lowpass_.resize(static_cast<std::size_t>(j_max_) + 2);
    auto& tab = lowpass_[static_cast<std::size_t>(mc) + 1];
    if (tab.empty()) {
        tab.resize(static_cast<std::size_t>(grid_.size()));
        for (int i1 = 0; i1 < grid_.n; ++i1)
            for (int i2 = 0; i2 < grid_.n; ++i2) {
                std::size_t idx = static_cast<std::size_t>(i1) * grid_.n + i2;
                tab[idx] = profile_.psi0(modulus(grid_, i1, i2) * std::ldexp(1.0, -mc - 1));
            }
    }
    return tab;
}

std::vector<double> LPBlockSet::sharp_table(double cutoff) const {
    std::vector<double> tab(static_cast<std::size_t>(grid_.size()), 0.0);
    for (int i1 = 0; i1 < grid_.n; ++i1)
        for (int i2 = 0; i2 < grid_.n; ++i2)
            if (modulus(grid_, i1, i2) <= cutoff)
                tab[static_cast<std::size_t>(i1) * grid_.n + i2] = 1.0;
    return tab;
}

namespace {

SpectralField apply_table(const SpectralField& f, const std::vector<double>& tab) {
    SpectralField out = f;
    auto& c = out.data();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= tab[i];
    return out;
}

} // namespace

SpectralField lp_block(const LPBlockSet& blocks, const SpectralField& f, int j) {
    if (f.grid() != blocks.grid())
        throw std::invalid_argument("lp_block: grid mismatch");
    return apply_table(f, blocks.table(j));
}

SpectralField lp_lowpass(const LPBlockSet& blocks, const SpectralField& f, int m) {
    if (f.grid() != blocks.grid())
        throw std::invalid_argument("lp_lowpass: grid mismatch");
    return apply_table(f, blocks.lowpass_table(m));
}

SpectralField lp_highpass(const LPBlockSet& blocks, const SpectralField& f, int m) {
    return f - lp_lowpass(blocks, f, m);
}

SpectralField lp_tilde_block(const LPBlockSet& blocks, const SpectralField& f, int j) {
    if (j < -1 || j > blocks.j_max())
        throw std::out_of_range("lp_tilde_block: block index out of range");
    SpectralField acc(f.grid());
    for (int l = std::max(-1, j - 2); l <= std::min(blocks.j_max(), j + 2); ++l)
        acc += lp_block(blocks, f, l);
    return acc;
}

PhysicalField square_function(const LPBlockSet& blocks, const SpectralField& f, bool tilde) {
    PhysicalField acc(f.grid());
    for (int j = -1; j <= blocks.j_max(); ++j) {
        SpectralField part = tilde ? lp_tilde_block(blocks, f, j) : lp_block(blocks, f, j);
        PhysicalField ph = to_physical(part);
        for (std::size_t i = 0; i < acc.data().size(); ++i)
            acc.data()[i] += ph.data()[i] * ph.data()[i];
    }
    for (auto& v : acc.data()) v = std::sqrt(v);
    return acc;
}

SpectralField random_full_spectrum_field(const TorusGrid& grid, RngStream& rng) {
    SpectralField f(grid);
    int m = grid.max_mode();
    for (int k1 = -m; k1 <= m; ++k1) {
        for (int k2 = -m; k2 <= m; ++k2) {
            if (k1 < 0 || (k1 == 0 && k2 <= 0)) continue;
            std::complex<double> z(rng.normal(), rng.normal());
            f.at(k1, k2) = z;
            f.at(-k1, -k2) = std::conj(z);
        }
    }
    return f;
}

BernsteinReport bernstein_check(const LPBlockSet& blocks, int ensemble_size, int j,
                                double beta, double p, double q, std::uint64_t seed,
                                double ceiling) {
    if (ensemble_size <= 0)
        throw std::invalid_argument("bernstein_check: empty ensemble");
    if (!(p >= 1.0 && (std::isinf(q) || q >= p)))
        throw std::invalid_argument("bernstein_check: need 1 <= p <= q <= inf");

    BernsteinReport rep;
    rep.j = j;
    rep.beta = beta;
    rep.p = p;
    rep.q = q;
    rep.ensemble = ensemble_size;
    rep.ceiling = ceiling;

    double invp = 1.0 / p;
    double invq = std::isinf(q) ? 0.0 : 1.0 / q;
    double scale_block = std::pow(2.0, j * (beta + 2.0 * (invp - invq)));
    double scale_lower = std::pow(2.0, j * beta);

    RngStream rng(seed, "bernstein");
    for (int e = 0; e < ensemble_size; ++e) {
        SpectralField g = random_full_spectrum_field(blocks.grid(), rng);

        SpectralField bj = lp_block(blocks, g, j);
        double bj_p = lebesgue_norm(to_physical(bj), p);
        double bj_q = lebesgue_norm(to_physical(bj), q);
        double lbj_q = lebesgue_norm(to_physical(fractional_laplacian(bj, beta)), q);
        if (lbj_q > 0.0)
            rep.max_lower = std::max(rep.max_lower, scale_lower * bj_q / lbj_q);
        if (bj_p > 0.0)
            rep.max_upper = std::max(rep.max_upper, lbj_q / (scale_block * bj_p));

        SpectralField sj = lp_lowpass(blocks, g, j);
        double sj_p = lebesgue_norm(to_physical(sj), p);
        double lsj_q = lebesgue_norm(to_physical(fractional_laplacian(sj, beta)), q);
        if (sj_p > 0.0)
            rep.max_lowpass = std::max(rep.max_lowpass, lsj_q / (scale_block * sj_p));
    }
    rep.ok = rep.max_lower <= ceiling && rep.max_upper <= ceiling && rep.max_lowpass <= ceiling;
    return rep;
}

} // namespace sqglab
