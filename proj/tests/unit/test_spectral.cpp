#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sqglab/spectral_ops.hpp"

using namespace sqglab;

namespace {

SpectralField cosine(const TorusGrid& g, int k1, int k2, double amp = 1.0) {
    SpectralField f(g);
    f.at(k1, k2) = 0.5 * amp;
    f.at(-k1, -k2) = 0.5 * amp;
    return f;
}

SpectralField sine(const TorusGrid& g, int k1, int k2, double amp = 1.0) {
    SpectralField f(g);
    f.at(k1, k2) = std::complex<double>(0.0, -0.5 * amp);
    f.at(-k1, -k2) = std::complex<double>(0.0, 0.5 * amp);
    return f;
}

double max_diff(const PhysicalField& a, const PhysicalField& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

double max_coeff_diff(const SpectralField& a, const SpectralField& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

// Dense convolution oracle for the advection term: (u.grad theta)^(k)
// = sum_q u_hat(k-q) . (i q) theta_hat(q), then the same dealiasing and
// mean-zeroing as the implementation.
SpectralField advection_by_convolution(const SpectralField& theta) {
    const TorusGrid& g = theta.grid();
    int m = g.max_mode();
    SpectralField u1(g), u2(g);
    riesz_velocity_spectral(theta, u1, u2);
    SpectralField out(g);
    const std::complex<double> I(0.0, 1.0);
    for (int k1 = -m; k1 <= m; ++k1)
        for (int k2 = -m; k2 <= m; ++k2) {
            std::complex<double> acc = 0.0;
            for (int q1 = -m; q1 <= m; ++q1)
                for (int q2 = -m; q2 <= m; ++q2) {
                    int p1 = k1 - q1, p2 = k2 - q2;
                    if (p1 < -m || p1 > m || p2 < -m || p2 > m) continue;
                    std::complex<double> grad =
                        I * (static_cast<double>(q1) * u1.at(p1, p2) +
                             static_cast<double>(q2) * u2.at(p1, p2));
                    acc += grad * theta.at(q1, q2);
                }
            out.at(k1, k2) = acc;
        }
    dealias(out);
    out.enforce_zero_mean_and_nyquist();
    return out;
}

} // namespace

TEST_CASE("to_physical: single cosine mode lands on collocation values") {
    TorusGrid g(32);
    PhysicalField p = to_physical(cosine(g, 1, 0));
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            CHECK(p.at(i, j) == doctest::Approx(std::cos(g.coord(i))).epsilon(1e-12));
}

TEST_CASE("to_physical: zero coefficients give zero values") {
    TorusGrid g(16);
    PhysicalField p = to_physical(SpectralField(g));
    CHECK(p.max_abs() == 0.0);
}

TEST_CASE("to_spectral: sin(x2) hits (0,+-1) with -+i/2") {
    TorusGrid g(32);
    PhysicalField p(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) p.at(i, j) = std::sin(g.coord(j));
    SpectralField s = to_spectral(p);
    CHECK(std::abs(s.at(0, 1) - std::complex<double>(0.0, -0.5)) < 1e-13);
    CHECK(std::abs(s.at(0, -1) - std::complex<double>(0.0, 0.5)) < 1e-13);
    s.at(0, 1) = 0.0;
    s.at(0, -1) = 0.0;
    CHECK(s.max_abs() < 1e-13);
}

TEST_CASE("to_spectral: constants project to zero (mean removal)") {
    TorusGrid g(16);
    PhysicalField p(g);
    for (auto& v : p.data()) v = 3.7;
    CHECK(to_spectral(p).max_abs() < 1e-13);
}

TEST_CASE("transform round trip on random fields") {
    TorusGrid g(64);
    RngStream rng(7, "roundtrip");
    for (int trial = 0; trial < 10; ++trial) {
        SpectralField f = random_field(g, rng, 12, 1.0, 1.0);
        SpectralField back = to_spectral(to_physical(f));
        CHECK(max_coeff_diff(f, back) < 1e-12);
    }
}

TEST_CASE("fractional_laplacian: unit wavenumber is invariant") {
    TorusGrid g(16);
    SpectralField f = cosine(g, 1, 0);
    SpectralField out = fractional_laplacian(f, 1.5);
    CHECK(max_coeff_diff(out, f) < 1e-14);
}

TEST_CASE("fractional_laplacian: |k| = sqrt2 scales by 2^{3/4}") {
    TorusGrid g(16);
    SpectralField f = sine(g, 1, 1);
    SpectralField out = fractional_laplacian(f, 1.5);
    SpectralField expect = f;
    expect *= std::pow(2.0, 0.75);
    CHECK(max_coeff_diff(out, expect) < 1e-12);
    CHECK(std::pow(2.0, 0.75) == doctest::Approx(1.681793).epsilon(1e-6));
}

TEST_CASE("fractional_laplacian: inverse pair is the identity") {
    TorusGrid g(32);
    RngStream rng(11, "fraclap");
    SpectralField f = random_field(g, rng, 8, 0.0, 1.0);
    SpectralField out = fractional_laplacian(fractional_laplacian(f, -1.0), 1.0);
    CHECK(max_coeff_diff(out, f) < 1e-12);
}

TEST_CASE("fractional_laplacian composes: L^a L^b = L^{a+b}") {
    TorusGrid g(32);
    RngStream rng(13, "fraclap2");
    SpectralField f = random_field(g, rng, 8, 0.0, 1.0);
    SpectralField lhs = fractional_laplacian(fractional_laplacian(f, 0.6), 0.9);
    SpectralField rhs = fractional_laplacian(f, 1.5);
    CHECK(max_coeff_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("riesz_velocity: cos(x1) -> (0, sin(x1))") {
    TorusGrid g(32);
    VelocityField u = riesz_velocity(cosine(g, 1, 0));
    PhysicalField expect_u2 = to_physical(sine(g, 1, 0));
    CHECK(u.u1.max_abs() < 1e-13);
    CHECK(max_diff(u.u2, expect_u2) < 1e-12);
}

TEST_CASE("riesz_velocity: sin(x2) -> (cos(x2), 0)") {
    TorusGrid g(32);
    VelocityField u = riesz_velocity(sine(g, 0, 1));
    PhysicalField expect_u1 = to_physical(cosine(g, 0, 1));
    CHECK(max_diff(u.u1, expect_u1) < 1e-12);
    CHECK(u.u2.max_abs() < 1e-13);
}

TEST_CASE("riesz_velocity is divergence-free") {
    TorusGrid g(64);
    RngStream rng(17, "riesz");
    for (int trial = 0; trial < 5; ++trial) {
        SpectralField theta = random_field(g, rng, 10, 1.0, 1.0);
        SpectralField u1(g), u2(g);
        riesz_velocity_spectral(theta, u1, u2);
        double worst = 0.0;
        for (int k1 = -g.max_mode(); k1 <= g.max_mode(); ++k1)
            for (int k2 = -g.max_mode(); k2 <= g.max_mode(); ++k2)
                worst = std::max(worst, std::abs(static_cast<double>(k1) * u1.at(k1, k2) +
                                                 static_cast<double>(k2) * u2.at(k1, k2)));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("advection_term: single cosine mode self-cancels") {
    TorusGrid g(32);
    SpectralField adv = advection_term(cosine(g, 1, 0));
    CHECK(adv.max_abs() < 1e-14);
}

TEST_CASE("advection_term: skew symmetry <adv(theta), theta> = 0") {
    TorusGrid g(64);
    RngStream rng(19, "skew");
    for (int trial = 0; trial < 5; ++trial) {
        SpectralField theta = random_field(g, rng, 8, 1.0, 1.0);
        double pairing = inner_product(advection_term(theta), theta);
        CHECK(std::abs(pairing) < 1e-10);
    }
}

TEST_CASE("advection_term matches the dense convolution oracle") {
    TorusGrid g(16);
    SpectralField theta = cosine(g, 1, 0) + cosine(g, 0, 2);
    SpectralField fast = advection_term(theta);
    SpectralField slow = advection_by_convolution(theta);
    CHECK(max_coeff_diff(fast, slow) < 1e-10);

    RngStream rng(23, "convolution");
    SpectralField rnd = random_field(g, rng, 3, 0.0, 1.0);
    CHECK(max_coeff_diff(advection_term(rnd), advection_by_convolution(rnd)) < 1e-10);
}

TEST_CASE("sobolev_norm: cos(x1) has norm 1/sqrt2 for every sigma") {
    TorusGrid g(16);
    SpectralField f = cosine(g, 1, 0);
    for (double sigma : {-0.5, 0.0, 0.7, 1.0, 2.0})
        CHECK(sobolev_norm(f, sigma) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("sobolev_norm: sin(2 x1) at sigma = 1 weighs |k| = 2") {
    TorusGrid g(16);
    CHECK(sobolev_norm(sine(g, 2, 0), 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("sobolev_norm agrees with fractional_laplacian then sigma = 0") {
    TorusGrid g(32);
    RngStream rng(29, "sobolev");
    SpectralField f = random_field(g, rng, 9, 0.0, 2.0);
    double a = sobolev_norm(f, 0.5);
    double b = sobolev_norm(fractional_laplacian(f, 0.5), 0.0);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("lebesgue_norm: sup and exact integrals of cos(x1)") {
    TorusGrid g(32);
    PhysicalField p = to_physical(cosine(g, 1, 0));
    CHECK(lebesgue_norm(p, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lebesgue_norm(p, 2.0) ==
          doctest::Approx(std::sqrt(2.0 * M_PI * M_PI)).epsilon(1e-12));
}

TEST_CASE("lebesgue_norm: p = 4 against the high-resolution quadrature oracle") {
    TorusGrid g(32);
    PhysicalField p = to_physical(cosine(g, 1, 0));
    double val = lebesgue_norm(p, 4.0);

    TorusGrid fine(512);
    PhysicalField pf = to_physical(cosine(fine, 1, 0));
    double ref = lebesgue_norm(pf, 4.0);
    CHECK(val == doctest::Approx(ref).epsilon(1e-10));
    // analytic: (integral of cos^4 over T^2)^{1/4} = (3 pi^2 / 2)^{1/4}
    CHECK(val == doctest::Approx(std::pow(1.5 * M_PI * M_PI, 0.25)).epsilon(1e-12));
}

TEST_CASE("project_modes: cutoff keeps low modes and drops high ones") {
    TorusGrid g(16);
    SpectralField f = cosine(g, 1, 0) + cosine(g, 0, 3);
    SpectralField low = project_modes(f, 2.0);
    CHECK(max_coeff_diff(low, cosine(g, 1, 0)) < 1e-14);
    SpectralField all = project_modes(f, g.n / 2.0);
    CHECK(max_coeff_diff(all, f) < 1e-14);
}

TEST_CASE("project_modes never increases a Sobolev norm") {
    TorusGrid g(32);
    RngStream rng(31, "proj");
    for (int trial = 0; trial < 5; ++trial) {
        SpectralField f = random_field(g, rng, 10, 0.0, 1.0);
        for (double cutoff : {1.0, 3.0, 7.5}) {
            CHECK(sobolev_norm(project_modes(f, cutoff), 0.8) <=
                  sobolev_norm(f, 0.8) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("Plancherel: L2 quadrature equals 2 pi times the coefficient norm") {
    TorusGrid g(64);
    RngStream rng(37, "plancherel");
    SpectralField f = random_field(g, rng, 12, 0.0, 3.0);
    double quad = lebesgue_norm(to_physical(f), 2.0);
    double proxy = sobolev_norm(f, 0.0);
    CHECK(quad == doctest::Approx(2.0 * M_PI * proxy).epsilon(1e-10));
}

TEST_CASE("Gagliardo-Nirenberg with constant 1 on coefficient norms") {
    TorusGrid g(32);
    RngStream rng(41, "gn");
    for (int trial = 0; trial < 10; ++trial) {
        SpectralField f = random_field(g, rng, 10, 0.0, 1.0);
        double beta = 0.3 + 1.5 * (trial % 5) / 5.0;
        double alpha = beta * (trial % 3) / 3.0;
        double lhs = sobolev_norm(f, alpha);
        double rhs = std::pow(sobolev_norm(f, beta), alpha / beta) *
                     std::pow(sobolev_norm(f, 0.0), 1.0 - alpha / beta);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("reality and mean-zero invariants survive the operations") {
    TorusGrid g(32);
    RngStream rng(43, "invariants");
    SpectralField f = random_field(g, rng, 9, 1.0, 1.0);
    for (const SpectralField& out :
         {fractional_laplacian(f, 0.7), advection_term(f), project_modes(f, 5.0)}) {
        CHECK(out.reality_defect() < 1e-12);
        CHECK(std::abs(out.at(0, 0)) == 0.0);
    }
}

TEST_CASE("SQGF snapshot round trip and validation") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "sqglab_test_io";
    fs::create_directories(dir);
    std::string path = (dir / "field.sqgf").string();

    TorusGrid g(16);
    RngStream rng(47, "io");
    SpectralField f = random_field(g, rng, 4, 1.0, 1.0);
    save_field(f, path);
    SpectralField back = load_field(path);
    CHECK(back.grid().n == g.n);
    CHECK(max_coeff_diff(f, back) == 0.0);

    // corrupt magic
    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os << "XXXX";
    }
    CHECK_THROWS_AS(load_field(path), std::runtime_error);

    // violate mean-zero
    SpectralField bad = f;
    bad.at(0, 0) = 1.0;
    std::string bad_path = (dir / "bad.sqgf").string();
    save_field(bad, bad_path);
    CHECK_THROWS_AS(load_field(bad_path), std::runtime_error);
    fs::remove_all(dir);
}
