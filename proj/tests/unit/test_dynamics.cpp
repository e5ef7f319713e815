#include <doctest.h>

#include <cmath>

#include "sqglab/dynamics.hpp"

using namespace sqglab;

namespace {

SpectralField cosine(const TorusGrid& g, int k1, int k2, double amp = 1.0) {
    SpectralField f(g);
    f.at(k1, k2) = 0.5 * amp;
    f.at(-k1, -k2) = 0.5 * amp;
    return f;
}

Forcing lowmode(const TorusGrid& g, double amp) {
    SpectralField f(g);
    f.at(1, 0) = 0.5 * amp;
    f.at(-1, 0) = 0.5 * amp;
    f.at(1, 1) = std::complex<double>(0.0, -0.5 * amp);
    f.at(-1, -1) = std::complex<double>(0.0, 0.5 * amp);
    return Forcing{f, {}};
}

SqgParams default_params(const TorusGrid& g, double kappa = 1.0, double gamma = 1.5) {
    SqgParams p;
    p.kappa = kappa;
    p.gamma = gamma;
    p.forcing = Forcing::zero(g);
    return p;
}

} // namespace

TEST_CASE("sqg_step: pure cosine decays at the exact linear rate") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    StepperConfig cfg{1e-2, Scheme::IfRk4};
    SpectralField theta = cosine(g, 1, 0);
    for (int i = 0; i < 10; ++i) theta = sqg_step(theta, p, cfg, 0.1 * i);
    // u.grad(theta) = 0 for a single mode, so the decay is exactly e^{-kappa t}
    CHECK(std::abs(theta.at(1, 0).real() - 0.5 * std::exp(-0.1)) < 1e-12);
}

TEST_CASE("sqg_step: zero stays zero, non-finite states are named") {
    TorusGrid g(16);
    SqgParams p = default_params(g);
    StepperConfig cfg{1e-2, Scheme::IfRk4};
    SpectralField z(g);
    CHECK(sqg_step(z, p, cfg).max_abs() == 0.0);

    SpectralField bad(g);
    bad.at(2, 1) = std::numeric_limits<double>::quiet_NaN();
    bad.at(-2, -1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(sqg_step(bad, p, cfg), doctest::Contains("(2,1)"),
                         NonFiniteFieldError);
}

TEST_CASE("sqg_step: Richardson order matches the scheme") {
    TorusGrid g(32);
    SqgParams p = default_params(g, 0.5);
    p.forcing = lowmode(g, 0.3);
    RngStream rng(3, "order");
    SpectralField theta0 = random_field(g, rng, 4, 1.0, 0.5);

    auto advance = [&](Scheme scheme, double dt, double T) {
        StepperConfig cfg{dt, scheme};
        SpectralField s = theta0;
        long n = std::lround(T / dt);
        for (long i = 0; i < n; ++i) s = sqg_step(s, p, cfg, dt * i);
        return s;
    };

    const double T = 0.1;
    SpectralField ref = advance(Scheme::IfRk4, T / 256, T);
    auto err = [&](Scheme scheme, double dt) {
        SpectralField s = advance(scheme, dt, T);
        return sobolev_norm(s - ref, 0.0);
    };

    double r4 = err(Scheme::IfRk4, T / 8) / err(Scheme::IfRk4, T / 16);
    CHECK(r4 > 10.0);  // 4th order: ratio ~ 16
    CHECK(r4 < 24.0);

    double r1 = err(Scheme::ExpEuler, T / 8) / err(Scheme::ExpEuler, T / 16);
    CHECK(r1 > 1.6);  // 1st order: ratio ~ 2
    CHECK(r1 < 2.6);
}

TEST_CASE("integrate: linear decay endpoint within 1e-6 at dt = 1e-3") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    StepperConfig cfg{1e-3, Scheme::IfRk4};
    IntegrateResult res = integrate(cosine(g, 1, 0), p, cfg, 1.0, 20);
    double expect = std::exp(-1.0) / std::sqrt(2.0);
    CHECK(std::abs(sobolev_norm(res.traj.samples.back(), 1.0) - expect) < 1e-6);
}

TEST_CASE("integrate: mean stays zero and L2-proxy is monotone when f = 0") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    StepperConfig cfg{5e-3, Scheme::IfRk4};
    RngStream rng(5, "decay");
    SpectralField theta0 = random_field(g, rng, 4, 1.0, 1.0);
    IntegrateResult res = integrate(theta0, p, cfg, 1.0, 10);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& s : res.traj.samples) {
        CHECK(std::abs(s.at(0, 0)) < 1e-13);
        double e = sobolev_norm(s, 0.0);
        CHECK(e <= prev * (1.0 + 1e-13));
        prev = e;
    }
}

TEST_CASE("integrate: maximum-principle bound with configured constant 1") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    p.forcing = lowmode(g, 0.1);
    StepperConfig cfg{5e-3, Scheme::IfRk4};
    RngStream rng(7, "maxprinciple");
    SpectralField theta0 = random_field(g, rng, 4, 1.0, 1.0);
    DiagnosticsSpec ds;
    IntegrateResult res = integrate(theta0, p, cfg, 4.0, 10, ds);

    double f_lp = lebesgue_norm(to_physical(p.forcing.steady), ds.p) / p.kappa;
    double theta0_lp = lebesgue_norm(to_physical(theta0), ds.p);
    double bound = std::max(theta0_lp, f_lp) * 1.1;
    for (const auto& row : res.rows) CHECK(row.lp <= bound);
}

TEST_CASE("attractor_sample: zero forcing collapses to the origin") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    StepperConfig cfg{1e-2, Scheme::IfRk4};
    AttractorSample att = attractor_sample(p, cfg, 20.0, 1.0, 42, 10);
    CHECK(att.settled);
    for (const auto& s : att.window.samples) CHECK(sobolev_norm(s, 1.0) < 1e-6);
}

TEST_CASE("attractor_sample: absorbing bound and seed-insensitive statistics") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    p.forcing = lowmode(g, 0.1);
    StepperConfig cfg{5e-3, Scheme::IfRk4};

    AttractorSample a = attractor_sample(p, cfg, 20.0, 2.0, 1, 10);
    AttractorSample b = attractor_sample(p, cfg, 20.0, 2.0, 2, 10);
    CHECK(a.settled);
    CHECK(b.settled);

    double f_proxy = sobolev_norm(p.forcing.steady, -0.75) / p.kappa;
    double mean_a = 0.0, mean_b = 0.0;
    for (const auto& s : a.window.samples) {
        CHECK(sobolev_norm(s, 0.0) <= f_proxy * 1.05 + 1e-9);
        mean_a += sobolev_norm(s, 0.0);
    }
    for (const auto& s : b.window.samples) mean_b += sobolev_norm(s, 0.0);
    mean_a /= static_cast<double>(a.window.samples.size());
    mean_b /= static_cast<double>(b.window.samples.size());
    CHECK(mean_a == doctest::Approx(mean_b).epsilon(0.2));
}

TEST_CASE("steady_state_find: constructed fixed point is recognized") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    p.forcing = Forcing{cosine(g, 1, 0, p.kappa), {}};
    StepperConfig cfg{5e-3, Scheme::IfRk4};
    SpectralField guess = cosine(g, 1, 0);
    SteadyStateResult res = steady_state_find(p, cfg, 1e-10, 1.0, 1.0, &guess);
    CHECK(res.converged);
    CHECK(res.residual < 1e-10);
}

TEST_CASE("steady_state_find: zero forcing fixes the origin") {
    TorusGrid g(16);
    SqgParams p = default_params(g);
    StepperConfig cfg{1e-2, Scheme::IfRk4};
    SteadyStateResult res = steady_state_find(p, cfg, 1e-12, 1.0);
    CHECK(res.converged);
    CHECK(res.state.max_abs() < 1e-12);
}

TEST_CASE("steady_state_find: distance to the linear response is O(a^2)") {
    TorusGrid g(32);
    StepperConfig cfg{5e-3, Scheme::IfRk4};
    auto second_order_part = [&](double a) {
        SqgParams p = default_params(g);
        p.forcing = lowmode(g, a);
        SteadyStateResult res = steady_state_find(p, cfg, 1e-11, 60.0);
        REQUIRE(res.converged);
        SpectralField lin = fractional_laplacian(p.forcing.steady, -p.gamma);
        lin *= 1.0 / p.kappa;
        return sobolev_norm(res.state - lin, 0.0);
    };
    double e1 = second_order_part(0.05);
    double e2 = second_order_part(0.1);
    CHECK(e2 / e1 > 3.0);  // quadratic scaling: ratio ~ 4
    CHECK(e2 / e1 < 5.5);
}

TEST_CASE("periodic_orbit_find: steady forcing collapses to the fixed point") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    p.forcing = lowmode(g, 0.1);
    StepperConfig cfg{5e-3, Scheme::IfRk4};
    PeriodicOrbitResult res = periodic_orbit_find(p, cfg, 1e-9, 60, 1.0, 1.0);
    CHECK(res.converged);
    // degenerate period: the orbit is the steady state
    for (const auto& s : res.orbit.samples)
        CHECK(sobolev_norm(s - res.orbit.samples.front(), 1.0) < 1e-8);
    CHECK(steady_residual(res.orbit.samples.front(), p, 1.0) < 1e-7);
}

TEST_CASE("periodic_orbit_find: small oscillatory forcing closes an orbit") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    p.forcing = Forcing::zero(g);
    p.forcing.oscillatory = TimePeriodicForcing{cosine(g, 1, 0, 0.05), 1.0};
    StepperConfig cfg{2e-3, Scheme::IfRk4};
    PeriodicOrbitResult res = periodic_orbit_find(p, cfg, 1e-8, 60);
    CHECK(res.converged);
    CHECK(sobolev_norm(res.orbit.samples.back() - res.orbit.samples.front(), 1.0) < 2e-8);
    // residual history contracts after the first iterate
    for (std::size_t i = 2; i < res.residuals.size(); ++i)
        CHECK(res.residuals[i] <= res.residuals[i - 1] * 1.01);
    // orbit is genuinely nonzero
    CHECK(sobolev_norm(res.orbit.samples.front(), 0.0) > 1e-4);
}

TEST_CASE("periodic_orbit_find: zero forcing yields the zero orbit") {
    TorusGrid g(16);
    SqgParams p = default_params(g);
    StepperConfig cfg{1e-2, Scheme::IfRk4};
    PeriodicOrbitResult res = periodic_orbit_find(p, cfg, 1e-10, 30, 1.0, 1.0);
    CHECK(res.converged);
    for (const auto& s : res.orbit.samples) CHECK(s.max_abs() < 1e-10);
}

TEST_CASE("apriori_bound_check: exact balance for linear decay") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    StepperConfig cfg{1e-3, Scheme::IfRk4};
    IntegrateResult res = integrate(cosine(g, 1, 0), p, cfg, 1.0, 1);
    ResidualSeries series = apriori_bound_check(res.traj, p, 1e-6);
    CHECK(series.pass);
    CHECK(series.max_abs < 1e-6);

    Trajectory zero;
    zero.t0 = 0.0;
    zero.dt = 0.1;
    zero.samples.assign(5, SpectralField(g));
    ResidualSeries zs = apriori_bound_check(zero, p, 1e-12);
    CHECK(zs.max_abs == 0.0);
}

TEST_CASE("apriori_bound_check: residual scales at second order in the sample step") {
    TorusGrid g(32);
    SqgParams p = default_params(g);
    p.forcing = lowmode(g, 0.2);
    RngStream rng(11, "quad");
    SpectralField theta0 = random_field(g, rng, 4, 1.0, 0.5);

    auto residual_at = [&](double dt) {
        StepperConfig cfg{dt, Scheme::IfRk4};
        IntegrateResult res = integrate(theta0, p, cfg, 0.5, 1);
        return apriori_bound_check(res.traj, p, 1.0).max_abs;
    };
    double ratio = residual_at(4e-3) / residual_at(2e-3);
    CHECK(ratio > 3.0);  // trapezoid: ratio ~ 4
    CHECK(ratio < 5.0);
}
