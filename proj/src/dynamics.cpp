#include "sqglab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sqglab {

void SqgParams::validate() const {
    if (!(gamma > 1.0 && gamma < 2.0))
        throw std::invalid_argument("SqgParams: (H1) requires 1 < gamma < 2");
    if (kappa <= 0.0)
        throw std::invalid_argument("SqgParams: kappa must be positive");
    if (eps_viscosity < 0.0)
        throw std::invalid_argument("SqgParams: eps_viscosity must be nonnegative");
    double scale = std::max(1.0, forcing.steady.max_abs());
    if (std::abs(forcing.steady.at(0, 0)) > 1e-13 * scale)
        throw std::invalid_argument("SqgParams: forcing must be mean-zero");
    if (forcing.oscillatory) {
        if (forcing.oscillatory->period <= 0.0)
            throw std::invalid_argument("SqgParams: forcing period must be positive");
        double a = std::max(1.0, forcing.oscillatory->amplitude.max_abs());
        if (std::abs(forcing.oscillatory->amplitude.at(0, 0)) > 1e-13 * a)
            throw std::invalid_argument("SqgParams: oscillatory forcing must be mean-zero");
    }
}

SpectralField Trajectory::interpolate(double s) const {
    if (samples.empty()) throw std::runtime_error("Trajectory: empty");
    if (samples.size() == 1 || s <= t0) return samples.front();
    if (s >= t_end()) return samples.back();
    double u = (s - t0) / dt;
    std::size_t i = std::min(static_cast<std::size_t>(u), samples.size() - 2);
    double w = u - static_cast<double>(i);
    SpectralField out = samples[i];
    out *= (1.0 - w);
    SpectralField hi = samples[i + 1];
    hi *= w;
    out += hi;
    return out;
}

Trajectory& Trajectory::operator+=(const Trajectory& o) {
    if (samples.size() != o.samples.size())
        throw std::invalid_argument("Trajectory: sample count mismatch");
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] += o.samples[i];
    return *this;
}

Trajectory& Trajectory::operator*=(double a) {
    for (auto& s : samples) s *= a;
    return *this;
}

Trajectory Trajectory::operator-(const Trajectory& o) const {
    if (samples.size() != o.samples.size())
        throw std::invalid_argument("Trajectory: sample count mismatch");
    Trajectory out = *this;
    for (std::size_t i = 0; i < samples.size(); ++i) out.samples[i] -= o.samples[i];
    return out;
}

Trajectory Trajectory::mapped(const std::vector<double>& table) const {
    Trajectory out = *this;
    for (auto& s : out.samples) {
        auto& c = s.data();
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= table[i];
    }
    return out;
}

void check_finite(const SpectralField& f, const std::string& where) {
    const TorusGrid& g = f.grid();
    for (int i1 = 0; i1 < g.n; ++i1)
        for (int i2 = 0; i2 < g.n; ++i2) {
            const auto& z = f.at_index(i1, i2);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                char buf[128];
                std::snprintf(buf, sizeof(buf), "%s: non-finite value at mode (%d,%d)",
                              where.c_str(), g.wavenumber(i1), g.wavenumber(i2));
                throw NonFiniteFieldError(buf);
            }
        }
}

ExponentialStepper::ExponentialStepper(const TorusGrid& grid, std::vector<double> symbol,
                                       StepperConfig cfg)
    : grid_(grid), cfg_(cfg) {
    if (cfg_.dt <= 0.0) throw std::invalid_argument("StepperConfig: dt must be positive");
    ehalf_.resize(symbol.size());
    efull_.resize(symbol.size());
    for (std::size_t i = 0; i < symbol.size(); ++i) {
        ehalf_[i] = std::exp(-0.5 * cfg_.dt * symbol[i]);
        efull_[i] = std::exp(-cfg_.dt * symbol[i]);
    }
}

namespace {

inline void mul_table(SpectralField& f, const std::vector<double>& t) {
    auto& c = f.data();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= t[i];
}

} // namespace

SpectralField ExponentialStepper::step(const SpectralField& state, double t,
                                       const Nonlin& nonlin) const {
    const double dt = cfg_.dt;
    SpectralField n1(grid_), n2(grid_), n3(grid_), n4(grid_);

    if (cfg_.scheme == Scheme::ExpEuler) {
        nonlin(state, t, n1);
        SpectralField out = state;
        n1 *= dt;
        out += n1;
        mul_table(out, efull_);
        out.enforce_zero_mean_and_nyquist();
        return out;
    }

    // Integrating-factor RK4 on phi = e^{L t} theta.
    nonlin(state, t, n1);

    SpectralField u = state;
    {
        SpectralField tmp = n1;
        tmp *= 0.5 * dt;
        u += tmp;
        mul_table(u, ehalf_);
    }
    nonlin(u, t + 0.5 * dt, n2);

    u = state;
    mul_table(u, ehalf_);
    {
        SpectralField tmp = n2;
        tmp *= 0.5 * dt;
        u += tmp;
    }
    nonlin(u, t + 0.5 * dt, n3);

    u = state;
    mul_table(u, efull_);
    {
        SpectralField tmp = n3;
        tmp *= dt;
        mul_table(tmp, ehalf_);
        u += tmp;
    }
    nonlin(u, t + dt, n4);

    SpectralField out = state;
    mul_table(out, efull_);
    mul_table(n1, efull_);
    mul_table(n2, ehalf_);
    mul_table(n3, ehalf_);
    n1 *= dt / 6.0;
    n2 *= dt / 3.0;
    n3 *= dt / 3.0;
    n4 *= dt / 6.0;
    out += n1;
    out += n2;
    out += n3;
    out += n4;
    out.enforce_zero_mean_and_nyquist();
    return out;
}

std::vector<double> sqg_linear_symbol(const TorusGrid& grid, const SqgParams& params) {
    std::vector<double> sym(static_cast<std::size_t>(grid.size()), 0.0);
    for (int i1 = 0; i1 < grid.n; ++i1) {
        double k1 = grid.wavenumber(i1);
        for (int i2 = 0; i2 < grid.n; ++i2) {
            double k2 = grid.wavenumber(i2);
            double ksq = k1 * k1 + k2 * k2;
            if (ksq == 0.0) continue;
            sym[static_cast<std::size_t>(i1) * grid.n + i2] =
                params.kappa * std::pow(ksq, 0.5 * params.gamma) + params.eps_viscosity * ksq;
        }
    }
    return sym;
}

void sqg_nonlinear(const SpectralField& theta, double t, const SqgParams& params,
                   SpectralField& out) {
    if (params.advection_enabled) {
        out = advection_term(theta);
        out *= -1.0;
    } else {
        out = SpectralField(theta.grid());
    }
    out += params.forcing.at(t);
}

SpectralField sqg_step(const SpectralField& state, const SqgParams& params,
                       const StepperConfig& cfg, double t) {
    check_finite(state, "sqg_step");
    ExponentialStepper stepper(state.grid(), sqg_linear_symbol(state.grid(), params), cfg);
    return stepper.step(state, t, [&](const SpectralField& s, double tt, SpectralField& o) {
        sqg_nonlinear(s, tt, params, o);
    });
}

namespace {

DiagnosticsRow make_row(double t, const SpectralField& f, const DiagnosticsSpec& ds) {
    DiagnosticsRow r;
    r.t = t;
    r.l2proxy = sobolev_norm(f, 0.0);
    r.hsigma = sobolev_norm(f, ds.sigma);
    PhysicalField ph = to_physical(f);
    r.lp = lebesgue_norm(ph, ds.p);
    r.linf = ph.max_abs();
    return r;
}

void cfl_advisory(const SpectralField& theta0, const StepperConfig& cfg) {
    VelocityField u = riesz_velocity(theta0);
    double umax = std::max(u.u1.max_abs(), u.u2.max_abs());
    double kmax = theta0.grid().dealias_cutoff();
    if (cfg.dt * umax * kmax > 0.5)
        std::fprintf(stderr,
                     "[sqglab] advisory: dt * |u|_inf * k_max = %.3g exceeds 0.5; "
                     "consider a smaller dt\n",
                     cfg.dt * umax * kmax);
}

} // namespace

IntegrateResult integrate(const SpectralField& theta0, const SqgParams& params,
                          const StepperConfig& cfg, double t_span, int sample_every,
                          const DiagnosticsSpec& ds) {
    if (t_span <= 0.0) throw std::invalid_argument("integrate: t_span must be positive");
    if (sample_every < 1) throw std::invalid_argument("integrate: sample_every must be >= 1");
    params.validate();
    check_finite(theta0, "integrate");

    SpectralField theta = theta0;
    dealias(theta);
    theta.enforce_zero_mean_and_nyquist();
    cfl_advisory(theta, cfg);

    long steps = std::lround(t_span / cfg.dt);
    if (steps < 1) steps = 1;

    ExponentialStepper stepper(theta.grid(), sqg_linear_symbol(theta.grid(), params), cfg);
    auto nonlin = [&](const SpectralField& s, double tt, SpectralField& o) {
        sqg_nonlinear(s, tt, params, o);
    };

    IntegrateResult res;
    res.traj.t0 = 0.0;
    res.traj.dt = cfg.dt * sample_every;
    res.traj.samples.push_back(theta);
    res.rows.push_back(make_row(0.0, theta, ds));

    // Trapezoid bookkeeping for the per-sample energy-balance residual.
    double e_prev = std::pow(sobolev_norm(theta, 0.0), 2);
    double d_prev = std::pow(sobolev_norm(theta, 0.5 * params.gamma), 2);
    double d1_prev = std::pow(sobolev_norm(theta, 1.0), 2);
    double w_prev = inner_product(params.forcing.at(0.0), theta);

    for (long i = 1; i <= steps; ++i) {
        double t = cfg.dt * static_cast<double>(i - 1);
        theta = stepper.step(theta, t, nonlin);
        if (!theta.all_finite()) check_finite(theta, "integrate");
        if (i % sample_every == 0 || i == steps) {
            double ts = cfg.dt * static_cast<double>(i);
            res.traj.samples.push_back(theta);
            DiagnosticsRow row = make_row(ts, theta, ds);
            double e = row.l2proxy * row.l2proxy;
            double d = std::pow(sobolev_norm(theta, 0.5 * params.gamma), 2);
            double d1 = std::pow(sobolev_norm(theta, 1.0), 2);
            double w = inner_product(params.forcing.at(ts), theta);
            double h = ts - res.rows.back().t;
            row.energy_residual = e - e_prev +
                                  h * (params.kappa * (d + d_prev) +
                                       params.eps_viscosity * (d1 + d1_prev) - (w + w_prev));
            e_prev = e;
            d_prev = d;
            d1_prev = d1;
            w_prev = w;
            res.rows.push_back(row);
        }
    }
    return res;
}

AttractorSample attractor_sample(const SqgParams& params, const StepperConfig& cfg,
                                 double spinup, double window, std::uint64_t seed,
                                 int sample_every, const DiagnosticsSpec& ds, double ic_norm) {
    TorusGrid grid = params.forcing.steady.grid();
    RngStream rng(seed, "attractor-ic");
    SpectralField theta0 = random_field(grid, rng, 4, ds.sigma, ic_norm);

    AttractorSample out;
    SpectralField theta = theta0;
    if (spinup > 0.0) {
        IntegrateResult spin = integrate(theta0, params, cfg, spinup, sample_every, ds);
        theta = spin.traj.samples.back();

        // Settled iff the running max of |theta|_Hsigma drifts < 1% over the
        // final third of spin-up.
        double run_max = 0.0, max_at_two_thirds = 0.0;
        std::size_t cut = (2 * spin.rows.size()) / 3;
        for (std::size_t i = 0; i < spin.rows.size(); ++i) {
            run_max = std::max(run_max, spin.rows[i].hsigma);
            if (i == cut) max_at_two_thirds = run_max;
        }
        out.theta_hsigma_max = run_max;
        out.drift = run_max > 0.0 ? (run_max - max_at_two_thirds) / run_max : 0.0;
        out.settled = out.drift < 0.01;
    } else {
        out.settled = true;
    }

    IntegrateResult win = integrate(theta, params, cfg, window, sample_every, ds);
    out.window = std::move(win.traj);
    return out;
}

double steady_residual(const SpectralField& theta, const SqgParams& params, double sigma) {
    SpectralField r = fractional_laplacian(theta, params.gamma);
    r *= params.kappa;
    if (params.eps_viscosity > 0.0) {
        SpectralField visc = fractional_laplacian(theta, 2.0);
        visc *= params.eps_viscosity;
        r += visc;
    }
    if (params.advection_enabled) r += advection_term(theta);
    r -= params.forcing.at(0.0);
    return sobolev_norm(r, sigma - params.gamma);
}

SteadyStateResult steady_state_find(const SqgParams& params, const StepperConfig& cfg,
                                    double tol, double t_max, double sigma,
                                    const SpectralField* theta0) {
    if (params.forcing.time_dependent())
        throw std::invalid_argument("steady_state_find: forcing must be time-independent");
    params.validate();

    SpectralField theta = theta0 ? *theta0
                                 : fractional_laplacian(params.forcing.steady, -params.gamma) *
                                       (1.0 / params.kappa);
    dealias(theta);

    SteadyStateResult res;
    res.state = theta;
    res.residual = steady_residual(theta, params, sigma);
    if (res.residual < tol) {
        res.converged = true;
        return res;
    }

    ExponentialStepper stepper(theta.grid(), sqg_linear_symbol(theta.grid(), params), cfg);
    auto nonlin = [&](const SpectralField& s, double tt, SpectralField& o) {
        sqg_nonlinear(s, tt, params, o);
    };

    const int check_every = 50;
    long steps = std::lround(t_max / cfg.dt);
    for (long i = 1; i <= steps; ++i) {
        theta = stepper.step(theta, cfg.dt * static_cast<double>(i - 1), nonlin);
        if (i % check_every == 0 || i == steps) {
            double r = steady_residual(theta, params, sigma);
            res.t_used = cfg.dt * static_cast<double>(i);
            if (r < res.residual) {
                res.state = theta;
                res.residual = r;
            }
            if (r < tol) {
                res.converged = true;
                return res;
            }
        }
    }
    return res;
}

PeriodicOrbitResult periodic_orbit_find(const SqgParams& params, const StepperConfig& cfg,
                                        double tol, int max_iters, double sigma, double tau_f,
                                        int orbit_samples) {
    params.validate();
    if (tau_f <= 0.0) {
        if (!params.forcing.oscillatory)
            throw std::invalid_argument("periodic_orbit_find: tau_f required for "
                                        "time-independent forcing");
        tau_f = params.forcing.oscillatory->period;
    }

    // dt adjusted so an integer number of steps spans one period exactly.
    StepperConfig pcfg = cfg;
    long per_steps = std::max(1l, std::lround(std::ceil(tau_f / cfg.dt)));
    pcfg.dt = tau_f / static_cast<double>(per_steps);

    TorusGrid grid = params.forcing.steady.grid();
    ExponentialStepper stepper(grid, sqg_linear_symbol(grid, params), pcfg);
    auto nonlin = [&](const SpectralField& s, double tt, SpectralField& o) {
        sqg_nonlinear(s, tt, params, o);
    };

    auto period_map = [&](const SpectralField& start, double t_start) {
        SpectralField s = start;
        for (long i = 0; i < per_steps; ++i)
            s = stepper.step(s, t_start + pcfg.dt * static_cast<double>(i), nonlin);
        return s;
    };

    // Spin up a few periods from the linear response before iterating.
    SpectralField theta =
        fractional_laplacian(params.forcing.steady, -params.gamma) * (1.0 / params.kappa);
    dealias(theta);
    for (int i = 0; i < 5; ++i) theta = period_map(theta, 0.0);

    PeriodicOrbitResult res;
    for (int it = 0; it < max_iters; ++it) {
        SpectralField next = period_map(theta, 0.0);
        double r = sobolev_norm(next - theta, sigma);
        res.residuals.push_back(r);
        theta = next;
        if (r < tol) {
            res.converged = true;
            break;
        }
    }

    // One period of the converged (or best) orbit.
    int every = std::max(1l, per_steps / std::max(1, orbit_samples));
    res.orbit.t0 = 0.0;
    res.orbit.dt = pcfg.dt * every;
    res.orbit.samples.push_back(theta);
    SpectralField s = theta;
    for (long i = 0; i < per_steps; ++i) {
        s = stepper.step(s, pcfg.dt * static_cast<double>(i), nonlin);
        if ((i + 1) % every == 0 || i + 1 == per_steps)
            res.orbit.samples.push_back(s);
    }
    return res;
}

ResidualSeries apriori_bound_check(const Trajectory& traj, const SqgParams& params,
                                   double tolerance) {
    ResidualSeries out;
    if (traj.samples.size() < 2) {
        out.pass = true;
        return out;
    }
    double cumulative = 0.0;
    double e_prev = 0.0, d_prev = 0.0, d1_prev = 0.0, w_prev = 0.0;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const SpectralField& th = traj.samples[i];
        double t = traj.time(i);
        double e = std::pow(sobolev_norm(th, 0.0), 2);
        double d = std::pow(sobolev_norm(th, 0.5 * params.gamma), 2);
        double d1 = std::pow(sobolev_norm(th, 1.0), 2);
        double w = inner_product(params.forcing.at(t), th);
        if (i > 0) {
            double r = e - e_prev + traj.dt * (params.kappa * (d + d_prev) +
                                               params.eps_viscosity * (d1 + d1_prev) -
                                               (w + w_prev));
            out.residuals.push_back(r);
            cumulative += r;
            out.max_abs = std::max(out.max_abs, std::abs(cumulative));
        }
        e_prev = e;
        d_prev = d;
        d1_prev = d1;
        w_prev = w;
    }
    out.pass = out.max_abs <= tolerance;
    return out;
}

} // namespace sqglab
