#include "sqglab/determining_form.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqglab {

BanachTrajectory::BanachTrajectory(Trajectory t, double sigma_, int m_, bool low_pass_)
    : traj(std::move(t)), sigma(sigma_), m(m_), low_pass(low_pass_) {
    if (low_pass) {
        LPBlockSet blocks(traj.grid(), BumpProfile::standard());
        for (const auto& s : traj.samples)
            if (sobolev_norm(lp_highpass(blocks, s, m - 1), 0.0) > 1e-10)
                throw std::invalid_argument(
                    "BanachTrajectory: low_pass set but T_{m-1} sample norm exceeds 1e-10");
    }
}

BanachTrajectory BanachTrajectory::constant(const SpectralField& f, double span,
                                            std::size_t samples, double sigma, int m) {
    if (samples < 2) throw std::invalid_argument("BanachTrajectory::constant: need >= 2 samples");
    Trajectory t;
    t.t0 = 0.0;
    t.dt = span / static_cast<double>(samples - 1);
    t.samples.assign(samples, f);
    return BanachTrajectory(std::move(t), sigma, m);
}

namespace {

double sup_hsigma(const Trajectory& t, double sigma) {
    double worst = 0.0;
    for (const auto& s : t.samples) worst = std::max(worst, sobolev_norm(s, sigma));
    return worst;
}

double sup_derivative_hsigma(const Trajectory& t, double sigma) {
    const auto& s = t.samples;
    double worst = 0.0;
    double inv2dt = 1.0 / (2.0 * t.dt);
    double invdt = 1.0 / t.dt;
    for (std::size_t i = 0; i < s.size(); ++i) {
        SpectralField d(t.grid());
        if (i == 0)
            d = (s[1] - s[0]) * invdt;
        else if (i + 1 == s.size())
            d = (s[i] - s[i - 1]) * invdt;
        else
            d = (s[i + 1] - s[i - 1]) * inv2dt;
        worst = std::max(worst, sobolev_norm(d, sigma));
    }
    return worst;
}

} // namespace

double x_norm(const BanachTrajectory& v) {
    if (v.traj.samples.size() < 2)
        throw std::invalid_argument("x_norm: need at least 2 samples");
    double weight = std::pow(2.0, -(2.0 + v.sigma) * v.m);
    return sup_hsigma(v.traj, v.sigma) + weight * sup_derivative_hsigma(v.traj, v.sigma);
}

double y_norm(const BanachTrajectory& v) {
    if (v.traj.samples.empty()) throw std::invalid_argument("y_norm: empty trajectory");
    return sup_hsigma(v.traj, v.sigma);
}

double radius_R(const SqgParams& sqg, double C) {
    double f_norm = sobolev_norm(sqg.forcing.steady, -0.5 * sqg.gamma) / sqg.kappa;
    return C * (1.0 + sqg.kappa) * (1.0 + f_norm) * (1.0 + f_norm);
}

void WMapConfig::validate(double mu) const {
    if (!(tol_forget > 0.0 && tol_forget < 1.0))
        throw std::invalid_argument("WMapConfig: tol_forget must be in (0,1)");
    if (window_end <= window_start)
        throw std::invalid_argument("WMapConfig: empty window");
    double need = std::log(1.0 / tol_forget) / mu;
    if (relax_time < need)
        throw std::invalid_argument("WMapConfig: relax_time below ln(1/tol_forget)/mu");
}

Trajectory w_map(const BanachTrajectory& v, const SqgParams& sqg, const NudgeParams& nudge,
                 const LPBlockSet& blocks, const StepperConfig& cfg, const WMapConfig& wcfg,
                 const SpectralField* w0) {
    wcfg.validate(nudge.mu);
    const TorusGrid& grid = v.traj.grid();

    // Land steps exactly on the v sample times: v.dt must be an integer
    // multiple of the integration dt.
    double vdt = v.traj.dt;
    long sub = std::max(1l, std::lround(std::ceil(vdt / cfg.dt - 1e-12)));
    double dt = vdt / static_cast<double>(sub);
    long relax_steps = std::lround(std::ceil(wcfg.relax_time / dt - 1e-12));

    StepperConfig icfg = cfg;
    icfg.dt = dt;
    const auto& sm = blocks.lowpass_table(nudge.m);
    std::vector<double> sym = sqg_linear_symbol(grid, sqg);
    for (std::size_t i = 0; i < sym.size(); ++i) sym[i] += nudge.mu * sm[i];
    ExponentialStepper stepper(grid, sym, icfg);

    auto nonlin = [&](const SpectralField& s, double tt, SpectralField& o) {
        sqg_nonlinear(s, tt, sqg, o);
        SpectralField vt = v.traj.interpolate(tt);
        auto& oc = o.data();
        const auto& vc = vt.data();
        for (std::size_t i = 0; i < oc.size(); ++i) oc[i] += nudge.mu * sm[i] * vc[i];
    };

    SpectralField w = w0 ? *w0 : SpectralField(grid);
    dealias(w);
    w.enforce_zero_mean_and_nyquist();

    double s = wcfg.window_start - dt * static_cast<double>(relax_steps);
    for (long i = 0; i < relax_steps; ++i) {
        w = stepper.step(w, s, nonlin);
        s += dt;
    }

    Trajectory out;
    out.t0 = wcfg.window_start;
    out.dt = vdt;
    out.samples.push_back(w);
    long window_steps = std::lround((wcfg.window_end - wcfg.window_start) / dt);
    for (long i = 0; i < window_steps; ++i) {
        w = stepper.step(w, s, nonlin);
        s += dt;
        if ((i + 1) % sub == 0) out.samples.push_back(w);
    }
    if (!w.all_finite()) check_finite(w, "w_map");
    return out;
}

LipschitzProbe w_map_lipschitz_probe(const BanachTrajectory& v1, const BanachTrajectory& v2,
                                     const SqgParams& sqg, const NudgeParams& nudge,
                                     const LPBlockSet& blocks, const StepperConfig& cfg,
                                     const WMapConfig& wcfg) {
    BanachTrajectory diff_v(v1.traj - v2.traj, v1.sigma, v1.m);
    LipschitzProbe probe;
    probe.dx = x_norm(diff_v);
    if (probe.dx <= 0.0)
        throw std::invalid_argument("w_map_lipschitz_probe: identical inputs");

    Trajectory w1 = w_map(v1, sqg, nudge, blocks, cfg, wcfg);
    Trajectory w2 = w_map(v2, sqg, nudge, blocks, cfg, wcfg);
    Trajectory dw = w1 - w2;

    const auto& sm = blocks.lowpass_table(nudge.m);
    BanachTrajectory smdw(dw.mapped(sm), v1.sigma, v1.m);
    probe.ratio_y = y_norm(smdw) / probe.dx;

    double sup_hm = 0.0;
    for (const auto& s : dw.samples) sup_hm = std::max(sup_hm, sobolev_norm(s, -0.5));
    probe.ratio_hminushalf = sup_hm / probe.dx;
    return probe;
}

DetFormRhs detform_rhs(const BanachTrajectory& v, const SpectralField& theta_star,
                       const SqgParams& sqg, const NudgeParams& nudge,
                       const LPBlockSet& blocks, const StepperConfig& cfg,
                       const WMapConfig& wcfg, int rhs_power) {
    if (rhs_power != 1 && rhs_power != 2)
        throw std::invalid_argument("detform_rhs: rhs_power must be 1 or 2");

    DetFormRhs out;
    out.w = w_map(v, sqg, nudge, blocks, cfg, wcfg);
    const auto& sm = blocks.lowpass_table(nudge.m);
    Trajectory smw = out.w.mapped(sm);
    BanachTrajectory diff(v.traj - smw, v.sigma, v.m);
    out.residual_x = x_norm(diff);
    out.lambda = rhs_power == 2 ? out.residual_x * out.residual_x : out.residual_x;

    SpectralField sm_star = theta_star;
    {
        auto& c = sm_star.data();
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= sm[i];
    }
    Trajectory rhs_traj = v.traj;
    for (auto& s : rhs_traj.samples) {
        s -= sm_star;
        s *= -out.lambda;
    }
    out.rhs = BanachTrajectory(std::move(rhs_traj), v.sigma, v.m);
    return out;
}

DetFormResult detform_integrate(const BanachTrajectory& v0, const SpectralField& theta_star,
                                const SqgParams& sqg, const NudgeParams& nudge,
                                const LPBlockSet& blocks, const StepperConfig& cfg,
                                const WMapConfig& wcfg, double tau_span, double dtau,
                                double tol, int rhs_power) {
    DetFormResult res;
    const auto& sm = blocks.lowpass_table(nudge.m);
    SpectralField sm_star = theta_star;
    {
        auto& c = sm_star.data();
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= sm[i];
    }
    auto dist_to_steady = [&](const BanachTrajectory& v) {
        Trajectory d = v.traj;
        for (auto& s : d.samples) s -= sm_star;
        return x_norm(BanachTrajectory(std::move(d), v.sigma, v.m));
    };

    double ball = 3.0 * radius_R(sqg, 1.0);
    res.inside_ball = dist_to_steady(v0) <= ball;
    if (!res.inside_ball)
        res.note = "v0 outside the 3R ball around S_m theta_star (C = 1); proceeding";

    BanachTrajectory v = v0;
    DetFormRhs k1 = detform_rhs(v, theta_star, sqg, nudge, blocks, cfg, wcfg, rhs_power);
    if (dtau <= 0.0)
        dtau = k1.lambda > 0.0 ? 0.1 / k1.lambda : 1.0;
    if (tau_span <= 0.0)
        tau_span = k1.lambda > 0.0 ? 50.0 / k1.lambda : 1.0;

    res.rows.push_back({0.0, k1.residual_x, dist_to_steady(v), k1.lambda});
    if (k1.residual_x < tol) {
        res.converged = true;
        res.v_final = v;
        return res;
    }

    long steps = std::max(1l, std::lround(tau_span / dtau));
    int increases = 0;
    double prev_residual = k1.residual_x;

    auto advance = [&](const BanachTrajectory& base, const BanachTrajectory& slope,
                       double h) {
        BanachTrajectory out = base;
        Trajectory scaled = slope.traj;
        scaled *= h;
        out.traj += scaled;
        return out;
    };

    for (long i = 0; i < steps; ++i) {
        double tau = dtau * static_cast<double>(i);
        // k1 already evaluated at v
        DetFormRhs k2 = detform_rhs(advance(v, k1.rhs, 0.5 * dtau), theta_star, sqg, nudge,
                                    blocks, cfg, wcfg, rhs_power);
        DetFormRhs k3 = detform_rhs(advance(v, k2.rhs, 0.5 * dtau), theta_star, sqg, nudge,
                                    blocks, cfg, wcfg, rhs_power);
        DetFormRhs k4 = detform_rhs(advance(v, k3.rhs, dtau), theta_star, sqg, nudge, blocks,
                                    cfg, wcfg, rhs_power);

        Trajectory incr = k1.rhs.traj;
        incr += k4.rhs.traj;
        Trajectory mid = k2.rhs.traj;
        mid += k3.rhs.traj;
        mid *= 2.0;
        incr += mid;
        incr *= dtau / 6.0;
        v.traj += incr;

        k1 = detform_rhs(v, theta_star, sqg, nudge, blocks, cfg, wcfg, rhs_power);
        res.rows.push_back({tau + dtau, k1.residual_x, dist_to_steady(v), k1.lambda});

        if (k1.residual_x < tol) {
            res.converged = true;
            break;
        }
        if (k1.residual_x > prev_residual) {
            if (++increases >= 10) {
                res.aborted = true;
                res.note = "residual increased over 10 consecutive steps";
                break;
            }
        } else {
            increases = 0;
        }
        prev_residual = k1.residual_x;
    }
    res.v_final = v;
    return res;
}

} // namespace sqglab
