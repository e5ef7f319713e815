#include "sqglab/nudging.hpp"

#include <limits>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqglab {

AdmissibilityReport check_hypotheses(const SqgParams& sqg, const NudgeParams& nudge,
                                     double g_lp, double g_sigma_inf) {
    // Structural hypotheses are hard errors.
    sqg.validate();  // (H1) among others
    if (!(nudge.sigma > 2.0 - sqg.gamma))
        throw std::invalid_argument("check_hypotheses: (H2) requires sigma > 2 - gamma");
    double two_over_p = 2.0 / nudge.p;
    if (!(1.0 - nudge.sigma < two_over_p && two_over_p < sqg.gamma - 1.0))
        throw std::invalid_argument(
            "check_hypotheses: (H3) requires 1 - sigma < 2/p < gamma - 1");

    AdmissibilityReport rep;
    auto push = [&](const std::string& name, double lhs, double rhs) {
        HypothesisCheck c;
        c.name = name;
        c.lhs = lhs;
        c.rhs = rhs;
        c.ok = lhs >= rhs;
        c.margin = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
        rep.checks.push_back(c);
        rep.thresholds_ok = rep.thresholds_ok && c.ok;
    };

    rep.checks.push_back({"H1", sqg.gamma, 0.0, 0.0, true});
    rep.checks.push_back({"H2", nudge.sigma, 2.0 - sqg.gamma, 0.0, true});
    rep.checks.push_back({"H3", two_over_p, sqg.gamma - 1.0, 0.0, true});

    // (H6): mu >= c0 kappa (G_Lp / kappa)^{gamma/(gamma-1-2/p)}
    double expo = sqg.gamma / (sqg.gamma - 1.0 - two_over_p);
    if (g_lp > 0.0) {
        rep.mu_threshold = nudge.c0 * sqg.kappa * std::pow(g_lp / sqg.kappa, expo);
        push("H6", nudge.mu, rep.mu_threshold);
    }

    // (H7) first part: 2^{gamma m} >= c0' mu / kappa
    double lhs7 = std::pow(2.0, sqg.gamma * nudge.m);
    double rhs7 = nudge.c0p * nudge.mu / sqg.kappa;
    push("H7a", lhs7, rhs7);
    rep.m_threshold = std::ceil(std::log2(std::max(rhs7, 1.0)) / sqg.gamma);

    // (H7) second part, in the primitive form 2^{m(1-2/p-sigma)} G_{sigma,inf}
    // <= c0'' G_Lp (the exponent 1-2/p-sigma is negative under (H3), so this
    // is a lower bound on m).
    if (g_sigma_inf > 0.0 && g_lp > 0.0) {
        double decay = std::pow(2.0, nudge.m * (1.0 - two_over_p - nudge.sigma));
        push("H7b", nudge.c0pp * g_lp, decay * g_sigma_inf);
        double need = std::log2(g_sigma_inf / (nudge.c0pp * g_lp)) /
                      (nudge.sigma + two_over_p - 1.0);
        rep.m_threshold = std::max(rep.m_threshold, std::ceil(need));
    }
    return rep;
}

namespace {

std::vector<double> nudged_symbol(const TorusGrid& grid, const SqgParams& sqg,
                                  double mu, const std::vector<double>& feedback_table) {
    std::vector<double> sym = sqg_linear_symbol(grid, sqg);
    for (std::size_t i = 0; i < sym.size(); ++i) sym[i] += mu * feedback_table[i];
    return sym;
}

} // namespace

SpectralField nudged_step(const SpectralField& state, const SpectralField& v_lo,
                          const SpectralField& v_mid, const SpectralField& v_hi,
                          const SqgParams& sqg, const NudgeParams& nudge,
                          const LPBlockSet& blocks, const StepperConfig& cfg, double t) {
    check_finite(state, "nudged_step");
    const TorusGrid& grid = state.grid();
    const auto& sm = blocks.lowpass_table(nudge.m);
    ExponentialStepper stepper(grid, nudged_symbol(grid, sqg, nudge.mu, sm), cfg);

    double t_hi = t + cfg.dt;
    auto nonlin = [&](const SpectralField& s, double tt, SpectralField& o) {
        sqg_nonlinear(s, tt, sqg, o);
        const SpectralField& v = tt <= t ? v_lo : (tt >= t_hi ? v_hi : v_mid);
        auto& oc = o.data();
        const auto& vc = v.data();
        for (std::size_t i = 0; i < oc.size(); ++i) oc[i] += nudge.mu * sm[i] * vc[i];
    };
    return stepper.step(state, t, nonlin);
}

SpectralField nudged_step(const SpectralField& state, const SpectralField& v_at_s,
                          const SqgParams& sqg, const NudgeParams& nudge,
                          const LPBlockSet& blocks, const StepperConfig& cfg, double t) {
    return nudged_step(state, v_at_s, v_at_s, v_at_s, sqg, nudge, blocks, cfg, t);
}

std::string to_string(FeedbackOperator op) {
    switch (op) {
        case FeedbackOperator::LpLowpass: return "lp";
        case FeedbackOperator::SharpProjection: return "sharp";
        case FeedbackOperator::DirectInsertion: return "insert";
    }
    return "?";
}

RateFit fit_decay_rate(const std::vector<SyncRow>& rows, double lo, double hi) {
    RateFit fit;
    if (rows.empty()) return fit;
    double initial = rows.front().err_l2proxy;

    // Contiguous decay interval: from the first crossing below hi*initial to
    // the first drop below the window floor. The floor is the larger of
    // lo*initial and a small multiple of the observed terminal plateau, so a
    // synchronized run's flat tail does not pollute the fit.
    double plateau = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) plateau = std::min(plateau, r.err_l2proxy);
    double floor = std::max(lo * initial, 3.0 * plateau);

    std::vector<std::pair<double, double>> pts;
    bool started = false;
    for (const auto& r : rows) {
        if (!started) {
            if (r.err_l2proxy < hi * initial && r.err_l2proxy > floor) started = true;
        }
        if (started) {
            if (r.err_l2proxy <= floor) break;
            pts.emplace_back(r.s, std::log(r.err_l2proxy));
        }
    }
    fit.windowed = pts.size() >= 5;
    if (!fit.windowed) {
        pts.clear();
        for (const auto& r : rows)
            if (r.err_l2proxy > 0.0) pts.emplace_back(r.s, std::log(r.err_l2proxy));
    }
    if (pts.size() < 2) return fit;

    double n = static_cast<double>(pts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double denom = n * sxx - sx * sx;
    if (denom <= 0.0) return fit;
    double slope = (n * sxy - sx * sy) / denom;
    fit.rate = -slope;
    fit.points = pts.size();
    double ybar = sy / n;
    double ss_tot = syy - n * ybar * ybar;
    double intercept = (sy - slope * sx) / n;
    double ss_res = 0.0;
    for (auto [x, y] : pts) {
        double e = y - (intercept + slope * x);
        ss_res += e * e;
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

namespace {

struct TwinSetup {
    double mu = 0.0;
    std::vector<double> feedback;  // F(k): s_m or sharp indicator (empty: none)
    std::vector<double> data;      // D(k): s_{m-1} or sharp indicator
    std::vector<double> insert;    // P_h(k) for direct insertion (empty: none)
};

/// Coupled reference/companion integration. The reference advances with the
/// plain SQG stepper; within each RK4 stage the companion sees the data
/// multiplier applied to the reference's own stage value, so the pair is one
/// consistent RK4 system and no inter-sample interpolation enters.
SyncRecord run_twin(const SqgParams& sqg, double sigma, const StepperConfig& cfg,
                    const Trajectory& ref, const SpectralField& w0, const TwinSetup& setup,
                    const SyncOptions& opt, FeedbackOperator op, double cutoff) {
    if (ref.samples.empty()) throw std::invalid_argument("run_twin: empty reference");
    const TorusGrid& grid = ref.grid();
    if (w0.grid() != grid) throw std::invalid_argument("run_twin: grid mismatch");

    double span = opt.t_span > 0.0 ? opt.t_span : ref.t_end() - ref.t0;
    long steps = std::max(1l, std::lround(span / cfg.dt));

    SpectralField theta = ref.samples.front();
    dealias(theta);
    SpectralField w = w0;
    dealias(w);
    w.enforce_zero_mean_and_nyquist();

    std::vector<double> sym_theta = sqg_linear_symbol(grid, sqg);
    std::vector<double> sym_w = sym_theta;
    if (!setup.feedback.empty())
        for (std::size_t i = 0; i < sym_w.size(); ++i)
            sym_w[i] += setup.mu * setup.feedback[i];

    ExponentialStepper st_theta(grid, sym_theta, cfg);
    ExponentialStepper st_w(grid, sym_w, cfg);

    auto nl_theta = [&](const SpectralField& s, double tt, SpectralField& o) {
        sqg_nonlinear(s, tt, sqg, o);
    };
    auto nl_w = [&](const SpectralField& s, double tt, const SpectralField& theta_stage,
                    SpectralField& o) {
        sqg_nonlinear(s, tt, sqg, o);
        if (!setup.feedback.empty()) {
            auto& oc = o.data();
            const auto& tc = theta_stage.data();
            for (std::size_t i = 0; i < oc.size(); ++i)
                oc[i] += setup.mu * setup.feedback[i] * setup.data[i] * tc[i];
        }
    };

    SyncRecord rec;
    rec.op = op;
    rec.cutoff = cutoff;

    auto record = [&](double s, double inserted) {
        SpectralField diff = w - theta;
        if (!setup.insert.empty()) {
            // high-mode error (I - P_h)(w - theta)
            auto& c = diff.data();
            for (std::size_t i = 0; i < c.size(); ++i) c[i] *= 1.0 - setup.insert[i];
        }
        SyncRow row;
        row.s = s;
        row.err_l2proxy = sobolev_norm(diff, 0.0);
        row.err_hsigma = sobolev_norm(diff, sigma);
        row.err_hminushalf = sobolev_norm(diff, -0.5);
        row.inserted_energy = inserted;
        rec.rows.push_back(row);
    };

    // full-error denominator for the classification
    double full_initial = sobolev_norm(w - theta, 0.0);
    record(0.0, 0.0);
    long store_steps =
        opt.store_every > 0
            ? static_cast<long>(opt.store_every) * opt.sample_every
            : (ref.dt > 0.0 ? std::max(1l, std::lround(ref.dt / cfg.dt))
                            : static_cast<long>(opt.sample_every));
    rec.w_samples.t0 = ref.t0;
    rec.w_samples.dt = cfg.dt * static_cast<double>(store_steps);
    rec.w_samples.samples.push_back(w);
    rec.theta_samples = rec.w_samples;
    rec.theta_samples.samples.back() = theta;
    double store_span = opt.store_span > 0.0 ? opt.store_span
                                             : std::numeric_limits<double>::infinity();

    const double dt = cfg.dt;
    for (long i = 0; i < steps; ++i) {
        double t = dt * static_cast<double>(i);

        if (cfg.scheme == Scheme::ExpEuler) {
            SpectralField nt(grid), nw(grid);
            nl_theta(theta, t, nt);
            nl_w(w, t, theta, nw);
            SpectralField theta_next = theta;
            nt *= dt;
            theta_next += nt;
            auto& tc = theta_next.data();
            for (std::size_t k = 0; k < tc.size(); ++k) tc[k] *= st_theta.exp_full()[k];
            SpectralField w_next = w;
            nw *= dt;
            w_next += nw;
            auto& wc = w_next.data();
            for (std::size_t k = 0; k < wc.size(); ++k) wc[k] *= st_w.exp_full()[k];
            theta = theta_next;
            w = w_next;
        } else {
            // coupled IF-RK4
            const auto& Eh_t = st_theta.exp_half();
            const auto& Ef_t = st_theta.exp_full();
            const auto& Eh_w = st_w.exp_half();
            const auto& Ef_w = st_w.exp_full();

            auto scale = [](SpectralField& f, const std::vector<double>& tab) {
                auto& c = f.data();
                for (std::size_t k = 0; k < c.size(); ++k) c[k] *= tab[k];
            };

            SpectralField n1t(grid), n2t(grid), n3t(grid), n4t(grid);
            SpectralField n1w(grid), n2w(grid), n3w(grid), n4w(grid);

            nl_theta(theta, t, n1t);
            nl_w(w, t, theta, n1w);

            SpectralField ut = theta, uw = w;
            {
                SpectralField tmp = n1t;
                tmp *= 0.5 * dt;
                ut += tmp;
                scale(ut, Eh_t);
                tmp = n1w;
                tmp *= 0.5 * dt;
                uw += tmp;
                scale(uw, Eh_w);
            }
            nl_theta(ut, t + 0.5 * dt, n2t);
            nl_w(uw, t + 0.5 * dt, ut, n2w);

            ut = theta;
            scale(ut, Eh_t);
            uw = w;
            scale(uw, Eh_w);
            {
                SpectralField tmp = n2t;
                tmp *= 0.5 * dt;
                ut += tmp;
                tmp = n2w;
                tmp *= 0.5 * dt;
                uw += tmp;
            }
            nl_theta(ut, t + 0.5 * dt, n3t);
            nl_w(uw, t + 0.5 * dt, ut, n3w);

            ut = theta;
            scale(ut, Ef_t);
            uw = w;
            scale(uw, Ef_w);
            {
                SpectralField tmp = n3t;
                tmp *= dt;
                scale(tmp, Eh_t);
                ut += tmp;
                tmp = n3w;
                tmp *= dt;
                scale(tmp, Eh_w);
                uw += tmp;
            }
            nl_theta(ut, t + dt, n4t);
            nl_w(uw, t + dt, ut, n4w);

            SpectralField theta_next = theta;
            scale(theta_next, Ef_t);
            scale(n1t, Ef_t);
            scale(n2t, Eh_t);
            scale(n3t, Eh_t);
            n1t *= dt / 6.0;
            n2t *= dt / 3.0;
            n3t *= dt / 3.0;
            n4t *= dt / 6.0;
            theta_next += n1t;
            theta_next += n2t;
            theta_next += n3t;
            theta_next += n4t;

            SpectralField w_next = w;
            scale(w_next, Ef_w);
            scale(n1w, Ef_w);
            scale(n2w, Eh_w);
            scale(n3w, Eh_w);
            n1w *= dt / 6.0;
            n2w *= dt / 3.0;
            n3w *= dt / 3.0;
            n4w *= dt / 6.0;
            w_next += n1w;
            w_next += n2w;
            w_next += n3w;
            w_next += n4w;

            theta = theta_next;
            w = w_next;
        }
        theta.enforce_zero_mean_and_nyquist();
        w.enforce_zero_mean_and_nyquist();

        double inserted = 0.0;
        if (!setup.insert.empty()) {
            double e_before = std::pow(sobolev_norm(w, 0.0), 2);
            auto& wc = w.data();
            const auto& tc = theta.data();
            for (std::size_t k = 0; k < wc.size(); ++k)
                wc[k] += setup.insert[k] * (tc[k] - wc[k]);
            inserted = (std::pow(sobolev_norm(w, 0.0), 2) - e_before) / dt;
        } else if (!setup.feedback.empty()) {
            // mu < S_m (v - w), w >
            double acc = 0.0;
            const auto& wc = w.data();
            const auto& tc = theta.data();
            for (std::size_t k = 0; k < wc.size(); ++k) {
                std::complex<double> fb =
                    setup.feedback[k] * (setup.data[k] * tc[k] - wc[k]);
                acc += fb.real() * wc[k].real() + fb.imag() * wc[k].imag();
            }
            inserted = setup.mu * acc;
        }

        if ((i + 1) % opt.sample_every == 0 || i + 1 == steps) {
            if (!w.all_finite()) check_finite(w, "twin companion");
            if (!theta.all_finite()) check_finite(theta, "twin reference");
            record(dt * static_cast<double>(i + 1), inserted);
        }
        if (((i + 1) % store_steps == 0 || i + 1 == steps) &&
            dt * static_cast<double>(i + 1) <= store_span + 1e-12) {
            rec.w_samples.samples.push_back(w);
            rec.theta_samples.samples.push_back(theta);
        }
    }

    rec.initial_error = full_initial;
    rec.terminal_error = rec.rows.back().err_l2proxy;
    rec.synchronized =
        full_initial > 0.0 && rec.terminal_error < opt.sync_threshold * full_initial;
    rec.fit = fit_decay_rate(rec.rows, opt.fit_lo, opt.fit_hi);
    return rec;
}

} // namespace

SyncRecord synchronize_experiment(const SqgParams& sqg, const NudgeParams& nudge,
                                  const LPBlockSet& blocks, const StepperConfig& cfg,
                                  const Trajectory& ref, const SpectralField& w0,
                                  const SyncOptions& opt) {
    TwinSetup setup;
    setup.mu = nudge.mu;
    setup.feedback = blocks.lowpass_table(nudge.m);
    setup.data = blocks.lowpass_table(nudge.m - 1);
    return run_twin(sqg, nudge.sigma, cfg, ref, w0, setup, opt, FeedbackOperator::LpLowpass,
                    0.0);
}

SyncRecord sharp_nudging_experiment(const SqgParams& sqg, double mu, double cutoff,
                                    double sigma, const LPBlockSet& blocks,
                                    const StepperConfig& cfg, const Trajectory& ref,
                                    const SpectralField& w0, const SyncOptions& opt) {
    TwinSetup setup;
    setup.mu = mu;
    setup.feedback = blocks.sharp_table(cutoff);
    setup.data = setup.feedback;
    return run_twin(sqg, sigma, cfg, ref, w0, setup, opt, FeedbackOperator::SharpProjection,
                    cutoff);
}

SyncRecord determining_modes_experiment(const SqgParams& sqg, const StepperConfig& cfg,
                                        double cutoff, double sigma, const Trajectory& ref,
                                        const SpectralField& w0, const SyncOptions& opt) {
    LPBlockSet blocks(ref.grid(), BumpProfile::standard());
    TwinSetup setup;
    setup.insert = blocks.sharp_table(cutoff);
    return run_twin(sqg, sigma, cfg, ref, w0, setup, opt, FeedbackOperator::DirectInsertion,
                    cutoff);
}

MuSearchResult minimal_mu_search(const SqgParams& sqg, const NudgeParams& nudge_template,
                                 const LPBlockSet& blocks, const StepperConfig& cfg,
                                 const Trajectory& ref, const SpectralField& w0,
                                 double mu_lo, double mu_hi, double tol,
                                 const SyncOptions& opt) {
    if (!(mu_lo < mu_hi)) throw std::invalid_argument("minimal_mu_search: bad bracket");
    MuSearchResult res;
    auto classify = [&](double mu) {
        NudgeParams np = nudge_template;
        np.mu = mu;
        SyncRecord rec = synchronize_experiment(sqg, np, blocks, cfg, ref, w0, opt);
        ++res.runs;
        res.classified.emplace_back(mu, rec.synchronized);
        return rec.synchronized;
    };

    bool lo_sync = classify(mu_lo);
    bool hi_sync = classify(mu_hi);
    if (lo_sync == hi_sync) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "minimal_mu_search: endpoints classify identically on [%g, %g] "
                      "(both %s)",
                      mu_lo, mu_hi, lo_sync ? "synchronized" : "unsynchronized");
        throw std::runtime_error(buf);
    }

    while (mu_hi - mu_lo > tol * mu_hi) {
        double mid = 0.5 * (mu_lo + mu_hi);
        if (classify(mid))
            mu_hi = mid;
        else
            mu_lo = mid;
    }
    res.mu_lo = mu_lo;
    res.mu_hi = mu_hi;
    return res;
}

ResidualSeries nudged_energy_check(const Trajectory& w_traj, const Trajectory& v_traj,
                                   const SqgParams& sqg, const NudgeParams& nudge,
                                   const LPBlockSet& blocks, double tolerance) {
    if (w_traj.samples.size() != v_traj.samples.size())
        throw std::invalid_argument("nudged_energy_check: trajectory length mismatch");
    ResidualSeries out;
    if (w_traj.samples.size() < 2) {
        out.pass = true;
        return out;
    }
    const auto& sm = blocks.lowpass_table(nudge.m);

    auto integrand = [&](std::size_t i, double& diss, double& work) {
        const SpectralField& w = w_traj.samples[i];
        const SpectralField& v = v_traj.samples[i];
        double d = std::pow(sobolev_norm(w, 0.5 * sqg.gamma), 2);
        double d1 = std::pow(sobolev_norm(w, 1.0), 2);
        double fb = 0.0;
        const auto& wc = w.data();
        const auto& vc = v.data();
        for (std::size_t k = 0; k < wc.size(); ++k) {
            std::complex<double> smwv = sm[k] * (wc[k] - vc[k]);
            fb += smwv.real() * wc[k].real() + smwv.imag() * wc[k].imag();
        }
        diss = 2.0 * sqg.kappa * d + 2.0 * sqg.eps_viscosity * d1 + 2.0 * nudge.mu * fb;
        work = 2.0 * inner_product(sqg.forcing.at(w_traj.time(i)), w);
    };

    double cumulative = 0.0;
    double e_prev = std::pow(sobolev_norm(w_traj.samples[0], 0.0), 2);
    double diss_prev, work_prev;
    integrand(0, diss_prev, work_prev);
    for (std::size_t i = 1; i < w_traj.samples.size(); ++i) {
        double e = std::pow(sobolev_norm(w_traj.samples[i], 0.0), 2);
        double diss, work;
        integrand(i, diss, work);
        double r = e - e_prev +
                   w_traj.dt * 0.5 * ((diss + diss_prev) - (work + work_prev));
        out.residuals.push_back(r);
        cumulative += r;
        out.max_abs = std::max(out.max_abs, std::abs(cumulative));
        e_prev = e;
        diss_prev = diss;
        work_prev = work;
    }
    out.pass = out.max_abs <= tolerance;
    return out;
}

} // namespace sqglab
