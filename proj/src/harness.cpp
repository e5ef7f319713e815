#include "sqglab/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sqglab/bounds.hpp"
#include "sqglab/degiorgi.hpp"
#include "sqglab/determining_form.hpp"
#include "sqglab/io.hpp"
#include "sqglab/littlewood_paley.hpp"
#include "sqglab/nudging.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace sqglab::harness {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

SpectralField single_mode(const TorusGrid& grid, int k1, int k2, double cos_amp,
                          double sin_amp) {
    // a cos(k.x) + b sin(k.x)
    SpectralField f(grid);
    std::complex<double> c(0.5 * cos_amp, -0.5 * sin_amp);
    f.at(k1, k2) = c;
    f.at(-k1, -k2) = std::conj(c);
    return f;
}

std::string snapshot_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snap_%06d.sqgf", index);
    return buf;
}

struct RunPaths {
    fs::path dir;
    explicit RunPaths(const std::string& out_dir) : dir(out_dir) {
        fs::create_directories(dir);
    }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

void write_run_meta(const RunPaths& paths, const std::string& command, double t0,
                    double sample_dt, const std::vector<std::string>& snapshots,
                    const json& extra = json::object()) {
    json meta;
    meta["schema_version"] = kSchemaVersion;
    meta["command"] = command;
    meta["t0"] = t0;
    meta["sample_dt"] = sample_dt;
    meta["snapshots"] = snapshots;
    for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
    write_file_atomic(paths.file("run_meta.json"), meta.dump(2) + "\n");
}

struct CommonArgs {
    TorusGrid grid;
    SqgParams params;
    StepperConfig cfg;
    DiagnosticsSpec diag;
    std::uint64_t seed = 0;
    std::string out_dir;
    int sample_every = 20;
    double t_span = 1.0;
    double spinup = 0.0;
};

const std::set<std::string> kCommonKeys = {
    "command",     "seed",         "out_dir",        "threads",    "schema_version",
    "grid.n",      "grid.dealias", "sqg.gamma",      "sqg.kappa",  "sqg.eps",
    "sqg.advection", "forcing",    "stepper.dt",     "stepper.scheme",
    "run.t_span",  "run.spinup",   "run.sample_every", "run.ic",   "diag.sigma",
    "diag.p"};

CommonArgs parse_common(const RunConfig& c) {
    CommonArgs a;
    int schema = c.get_int("schema_version", kSchemaVersion);
    if (schema > kSchemaVersion)
        throw ConfigError("config: schema_version newer than supported");
    int n = c.get_int("grid.n", 64);
    double dealias = c.get_double("grid.dealias", 2.0 / 3.0);
    try {
        a.grid = TorusGrid(n, dealias);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: grid.n/grid.dealias invalid: ") + e.what());
    }
    a.params.kappa = c.get_double("sqg.kappa", 1.0);
    a.params.gamma = c.get_double("sqg.gamma", 1.5);
    a.params.eps_viscosity = c.get_double("sqg.eps", 0.0);
    a.params.advection_enabled = c.get_bool("sqg.advection", true);
    a.params.forcing = parse_forcing(c.get_string("forcing", "zero"), a.grid);
    try {
        a.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: (H1) violated by sqg.gamma/sqg.kappa: ") +
                          e.what());
    }
    a.cfg.dt = c.get_double("stepper.dt", 1e-3);
    std::string scheme = c.get_string("stepper.scheme", "ifrk4");
    if (scheme == "ifrk4")
        a.cfg.scheme = Scheme::IfRk4;
    else if (scheme == "expeuler")
        a.cfg.scheme = Scheme::ExpEuler;
    else
        throw ConfigError("config: stepper.scheme must be ifrk4 or expeuler");
    a.diag.sigma = c.get_double("diag.sigma", 1.0);
    a.diag.p = c.get_double("diag.p", 8.0);
    a.seed = static_cast<std::uint64_t>(c.get_int("seed", 0));
    a.out_dir = c.get_string("out_dir", "run_out");
    a.sample_every = c.get_int("run.sample_every", 20);
    a.t_span = c.get_double("run.t_span", 1.0);
    a.spinup = c.get_double("run.spinup", 0.0);
    if (a.sample_every < 1) throw ConfigError("config: run.sample_every must be >= 1");
    return a;
}

SpectralField initial_condition(const RunConfig& c, const CommonArgs& a) {
    std::string spec = c.get_string("run.ic", "random:1");
    if (spec == "zero") return SpectralField(a.grid);
    auto parts = split(spec, ':');
    if (parts[0] == "random") {
        double norm = parts.size() > 1 ? std::stod(parts[1]) : 1.0;
        RngStream rng(a.seed, "ic");
        return random_field(a.grid, rng, 4, a.diag.sigma, norm);
    }
    if (parts[0] == "file" && parts.size() == 2) {
        SpectralField f = load_field(parts[1]);
        if (f.grid().n != a.grid.n) throw ConfigError("config: run.ic grid mismatch");
        return f;
    }
    throw ConfigError("config: run.ic must be zero | random:<norm> | file:<path>");
}

json rate_fit_json(const RateFit& fit) {
    return json{{"rate", fit.rate},
                {"r2", fit.r2},
                {"points", fit.points},
                {"windowed", fit.windowed}};
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const RunConfig& c, const std::string& command) {
    CommonArgs a = parse_common(c);
    RunPaths paths(a.out_dir);
    write_file_atomic(paths.file("config.echo"), c.echo());

    SpectralField theta = initial_condition(c, a);

    // spin-up (not recorded)
    if (a.spinup > 0.0) {
        IntegrateResult spin = integrate(theta, a.params, a.cfg, a.spinup, a.sample_every,
                                         a.diag);
        theta = spin.traj.samples.back();
    }

    CsvWriter norms(paths.file("norms.csv"),
                    {"t", "l2proxy", "hsigma", "lp", "linf", "energy_residual"});
    std::vector<std::string> snapshots;

    double sample_dt = a.cfg.dt * a.sample_every;
    long chunks = std::max(1l, std::lround(a.t_span / sample_dt));

    save_field(theta, paths.file(snapshot_name(0)));
    snapshots.push_back(snapshot_name(0));

    DiagnosticsRow first;
    try {
        double t = 0.0;
        bool first_chunk = true;
        for (long chunk = 0; chunk < chunks; ++chunk) {
            IntegrateResult part =
                integrate(theta, a.params, a.cfg, sample_dt, a.sample_every, a.diag);
            theta = part.traj.samples.back();
            if (first_chunk) {
                first = part.rows.front();
                norms.row({t, first.l2proxy, first.hsigma, first.lp, first.linf, 0.0});
                first_chunk = false;
            }
            const DiagnosticsRow& row = part.rows.back();
            t += sample_dt;
            norms.row({t, row.l2proxy, row.hsigma, row.lp, row.linf, row.energy_residual});
            save_field(theta, paths.file(snapshot_name(static_cast<int>(chunk) + 1)));
            snapshots.push_back(snapshot_name(static_cast<int>(chunk) + 1));
        }
    } catch (const NonFiniteFieldError& e) {
        norms.close();
        write_run_meta(paths, command, 0.0, sample_dt, snapshots);
        std::fprintf(stderr, "[sqglab] blow-up: %s\nlast-good snapshot: %s\n", e.what(),
                     paths.file(snapshots.back()).c_str());
        return 3;
    }
    norms.close();
    write_run_meta(paths, command, 0.0, sample_dt, snapshots);
    return 0;
}

// ------------------------------------------------------------------ steady

int cmd_steady(const RunConfig& c) {
    CommonArgs a = parse_common(c);
    RunPaths paths(a.out_dir);
    write_file_atomic(paths.file("config.echo"), c.echo());

    double tol = c.get_double("steady.tol", 1e-8);
    double t_max = c.get_double("steady.t_max", 100.0);
    SteadyStateResult res = steady_state_find(a.params, a.cfg, tol, t_max, a.diag.sigma);

    save_field(res.state, paths.file("steady.sqgf"));
    json rep{{"residual", res.residual},
             {"converged", res.converged},
             {"t_used", res.t_used},
             {"tol", tol}};
    write_file_atomic(paths.file("report.json"), rep.dump(2) + "\n");
    write_run_meta(paths, "steady", 0.0, 0.0, {"steady.sqgf"});
    return res.converged ? 0 : 3;
}

// ---------------------------------------------------------------- periodic

int cmd_periodic(const RunConfig& c) {
    CommonArgs a = parse_common(c);
    RunPaths paths(a.out_dir);
    write_file_atomic(paths.file("config.echo"), c.echo());

    double tau_f = c.get_double("periodic.tau_f", 0.0);
    double tol = c.get_double("periodic.tol", 1e-8);
    int max_iters = c.get_int("periodic.max_iters", 64);

    PeriodicOrbitResult res =
        periodic_orbit_find(a.params, a.cfg, tol, max_iters, a.diag.sigma, tau_f);

    std::vector<std::string> snapshots;
    for (std::size_t i = 0; i < res.orbit.samples.size(); ++i) {
        save_field(res.orbit.samples[i], paths.file(snapshot_name(static_cast<int>(i))));
        snapshots.push_back(snapshot_name(static_cast<int>(i)));
    }
    json rep{{"converged", res.converged},
             {"residuals", res.residuals},
             {"tol", tol},
             {"tau_f", tau_f > 0.0 ? tau_f : a.params.forcing.oscillatory->period}};
    write_file_atomic(paths.file("report.json"), rep.dump(2) + "\n");
    write_run_meta(paths, "periodic", res.orbit.t0, res.orbit.dt, snapshots);
    return res.converged ? 0 : 3;
}

// ------------------------------------------------------------------- nudge

int cmd_nudge(const RunConfig& c) {
    CommonArgs a = parse_common(c);
    RunPaths paths(a.out_dir);
    write_file_atomic(paths.file("config.echo"), c.echo());

    std::string ref_dir = c.get_string("nudge.ref", "");
    if (ref_dir.empty()) throw ConfigError("config: nudge.ref is required");
    Trajectory ref = load_trajectory(ref_dir);
    if (ref.grid().n != a.grid.n)
        throw ConfigError("config: nudge.ref grid does not match grid.n");

    NudgeParams np;
    np.mu = c.get_double("nudge.mu", 64.0);
    np.m = c.get_int("nudge.m", 5);
    np.sigma = c.get_double("nudge.sigma", a.diag.sigma);
    np.p = c.get_double("nudge.p", a.diag.p);

    std::string opname = c.get_string("nudge.operator", "lp");
    double cutoff = c.get_double("nudge.cutoff", 0.0);

    std::string w0spec = c.get_string("nudge.w0", "zero");
    SpectralField w0(a.grid);
    {
        auto parts = split(w0spec, ':');
        if (parts[0] == "zero") {
        } else if (parts[0] == "random") {
            std::uint64_t s = parts.size() > 1 ? std::stoull(parts[1]) : a.seed;
            RngStream rng(s, "w0");
            w0 = random_field(a.grid, rng, 4, np.sigma, 1.0);
        } else if (parts[0] == "file" && parts.size() == 2) {
            w0 = load_field(parts[1]);
        } else {
            throw ConfigError("config: nudge.w0 must be zero | random:<seed> | file:<path>");
        }
    }

    SyncOptions opt;
    opt.t_span = a.t_span;
    opt.sync_threshold = c.get_double("nudge.sync_threshold", 1e-6);
    opt.sample_every = 1;            // rate fits want per-step error rows
    opt.store_every = a.sample_every;  // snapshots at the run cadence

    LPBlockSet blocks(a.grid, BumpProfile::standard());
    SyncRecord rec;
    if (opname == "lp")
        rec = synchronize_experiment(a.params, np, blocks, a.cfg, ref, w0, opt);
    else if (opname == "sharp")
        rec = sharp_nudging_experiment(a.params, np.mu, cutoff, np.sigma, blocks, a.cfg, ref,
                                       w0, opt);
    else if (opname == "insert")
        rec = determining_modes_experiment(a.params, a.cfg, cutoff, np.sigma, ref, w0, opt);
    else
        throw ConfigError("config: nudge.operator must be lp | sharp | insert");

    CsvWriter sync(paths.file("sync.csv"),
                   {"s", "err_l2proxy", "err_hsigma", "err_hminushalf", "inserted_energy"});
    for (const auto& r : rec.rows)
        sync.row({r.s, r.err_l2proxy, r.err_hsigma, r.err_hminushalf, r.inserted_energy});
    sync.close();

    std::vector<std::string> snapshots;
    for (std::size_t i = 0; i < rec.w_samples.samples.size(); ++i) {
        save_field(rec.w_samples.samples[i], paths.file(snapshot_name(static_cast<int>(i))));
        snapshots.push_back(snapshot_name(static_cast<int>(i)));
    }

    json rep;
    rep["operator"] = to_string(rec.op);
    rep["cutoff"] = rec.cutoff;
    rep["mu"] = np.mu;
    rep["m"] = np.m;
    rep["fit"] = rate_fit_json(rec.fit);
    rep["initial_error"] = rec.initial_error;
    rep["terminal_error"] = rec.terminal_error;
    rep["terminal_rel_error"] =
        rec.initial_error > 0.0 ? rec.terminal_error / rec.initial_error : 0.0;
    rep["synchronized"] = rec.synchronized;
    rep["ref"] = ref_dir;
    if (opname == "lp") {
        double g_lp = bounds::g_lp(
            a.params.kappa, np.mu,
            bounds::f_lp(a.params.kappa,
                         lebesgue_norm(to_physical(a.params.forcing.steady), np.p)),
            0.0);
        AdmissibilityReport adm = check_hypotheses(a.params, np, g_lp);
        json checks = json::array();
        for (const auto& ck : adm.checks)
            checks.push_back(json{{"name", ck.name},
                                  {"lhs", ck.lhs},
                                  {"rhs", ck.rhs},
                                  {"margin", ck.margin},
                                  {"ok", ck.ok}});
        rep["hypotheses"] = checks;
        rep["mu_threshold"] = adm.mu_threshold;
        rep["m_threshold"] = adm.m_threshold;
    }
    write_file_atomic(paths.file("report.json"), rep.dump(2) + "\n");
    write_run_meta(paths, "nudge", rec.w_samples.t0, rec.w_samples.dt, snapshots,
                   json{{"ref", ref_dir}, {"mu", np.mu}, {"m", np.m},
                        {"operator", to_string(rec.op)}});
    return 0;
}

// ----------------------------------------------------------------- detform

int cmd_detform(const RunConfig& c) {
    CommonArgs a = parse_common(c);
    RunPaths paths(a.out_dir);
    write_file_atomic(paths.file("config.echo"), c.echo());

    std::string steady_file = c.get_string("detform.ref_steady", "");
    if (steady_file.empty()) throw ConfigError("config: detform.ref_steady is required");
    SpectralField theta_star = load_field(steady_file);

    NudgeParams np;
    np.mu = c.get_double("detform.mu", 16.0);
    np.m = c.get_int("detform.m", 4);
    np.sigma = a.diag.sigma;
    np.p = a.diag.p;

    double window = c.get_double("detform.window", 0.5);
    int samples = c.get_int("detform.samples", 11);
    WMapConfig wcfg;
    wcfg.tol_forget = c.get_double("detform.tol_forget", 1e-8);
    wcfg.window_start = 0.0;
    wcfg.window_end = window;
    wcfg.relax_time =
        c.get_double("detform.relax", std::log(1.0 / wcfg.tol_forget) / np.mu);

    LPBlockSet blocks(a.grid, BumpProfile::standard());
    const auto& sm = blocks.lowpass_table(np.m);

    std::string v0spec = c.get_string("detform.v0", "proj-steady");
    auto project_constant = [&](const SpectralField& f) {
        SpectralField smf = f;
        auto& cc = smf.data();
        for (std::size_t i = 0; i < cc.size(); ++i) cc[i] *= sm[i];
        return BanachTrajectory::constant(smf, window, static_cast<std::size_t>(samples),
                                          np.sigma, np.m);
    };

    BanachTrajectory v0;
    {
        auto parts = split(v0spec, ':');
        if (parts[0] == "proj-steady") {
            v0 = project_constant(theta_star);
        } else if (parts[0] == "proj-attractor" && parts.size() == 2) {
            Trajectory att = load_trajectory(parts[1]);
            Trajectory windowed;
            windowed.t0 = 0.0;
            windowed.dt = window / static_cast<double>(samples - 1);
            for (int i = 0; i < samples; ++i)
                windowed.samples.push_back(att.interpolate(att.t0 + windowed.dt * i));
            v0 = BanachTrajectory(windowed.mapped(sm), np.sigma, np.m);
        } else if (parts[0] == "perturbed" && parts.size() == 3) {
            double eps = std::stod(parts[1]);
            RngStream rng(std::stoull(parts[2]), "detform-v0");
            v0 = project_constant(theta_star);
            SpectralField pert = random_field(a.grid, rng, 4, np.sigma, 1.0);
            double scale = eps * x_norm(v0);
            for (auto& s : v0.traj.samples) {
                SpectralField add = pert;
                add *= scale;
                s += add;
            }
        } else {
            throw ConfigError("config: detform.v0 must be proj-steady | "
                              "proj-attractor:<dir> | perturbed:<eps>:<seed>");
        }
    }

    double tau_span = c.get_double("detform.tau_span", 0.0);
    double dtau = c.get_double("detform.dtau", 0.0);
    double tol = c.get_double("detform.tol", 0.0);
    int rhs_power = c.get_int("detform.rhs_power", 2);

    DetFormRhs probe = detform_rhs(v0, theta_star, a.params, np, blocks, a.cfg, wcfg,
                                   rhs_power);
    if (tau_span <= 0.0)
        tau_span = probe.lambda > 0.0 ? 50.0 / probe.lambda : 1.0;

    DetFormResult res = detform_integrate(v0, theta_star, a.params, np, blocks, a.cfg, wcfg,
                                          tau_span, dtau, tol, rhs_power);

    CsvWriter csv(paths.file("detform.csv"),
                  {"tau", "residual_x", "dist_to_steady_x", "lambda"});
    for (const auto& r : res.rows)
        csv.row({r.tau, r.residual_x, r.dist_to_steady_x, r.lambda});
    csv.close();

    json rep{{"converged", res.converged},
             {"aborted", res.aborted},
             {"inside_ball", res.inside_ball},
             {"note", res.note},
             {"rhs_power", rhs_power},
             {"initial_residual", res.rows.front().residual_x},
             {"terminal_error", res.rows.back().residual_x},
             {"terminal_rel_error",
              res.rows.front().residual_x > 0.0
                  ? res.rows.back().residual_x / res.rows.front().residual_x
                  : 0.0}};
    write_file_atomic(paths.file("report.json"), rep.dump(2) + "\n");
    write_run_meta(paths, "detform", 0.0, 0.0, {});
    return res.aborted ? 3 : 0;
}

// ---------------------------------------------------------------- lp-verify

int cmd_lp_verify(const RunConfig& c) {
    CommonArgs a = parse_common(c);
    RunPaths paths(a.out_dir);
    write_file_atomic(paths.file("config.echo"), c.echo());

    int ensemble = c.get_int("lp.ensemble", 20);
    double beta = c.get_double("lp.beta", 0.75);
    double p = c.get_double("lp.p", 2.0);
    double qv = c.get_double("lp.q", 2.0);
    double ceiling = c.get_double("lp.ceiling", 1e3);

    LPBlockSet blocks(a.grid, BumpProfile::standard());
    json rep;
    rep["n"] = a.grid.n;
    rep["j_max"] = blocks.j_max();
    rep["ensemble"] = ensemble;
    json per_j = json::object();
    bool all_ok = true;
    for (int j = -1; j <= blocks.j_max(); ++j) {
        BernsteinReport r = bernstein_check(blocks, ensemble, j, beta, p, qv,
                                            a.seed + static_cast<std::uint64_t>(j + 1),
                                            ceiling);
        per_j["j=" + std::to_string(j)] = json{{"lower", r.max_lower},
                                               {"upper", r.max_upper},
                                               {"lowpass", r.max_lowpass},
                                               {"ok", r.ok}};
        all_ok = all_ok && r.ok;
    }
    rep["bernstein"] = per_j;
    rep["ok"] = all_ok;
    write_file_atomic(paths.file("lp_verify.json"), rep.dump(2) + "\n");
    return all_ok ? 0 : 3;
}

// ---------------------------------------------------------------- diagnose

int cmd_diagnose(const RunConfig& c) {
    CommonArgs a = parse_common(c);
    RunPaths paths(a.out_dir);
    write_file_atomic(paths.file("config.echo"), c.echo());

    std::string run_dir = c.get_string("diagnose.run", "");
    if (run_dir.empty()) throw ConfigError("config: diagnose.run is required");
    std::string check = c.get_string("diagnose.check", "all");

    Trajectory w_traj = load_trajectory(run_dir);

    // Run metadata for nudged runs (mu, m, reference).
    json meta;
    {
        std::ifstream is(fs::path(run_dir) / "run_meta.json");
        if (!is) throw ConfigError("config: diagnose.run has no run_meta.json");
        is >> meta;
    }
    NudgeParams np;
    np.mu = meta.value("mu", 0.0);
    np.m = meta.value("m", 0);
    np.sigma = a.diag.sigma;
    np.p = a.diag.p;

    double M = c.get_double("diagnose.M", 0.0);
    double delta_inf = c.get_double("diagnose.delta_inf",
                                    w_traj.t_end() - w_traj.t0);
    int n_max = c.get_int("diagnose.n_max", 12);
    int pairs = c.get_int("diagnose.pairs", 20);

    json out;
    out["run"] = run_dir;

    if (check == "bounds" || check == "all") {
        ResidualSeries series = apriori_bound_check(w_traj, a.params, 1e-6);
        out["bounds"] = json{{"max_abs_residual", series.max_abs},
                             {"pass", series.pass},
                             {"pairs", series.residuals.size()}};
    }

    if (check == "degiorgi" || check == "all") {
        double sup_w = 0.0;
        for (const auto& s : w_traj.samples)
            sup_w = std::max(sup_w, to_physical(s).max_abs());
        LevelSetConfig lcfg;
        lcfg.M = M > 0.0 ? M : 2.0 * sup_w;
        lcfg.n_max = n_max;
        lcfg.delta_inf = delta_inf;
        std::vector<double> U = level_energies(w_traj, lcfg, a.params.gamma, a.params.kappa);
        bool non_increasing = true;
        for (std::size_t i = 1; i < U.size(); ++i)
            if (U[i] > U[i - 1] * (1.0 + 1e-12)) non_increasing = false;
        out["degiorgi"] = json{{"M", lcfg.M},
                               {"U", U},
                               {"non_increasing", non_increasing},
                               {"sup_linf", sup_w}};
    }

    if (check == "levelset" || check == "all") {
        std::string ref_dir = meta.value("ref", std::string());
        if (!ref_dir.empty() && np.mu > 0.0) {
            Trajectory ref = load_trajectory(ref_dir);
            LPBlockSet blocks(w_traj.grid(), BumpProfile::standard());
            Trajectory v_traj = ref.mapped(blocks.lowpass_table(np.m - 1));
            // align v samples with w samples
            Trajectory v_aligned;
            v_aligned.t0 = w_traj.t0;
            v_aligned.dt = w_traj.dt;
            for (std::size_t i = 0; i < w_traj.samples.size(); ++i)
                v_aligned.samples.push_back(v_traj.interpolate(w_traj.time(i)));
            double sup_w = 0.0;
            for (const auto& s : w_traj.samples)
                sup_w = std::max(sup_w, to_physical(s).max_abs());
            double lambda = c.get_double("diagnose.lambda", (M > 0.0 ? M : 2.0 * sup_w) / 2.0);
            auto residuals = levelset_inequality_check(w_traj, v_aligned, a.params, np,
                                                       lambda, pairs);
            double worst = 0.0;
            for (const auto& r : residuals) worst = std::min(worst, r.residual);
            json rows = json::array();
            for (const auto& r : residuals)
                rows.push_back(json{{"s1", r.s1}, {"s2", r.s2}, {"residual", r.residual}});
            out["levelset"] = json{{"lambda", lambda},
                                   {"worst_residual", worst},
                                   {"pass", worst >= -1e-6},
                                   {"pairs", rows}};
        } else {
            out["levelset"] = json{{"skipped", "run has no nudging reference"}};
        }
    }

    if (check == "lemmas" || check == "all") {
        IterationLemmaParams ip;
        ip.a = c.get_double("diagnose.lemma_a", 1.0);
        ip.b = c.get_double("diagnose.lemma_b", 1.0);
        ip.C = 1.0;
        ip.d_list = {c.get_double("diagnose.lemma_d", 2.0)};
        ip.V0 = 1.0;
        ip.V1 = 1.0;
        double lemma_M = c.get_double("diagnose.lemma_M", 256.0);
        IterationLemmaReport lr = iteration_lemma_check(ip, lemma_M, n_max);
        double alpha = interpolation_exponent(2.0, a.params.gamma, a.params.gamma);
        out["lemmas"] = json{{"iteration", json{{"y0", lr.y0},
                                                {"threshold", lr.m_threshold},
                                                {"hypothesis_met", lr.hypothesis_met},
                                                {"verdict", lr.verdict}}},
                             {"alpha_P2_Qgamma", alpha}};
    }

    write_file_atomic(paths.file("diagnostics.json"), out.dump(2) + "\n");
    return 0;
}

} // namespace

Forcing parse_forcing(const std::string& spec, const TorusGrid& grid) {
    auto parts = split(spec, ':');
    if (parts.empty()) throw ConfigError("config: empty forcing spec");
    const std::string& kind = parts[0];
    if (kind == "zero") return Forcing::zero(grid);
    if (kind == "lowmode") {
        double amp = parts.size() > 1 ? std::stod(parts[1]) : 0.1;
        // a (cos x1 + sin(x1 + x2))
        SpectralField f = single_mode(grid, 1, 0, amp, 0.0);
        f += single_mode(grid, 1, 1, 0.0, amp);
        return Forcing{f, {}};
    }
    if (kind == "cos1") {
        double amp = parts.size() > 1 ? std::stod(parts[1]) : 1.0;
        return Forcing{single_mode(grid, 1, 0, amp, 0.0), {}};
    }
    if (kind == "osc1") {
        if (parts.size() != 3)
            throw ConfigError("config: forcing osc1 needs osc1:<amp>:<tau>");
        double amp = std::stod(parts[1]);
        double tau = std::stod(parts[2]);
        Forcing f = Forcing::zero(grid);
        f.oscillatory = TimePeriodicForcing{single_mode(grid, 1, 0, amp, 0.0), tau};
        return f;
    }
    if (kind == "file" && parts.size() == 2) {
        SpectralField f = load_field(parts[1]);
        if (f.grid().n != grid.n) throw ConfigError("config: forcing file grid mismatch");
        return Forcing{f, {}};
    }
    throw ConfigError("config: unknown forcing spec '" + spec + "'");
}

Trajectory load_trajectory(const std::string& run_dir) {
    fs::path dir(run_dir);
    std::ifstream is(dir / "run_meta.json");
    if (!is) throw std::runtime_error("load_trajectory: no run_meta.json in " + run_dir);
    json meta;
    is >> meta;
    if (meta.value("schema_version", 0) > kSchemaVersion)
        throw std::runtime_error("load_trajectory: schema_version newer than supported");
    Trajectory t;
    t.t0 = meta.value("t0", 0.0);
    t.dt = meta.value("sample_dt", 0.0);
    for (const auto& name : meta.at("snapshots"))
        t.samples.push_back(load_field((dir / name.get<std::string>()).string()));
    if (t.samples.empty())
        throw std::runtime_error("load_trajectory: no snapshots in " + run_dir);
    return t;
}

namespace {

std::set<std::string> known_keys(const std::string& command) {
    std::set<std::string> keys = kCommonKeys;
    auto add = [&](std::initializer_list<const char*> extra) {
        for (const char* k : extra) keys.insert(k);
    };
    if (command == "steady") add({"steady.tol", "steady.t_max"});
    if (command == "periodic") add({"periodic.tau_f", "periodic.tol", "periodic.max_iters"});
    if (command == "nudge")
        add({"nudge.mu", "nudge.m", "nudge.sigma", "nudge.p", "nudge.operator",
             "nudge.cutoff", "nudge.ref", "nudge.w0", "nudge.sync_threshold"});
    if (command == "detform")
        add({"detform.ref_steady", "detform.v0", "detform.m", "detform.mu",
             "detform.tau_span", "detform.dtau", "detform.rhs_power", "detform.window",
             "detform.samples", "detform.relax", "detform.tol", "detform.tol_forget"});
    if (command == "lp-verify") add({"lp.ensemble", "lp.beta", "lp.p", "lp.q", "lp.ceiling"});
    if (command == "diagnose")
        add({"diagnose.run", "diagnose.check", "diagnose.M", "diagnose.delta_inf",
             "diagnose.n_max", "diagnose.pairs", "diagnose.lambda", "diagnose.lemma_a",
             "diagnose.lemma_b", "diagnose.lemma_d", "diagnose.lemma_M"});
    return keys;
}

void validate_keys(const RunConfig& config, const std::string& command) {
    if (command == "sweep") {
        std::string sub = config.get_string("sweep.command", "");
        std::set<std::string> keys = known_keys(sub);
        keys.insert("sweep.command");
        keys.insert("sweep.cap");
        config.reject_unknown(keys, {"sweep.axis."});
        return;
    }
    config.reject_unknown(known_keys(command));
}

} // namespace

int run(RunConfig config) {
    std::string command = config.get_string("command", "");
    try {
        validate_keys(config, command);
        if (command == "simulate") return cmd_simulate(config, "simulate");
        if (command == "steady") return cmd_steady(config);
        if (command == "periodic") return cmd_periodic(config);
        if (command == "nudge") return cmd_nudge(config);
        if (command == "detform") return cmd_detform(config);
        if (command == "lp-verify") return cmd_lp_verify(config);
        if (command == "diagnose") return cmd_diagnose(config);
        if (command == "sweep") {
            int threads = config.get_int("threads", 0);
            if (threads <= 0) {
                const char* env = std::getenv("SQGLAB_THREADS");
                threads = env ? std::atoi(env) : 1;
                if (threads <= 0) threads = 1;
            }
            return sweep(config, threads);
        }
        throw ConfigError("config: unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "[sqglab] %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "[sqglab] %s\n", e.what());
        return 2;
    } catch (const NonFiniteFieldError& e) {
        std::fprintf(stderr, "[sqglab] blow-up: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "[sqglab] error: %s\n", e.what());
        return 3;
    }
}

int sweep(const RunConfig& config, int parallelism) {
    // Axes: sweep.axis.<dotted key> = v1,v2,...
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    RunConfig base;
    for (const auto& [key, value] : config.entries()) {
        if (key.rfind("sweep.axis.", 0) == 0) {
            axes.emplace_back(key.substr(11), split(value, ','));
            if (axes.back().second.empty())
                throw ConfigError("config: empty axis '" + key + "'");
        } else if (key == "sweep.command" || key == "command" || key == "sweep.cap" ||
                   key == "threads") {
            // handled below
        } else {
            base.set(key, value);
        }
    }
    std::string sub = config.get_string("sweep.command", "");
    if (sub.empty() || sub == "sweep")
        throw ConfigError("config: sweep.command must name a non-sweep command");
    base.set("command", sub);

    std::size_t total = 1;
    std::size_t cap = static_cast<std::size_t>(config.get_int("sweep.cap", 10000));
    for (const auto& [k, vs] : axes) total *= vs.size();
    if (total == 0 || total > cap)
        throw ConfigError("config: sweep size exceeds sweep.cap");

    std::string out_dir = config.get_string("out_dir", "sweep_out");
    fs::create_directories(out_dir);
    write_file_atomic((fs::path(out_dir) / "config.echo").string(), config.echo());

    struct Point {
        RunConfig cfg;
        std::vector<std::string> values;
        int status = -1;
        json report;
    };
    std::vector<Point> points(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        Point& pt = points[idx];
        pt.cfg = base;
        std::size_t rem = idx;
        for (const auto& [key, vs] : axes) {
            const std::string& v = vs[rem % vs.size()];
            rem /= vs.size();
            pt.cfg.set(key, v);
            pt.values.push_back(v);
        }
        char sub_name[32];
        std::snprintf(sub_name, sizeof(sub_name), "point_%04zu", idx);
        pt.cfg.set("out_dir", (fs::path(out_dir) / sub_name).string());
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= points.size()) break;
            Point& pt = points[i];
            try {
                pt.status = run(pt.cfg);
            } catch (...) {
                pt.status = 3;
            }
            std::ifstream is(fs::path(pt.cfg.get_string("out_dir", "")) / "report.json");
            if (is) {
                try {
                    is >> pt.report;
                } catch (...) {
                }
            }
        }
    };
    std::vector<std::thread> pool;
    int nthreads = std::max(1, std::min<int>(parallelism, static_cast<int>(points.size())));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    // Aggregate (single writer).
    std::vector<std::string> header;
    for (const auto& [key, vs] : axes) header.push_back(key);
    header.insert(header.end(),
                  {"status", "fitted_rate", "fit_r2", "terminal_rel_error", "synchronized",
                   "residual", "converged"});
    CsvWriter csv((fs::path(out_dir) / "sweep.csv").string(), header);
    for (const auto& pt : points) {
        std::string line;
        for (const auto& v : pt.values) line += v + ",";
        line += std::to_string(pt.status);
        auto num = [&](const char* outer, const char* inner) -> std::string {
            if (pt.report.is_null()) return "";
            const json* node = &pt.report;
            if (inner) {
                if (!node->contains(outer)) return "";
                node = &(*node)[outer];
                if (!node->contains(inner)) return "";
                node = &(*node)[inner];
            } else {
                if (!node->contains(outer)) return "";
                node = &(*node)[outer];
            }
            if (node->is_number()) return format_number(node->get<double>());
            if (node->is_boolean()) return node->get<bool>() ? "1" : "0";
            return "";
        };
        line += "," + num("fit", "rate");
        line += "," + num("fit", "r2");
        line += "," + num("terminal_rel_error", nullptr);
        line += "," + num("synchronized", nullptr);
        line += "," + num("residual", nullptr);
        line += "," + num("converged", nullptr);
        csv.raw_row(line);
    }
    csv.close();
    return 0;
}

} // namespace sqglab::harness
