// sqglab command-line front end. Subcommand flags map onto the flat dotted
// config keys; a --config file supplies defaults and flags override it.

#include <CLI11.hpp>

#include "sqglab/harness.hpp"

using sqglab::RunConfig;

namespace {

struct FlagMap {
    CLI::App* app;
    RunConfig* cfg;

    void opt(const std::string& flag, const std::string& key, const std::string& desc) {
        auto* c = cfg;
        app->add_option_function<std::string>(
               flag, [c, key](const std::string& v) { c->set(key, v); }, desc)
            ->expected(1);
    }
};

void add_common(FlagMap& f) {
    f.opt("--n", "grid.n", "grid points per dimension");
    f.opt("--dealias", "grid.dealias", "dealias fraction (default 2/3)");
    f.opt("--gamma", "sqg.gamma", "dissipation power, 1 < gamma < 2");
    f.opt("--kappa", "sqg.kappa", "dissipation prefactor");
    f.opt("--eps", "sqg.eps", "optional epsilon-viscosity");
    f.opt("--advection", "sqg.advection", "enable advection (true/false)");
    f.opt("--forcing", "forcing",
          "zero | lowmode:<amp> | cos1:<amp> | osc1:<amp>:<tau> | file:<path>");
    f.opt("--dt", "stepper.dt", "time step");
    f.opt("--scheme", "stepper.scheme", "ifrk4 | expeuler");
    f.opt("--t-span", "run.t_span", "integration window");
    f.opt("--spinup", "run.spinup", "spin-up time before the window");
    f.opt("--sample-every", "run.sample_every", "steps between samples");
    f.opt("--ic", "run.ic", "zero | random:<norm> | file:<path>");
    f.opt("--sigma", "diag.sigma", "Sobolev index for diagnostics");
    f.opt("--p", "diag.p", "Lebesgue exponent for diagnostics");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sqglab: pseudo-spectral laboratory for subcritical dissipative SQG"};
    app.require_subcommand(1);

    std::string config_file;
    RunConfig cli;
    app.add_option("--config", config_file, "flat key=value config file");
    app.add_option_function<std::string>(
        "--out-dir", [&](const std::string& v) { cli.set("out_dir", v); }, "output directory");
    app.add_option_function<std::string>(
        "--seed", [&](const std::string& v) { cli.set("seed", v); }, "run seed");
    app.add_option_function<std::string>(
        "--threads", [&](const std::string& v) { cli.set("threads", v); },
        "sweep parallelism (or SQGLAB_THREADS)");

    struct Sub {
        CLI::App* app;
        std::string command;
    };
    std::vector<Sub> subs;

    auto make_sub = [&](const std::string& name, const std::string& desc) {
        CLI::App* s = app.add_subcommand(name, desc);
        subs.push_back({s, name});
        FlagMap f{s, &cli};
        add_common(f);
        return f;
    };

    make_sub("simulate", "integrate the SQG equation and record norms/snapshots");

    {
        FlagMap f = make_sub("steady", "forward-integrate to a steady state");
        f.opt("--tol", "steady.tol", "steady residual tolerance");
        f.opt("--t-max", "steady.t_max", "give up after this time");
    }
    {
        FlagMap f = make_sub("periodic", "Poincare-map iteration to a periodic orbit");
        f.opt("--tau-f", "periodic.tau_f", "forcing period (for steady forcing)");
        f.opt("--tol", "periodic.tol", "period-map residual tolerance");
        f.opt("--max-iters", "periodic.max_iters", "Picard iteration cap");
    }
    {
        FlagMap f = make_sub("nudge", "synchronization twin experiment against a reference");
        f.opt("--mu", "nudge.mu", "relaxation rate");
        f.opt("--m", "nudge.m", "Littlewood-Paley cutoff index");
        f.opt("--operator", "nudge.operator", "lp | sharp | insert");
        f.opt("--cutoff", "nudge.cutoff", "wavenumber cutoff for sharp/insert");
        f.opt("--ref", "nudge.ref", "reference run directory");
        f.opt("--w0", "nudge.w0", "zero | random:<seed> | file:<path>");
        f.opt("--sync-threshold", "nudge.sync_threshold", "classification threshold");
    }
    {
        FlagMap f = make_sub("detform", "integrate the determining-form ODE");
        f.opt("--ref-steady", "detform.ref_steady", "steady state snapshot file");
        f.opt("--v0", "detform.v0",
              "proj-steady | proj-attractor:<run> | perturbed:<eps>:<seed>");
        f.opt("--m", "detform.m", "Littlewood-Paley cutoff index");
        f.opt("--mu", "detform.mu", "relaxation rate");
        f.opt("--tau-span", "detform.tau_span", "tau integration span (0: 50/lambda0)");
        f.opt("--dtau", "detform.dtau", "tau step (0: 0.1/lambda0)");
        f.opt("--rhs-power", "detform.rhs_power", "X-norm power in the vector field (1|2)");
        f.opt("--window", "detform.window", "trajectory window length");
        f.opt("--tol", "detform.tol", "stop when the residual drops below this");
    }
    {
        FlagMap f = make_sub("diagnose", "level-set / De Giorgi / bound audits of a run");
        f.opt("--run", "diagnose.run", "run directory to audit");
        f.opt("--check", "diagnose.check", "levelset | degiorgi | bounds | lemmas | all");
        f.opt("--M", "diagnose.M", "target bound for the truncation levels");
        f.opt("--delta-inf", "diagnose.delta_inf", "De Giorgi time offset");
        f.opt("--n-max", "diagnose.n_max", "deepest truncation level");
    }
    {
        FlagMap f = make_sub("lp-verify", "empirical Bernstein/Littlewood-Paley constants");
        f.opt("--ensemble", "lp.ensemble", "ensemble size");
        f.opt("--beta", "lp.beta", "derivative order");
        f.opt("--lp-p", "lp.p", "lower Lebesgue exponent");
        f.opt("--lp-q", "lp.q", "upper Lebesgue exponent");
    }
    {
        FlagMap f = make_sub("sweep", "Cartesian parameter sweep of another command");
        f.opt("--command", "sweep.command", "command to sweep");
        f.opt("--cap", "sweep.cap", "maximum number of grid points");
    }

    CLI11_PARSE(app, argc, argv);

    RunConfig cfg;
    if (!config_file.empty()) {
        try {
            cfg = RunConfig::from_file(config_file);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "[sqglab] %s\n", e.what());
            return 2;
        }
    }
    for (const auto& [k, v] : cli.entries()) cfg.set(k, v);
    for (const auto& s : subs)
        if (s.app->parsed()) cfg.set("command", s.command);

    return sqglab::harness::run(cfg);
}
