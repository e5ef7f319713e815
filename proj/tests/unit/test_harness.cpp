#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sqglab/harness.hpp"
#include "sqglab/io.hpp"
#include "sqglab/littlewood_paley.hpp"
#include "sqglab/nudging.hpp"

using namespace sqglab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "sqglab_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("format_number: 17 significant digits, locale-independent") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0 / 3.0).find(',') == std::string::npos);
    double x = 0.1234567890123456789;
    CHECK(std::stod(format_number(x)) == x);  // round-trips exactly
}

TEST_CASE("RunConfig: parsing, comments, typed access, unknown keys") {
    RunConfig c = RunConfig::from_text("# comment\n"
                                       "nudge.mu = 64\n"
                                       "grid.n=32   # inline\n"
                                       "run.ic = random:1\n");
    CHECK(c.get_double("nudge.mu", 0.0) == 64.0);
    CHECK(c.get_int("grid.n", 0) == 32);
    CHECK(c.get_string("run.ic", "") == "random:1");
    CHECK(c.get_double("missing", 2.5) == 2.5);
    CHECK_THROWS_AS(c.get_int("run.ic", 0), ConfigError);

    CHECK_THROWS_AS(RunConfig::from_text("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(c.reject_unknown({"grid.n"}), ConfigError);
    CHECK_NOTHROW(c.reject_unknown({"grid.n", "nudge.mu", "run.ic"}));
}

TEST_CASE("run: minimal simulate smoke test") {
    fs::path dir = fresh_dir("smoke");
    RunConfig c;
    c.set("command", "simulate");
    c.set("grid.n", "32");
    c.set("run.t_span", "0.1");
    c.set("stepper.dt", "0.005");
    c.set("run.sample_every", "5");
    c.set("out_dir", dir.string());
    CHECK(harness::run(c) == 0);

    std::string norms = slurp(dir / "norms.csv");
    CHECK(count_lines(norms) >= 3);  // header + >= 2 rows
    CHECK(norms.rfind("t,l2proxy,hsigma,lp,linf,energy_residual", 0) == 0);
    CHECK(fs::exists(dir / "config.echo"));
    CHECK(fs::exists(dir / "run_meta.json"));
    CHECK(!fs::exists(dir / "norms.csv.partial"));
}

TEST_CASE("run: invalid configs exit 2 naming the problem") {
    fs::path dir = fresh_dir("invalid");
    RunConfig c;
    c.set("command", "simulate");
    c.set("grid.n", "32");
    c.set("sqg.gamma", "2.5");  // (H1) violation
    c.set("out_dir", dir.string());
    CHECK(harness::run(c) == 2);

    RunConfig unknown;
    unknown.set("command", "simulate");
    unknown.set("grid.m", "32");  // typo'd key
    unknown.set("out_dir", dir.string());
    CHECK(harness::run(unknown) == 2);

    RunConfig nocmd;
    CHECK(harness::run(nocmd) == 2);
}

TEST_CASE("run: fixed seed reruns are byte-identical") {
    fs::path a = fresh_dir("det_a");
    fs::path b = fresh_dir("det_b");
    RunConfig c;
    c.set("command", "simulate");
    c.set("grid.n", "32");
    c.set("forcing", "lowmode:0.1");
    c.set("run.ic", "random:1");
    c.set("seed", "17");
    c.set("run.t_span", "0.2");
    c.set("stepper.dt", "0.005");
    c.set("run.sample_every", "10");

    c.set("out_dir", a.string());
    REQUIRE(harness::run(c) == 0);
    c.set("out_dir", b.string());
    REQUIRE(harness::run(c) == 0);

    CHECK(slurp(a / "norms.csv") == slurp(b / "norms.csv"));
    CHECK(slurp(a / "snap_000004.sqgf") == slurp(b / "snap_000004.sqgf"));
}

TEST_CASE("run: steady + nudge + diagnose round trip through run directories") {
    fs::path ref_dir = fresh_dir("ref");
    RunConfig sim;
    sim.set("command", "simulate");
    sim.set("grid.n", "32");
    sim.set("forcing", "lowmode:0.1");
    sim.set("run.ic", "random:1");
    sim.set("seed", "3");
    sim.set("run.spinup", "15");
    sim.set("run.t_span", "1.0");
    sim.set("stepper.dt", "0.005");
    sim.set("run.sample_every", "20");
    sim.set("out_dir", ref_dir.string());
    REQUIRE(harness::run(sim) == 0);

    Trajectory ref = harness::load_trajectory(ref_dir.string());
    CHECK(ref.samples.size() >= 2);
    CHECK(ref.dt == doctest::Approx(0.1));

    fs::path nudge_dir = fresh_dir("nudge");
    RunConfig nd;
    nd.set("command", "nudge");
    nd.set("grid.n", "32");
    nd.set("forcing", "lowmode:0.1");
    nd.set("stepper.dt", "0.005");
    nd.set("run.t_span", "1.0");
    nd.set("nudge.mu", "16");
    nd.set("nudge.m", "4");
    nd.set("nudge.ref", ref_dir.string());
    nd.set("nudge.w0", "zero");
    nd.set("out_dir", nudge_dir.string());
    REQUIRE(harness::run(nd) == 0);
    CHECK(fs::exists(nudge_dir / "sync.csv"));
    CHECK(fs::exists(nudge_dir / "report.json"));

    fs::path diag_dir = fresh_dir("diag");
    RunConfig dg;
    dg.set("command", "diagnose");
    dg.set("grid.n", "32");
    dg.set("forcing", "lowmode:0.1");
    dg.set("diagnose.run", nudge_dir.string());
    dg.set("diagnose.check", "all");
    dg.set("diagnose.n_max", "6");
    dg.set("out_dir", diag_dir.string());
    CHECK(harness::run(dg) == 0);
    std::string diag = slurp(diag_dir / "diagnostics.json");
    CHECK(diag.find("degiorgi") != std::string::npos);
    CHECK(diag.find("levelset") != std::string::npos);
}

TEST_CASE("run: lp-verify emits a per-block constant report") {
    fs::path dir = fresh_dir("lp");
    RunConfig c;
    c.set("command", "lp-verify");
    c.set("grid.n", "32");
    c.set("lp.ensemble", "5");
    c.set("seed", "5");
    c.set("out_dir", dir.string());
    CHECK(harness::run(c) == 0);
    std::string rep = slurp(dir / "lp_verify.json");
    CHECK(rep.find("\"j=3\"") != std::string::npos);
    CHECK(rep.find("lowpass") != std::string::npos);
}

TEST_CASE("sweep: one-point sweep reduces to run; mu-axis rates are monotone") {
    // shared reference
    fs::path ref_dir = fresh_dir("sweep_ref");
    RunConfig sim;
    sim.set("command", "simulate");
    sim.set("grid.n", "32");
    sim.set("forcing", "lowmode:0.1");
    sim.set("run.ic", "random:1");
    sim.set("seed", "7");
    sim.set("run.spinup", "15");
    sim.set("run.t_span", "2.0");
    sim.set("stepper.dt", "0.005");
    sim.set("run.sample_every", "20");
    sim.set("out_dir", ref_dir.string());
    REQUIRE(harness::run(sim) == 0);

    fs::path dir = fresh_dir("sweep");
    RunConfig sw;
    sw.set("command", "sweep");
    sw.set("sweep.command", "nudge");
    sw.set("grid.n", "32");
    sw.set("forcing", "lowmode:0.1");
    sw.set("stepper.dt", "0.005");
    sw.set("run.t_span", "2.0");
    sw.set("nudge.m", "4");
    sw.set("nudge.ref", ref_dir.string());
    sw.set("nudge.w0", "zero");
    sw.set("sweep.axis.nudge.mu", "4,16,64");
    sw.set("threads", "2");
    sw.set("out_dir", dir.string());
    REQUIRE(harness::run(sw) == 0);

    std::string csv = slurp(dir / "sweep.csv");
    std::istringstream is(csv);
    std::string header;
    std::getline(is, header);
    CHECK(header.rfind("nudge.mu,status,", 0) == 0);
    double prev_rate = 0.0;
    int rows = 0;
    for (std::string line; std::getline(is, line);) {
        ++rows;
        std::istringstream ls(line);
        std::string mu, status, rate;
        std::getline(ls, mu, ',');
        std::getline(ls, status, ',');
        std::getline(ls, rate, ',');
        CHECK(status == "0");
        double r = std::stod(rate);
        CHECK(r >= prev_rate * 0.95);  // non-decreasing until saturation
        prev_rate = r;
    }
    CHECK(rows == 3);
}

TEST_CASE("sweep: grid classification boundary brackets the bisection value") {
    TorusGrid g(32);
    SqgParams p;
    p.kappa = 0.25;
    p.gamma = 1.5;
    p.forcing = harness::parse_forcing("lowmode:0.2", g);
    StepperConfig cfg{5e-3, Scheme::IfRk4};
    LPBlockSet blocks(g, BumpProfile::standard());
    AttractorSample att = attractor_sample(p, cfg, 30.0, 5.0, 11, 20);

    NudgeParams np;
    np.m = 5;
    SyncOptions opt;
    MuSearchResult search = minimal_mu_search(p, np, blocks, cfg, att.window,
                                              SpectralField(g), 0.0, 16.0, 0.2, opt);

    // classify on a coarse mu grid; the sign change must bracket the search
    std::vector<double> grid_mu{1.0, 2.0, 4.0, 8.0};
    double boundary_lo = 0.0, boundary_hi = 16.0;
    bool prev = false;
    for (std::size_t i = 0; i < grid_mu.size(); ++i) {
        NudgeParams q = np;
        q.mu = grid_mu[i];
        bool sync =
            synchronize_experiment(p, q, blocks, cfg, att.window, SpectralField(g), opt)
                .synchronized;
        if (i == 0) prev = sync;
        if (sync && !prev) {
            boundary_lo = grid_mu[i - 1];
            boundary_hi = grid_mu[i];
            break;
        }
        if (sync && i == 0) {
            boundary_hi = grid_mu[0];
            break;
        }
        prev = sync;
        boundary_lo = grid_mu[i];
    }
    CHECK(search.mu_lo >= boundary_lo - 1e-9);
    CHECK(search.mu_hi <= boundary_hi + 1e-9);
}
