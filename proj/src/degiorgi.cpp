#include "sqglab/degiorgi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sqglab/bounds.hpp"

namespace sqglab {

PhysicalField truncate(const PhysicalField& f, double lambda) {
    PhysicalField out = f;
    for (auto& v : out.data()) v = std::max(v - lambda, 0.0);
    return out;
}

LambdaDecomposition lambda_decompose(const PhysicalField& f, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("lambda_decompose: lambda must be positive");
    LambdaDecomposition d{PhysicalField(f.grid()), PhysicalField(f.grid()),
                          PhysicalField(f.grid())};
    for (std::size_t i = 0; i < f.data().size(); ++i) {
        double x = f.data()[i];
        d.phi_plus.data()[i] = std::max(x - lambda, 0.0);
        d.phi_minus.data()[i] = std::max(-x - lambda, 0.0);
        d.core.data()[i] = std::abs(x) <= lambda ? x : (x > lambda ? lambda : -lambda);
    }
    return d;
}

namespace {

/// L2-proxy square of a (not mean-zero) physical field: discrete Parseval,
/// i.e. the full coefficient sum including k = 0.
double l2proxy_sq(const PhysicalField& f) {
    double acc = 0.0;
    for (double v : f.data()) acc += v * v;
    return acc / static_cast<double>(f.data().size());
}

double dot_quadrature(const PhysicalField& a, const PhysicalField& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) acc += a.data()[i] * b.data()[i];
    double cell = (2.0 * M_PI / a.n()) * (2.0 * M_PI / a.n());
    return acc * cell;
}

} // namespace

namespace {

PhiEnergy phi_energy_from_physical(const PhysicalField& ph, double lambda, double gamma) {
    PhiEnergy e;
    for (int sign = 0; sign < 2; ++sign) {
        PhysicalField t(ph.grid());
        for (std::size_t i = 0; i < ph.data().size(); ++i) {
            double x = sign == 0 ? ph.data()[i] : -ph.data()[i];
            t.data()[i] = std::max(x - lambda, 0.0);
        }
        e.l2_sq += l2proxy_sq(t);
        SpectralField ts = to_spectral_with_mean(t);
        e.hgamma2_sq += std::pow(sobolev_norm(ts, 0.5 * gamma), 2);
    }
    return e;
}

} // namespace

PhiEnergy phi_vector_energy(const SpectralField& w, double lambda, double gamma,
                            int oversample_factor) {
    SpectralField w_os = oversample(w, oversample_factor);
    return phi_energy_from_physical(to_physical(w_os), lambda, gamma);
}

std::vector<double> level_energies(const Trajectory& w_traj, const LevelSetConfig& cfg,
                                   double gamma, double kappa) {
    if (w_traj.samples.size() < 2)
        throw std::invalid_argument("level_energies: need at least 2 samples");
    double s0 = w_traj.t0;
    double s_inf = s0 + cfg.delta_inf;
    if (w_traj.t_end() + 1e-12 < s_inf)
        throw std::invalid_argument("level_energies: trajectory window shorter than delta_inf");

    // Per-sample energies per level; trapezoid over samples within [s_n, s_inf].
    std::vector<double> U(static_cast<std::size_t>(cfg.n_max) + 1, 0.0);
    std::size_t n_samples = w_traj.samples.size();

    std::vector<std::vector<PhiEnergy>> energies(U.size());
    for (int n = 0; n <= cfg.n_max; ++n)
        energies[static_cast<std::size_t>(n)].resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        if (w_traj.time(i) > s_inf + 1e-12) break;
        PhysicalField ph = to_physical(oversample(w_traj.samples[i], cfg.oversample_factor));
        for (int n = 0; n <= cfg.n_max; ++n)
            energies[static_cast<std::size_t>(n)][i] =
                phi_energy_from_physical(ph, cfg.lambda(n), gamma);
    }

    for (int n = 0; n <= cfg.n_max; ++n) {
        double s_n = s0 + cfg.delta_inf * (1.0 - std::ldexp(1.0, -n));
        double sup = 0.0, integral = 0.0;
        bool have_prev = false;
        double prev_val = 0.0;
        for (std::size_t i = 0; i < n_samples; ++i) {
            double t = w_traj.time(i);
            if (t + 1e-12 < s_n || t > s_inf + 1e-12) continue;
            const PhiEnergy& e = energies[static_cast<std::size_t>(n)][i];
            sup = std::max(sup, e.l2_sq);
            if (have_prev) integral += 0.5 * w_traj.dt * (prev_val + e.hgamma2_sq);
            prev_val = e.hgamma2_sq;
            have_prev = true;
        }
        U[static_cast<std::size_t>(n)] = sup + kappa * integral;
    }
    return U;
}

std::vector<LevelSetResidual> levelset_inequality_check(
    const Trajectory& w_traj, const Trajectory& v_traj, const SqgParams& sqg,
    const NudgeParams& nudge, double lambda, int pairs, int oversample_factor) {
    if (w_traj.samples.size() != v_traj.samples.size())
        throw std::invalid_argument("levelset_inequality_check: trajectory length mismatch");
    std::size_t n_samples = w_traj.samples.size();
    if (n_samples < 2)
        throw std::invalid_argument("levelset_inequality_check: need at least 2 samples");

    TorusGrid big(w_traj.grid().n * oversample_factor, w_traj.grid().dealias_fraction);
    LPBlockSet blocks(big, BumpProfile::standard());
    SpectralField f_os = oversample(sqg.forcing.steady, oversample_factor);
    PhysicalField f_ph = to_physical(f_os);
    const auto& sm_big = blocks.lowpass_table(nudge.m);

    struct SampleTerms {
        double phi_l2_sq = 0.0;      // |Phi(w)|_{L2}^2
        double phi_h_sq = 0.0;       // |Phi(w)|_{Hgamma/2}^2
        double forcing_term = 0.0;   // int |f + mu S_m v| |Phi(w)|
        double square_fn_term = 0.0; // sum_pm int S((+-w)_lambda) S~(phi(+-w))
    };

    std::vector<SampleTerms> terms(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        SpectralField w_os = oversample(w_traj.samples[i], oversample_factor);
        PhysicalField w_ph = to_physical(w_os);

        SpectralField v_os = oversample(v_traj.samples[i], oversample_factor);
        SpectralField smv = v_os;
        {
            auto& c = smv.data();
            for (std::size_t k = 0; k < c.size(); ++k) c[k] *= sm_big[k];
        }
        PhysicalField smv_ph = to_physical(smv);

        LambdaDecomposition dec = lambda_decompose(w_ph, lambda);
        SampleTerms& st = terms[i];
        st.phi_l2_sq = l2proxy_sq(dec.phi_plus) + l2proxy_sq(dec.phi_minus);
        st.phi_h_sq =
            std::pow(sobolev_norm(to_spectral_with_mean(dec.phi_plus), 0.5 * sqg.gamma), 2) +
            std::pow(sobolev_norm(to_spectral_with_mean(dec.phi_minus), 0.5 * sqg.gamma), 2);

        PhysicalField abs_phi(big);
        for (std::size_t k = 0; k < abs_phi.data().size(); ++k) {
            double p = dec.phi_plus.data()[k], q = dec.phi_minus.data()[k];
            abs_phi.data()[k] = std::sqrt(p * p + q * q);
        }
        PhysicalField drive(big);
        for (std::size_t k = 0; k < drive.data().size(); ++k)
            drive.data()[k] = std::abs(f_ph.data()[k] + nudge.mu * smv_ph.data()[k]);
        st.forcing_term = dot_quadrature(drive, abs_phi);

        // square-function terms for +w and -w
        for (int sign = 0; sign < 2; ++sign) {
            PhysicalField signed_w(big);
            for (std::size_t k = 0; k < signed_w.data().size(); ++k)
                signed_w.data()[k] = sign == 0 ? w_ph.data()[k] : -w_ph.data()[k];
            LambdaDecomposition sd = lambda_decompose(signed_w, lambda);
            PhysicalField s_core =
                square_function(blocks, to_spectral_with_mean(sd.core), false);
            PhysicalField s_phi =
                square_function(blocks, to_spectral_with_mean(sd.phi_plus), true);
            st.square_fn_term += dot_quadrature(s_core, s_phi);
        }
    }

    // Pairs (s1, s2) spread deterministically over the window.
    std::vector<LevelSetResidual> out;
    int requested = std::max(1, pairs);
    for (int pidx = 0; pidx < requested; ++pidx) {
        std::size_t i1 = (static_cast<std::size_t>(pidx) * (n_samples - 1)) /
                         static_cast<std::size_t>(2 * requested);
        std::size_t i2 = n_samples - 1 - i1;
        if (i2 <= i1) i2 = i1 + 1;
        if (i2 >= n_samples) break;

        double diss = 0.0, force = 0.0, sq = 0.0;
        for (std::size_t i = i1 + 1; i <= i2; ++i) {
            diss += 0.5 * w_traj.dt * (terms[i - 1].phi_h_sq + terms[i].phi_h_sq);
            force += 0.5 * w_traj.dt * (terms[i - 1].forcing_term + terms[i].forcing_term);
            sq += 0.5 * w_traj.dt * (terms[i - 1].square_fn_term + terms[i].square_fn_term);
        }
        LevelSetResidual r;
        r.s1 = w_traj.time(i1);
        r.s2 = w_traj.time(i2);
        r.lhs = terms[i2].phi_l2_sq + sqg.kappa * diss;
        r.rhs = terms[i1].phi_l2_sq + 2.0 * std::sqrt(2.0) * force + 2.0 * nudge.mu * sq;
        r.residual = r.rhs - r.lhs;
        out.push_back(r);
    }
    return out;
}

double interpolation_exponent(double P, double Q, double gamma) {
    if (!(P > 1.0 && Q > 1.0 && std::isfinite(P) && std::isfinite(Q)))
        throw std::invalid_argument("interpolation_exponent: need 1 < P, Q < inf");
    if (!(gamma > 1.0 && gamma < 2.0))
        throw std::invalid_argument("interpolation_exponent: need gamma in (1,2)");
    double alpha = (0.5 - 1.0 / (P + Q)) / (0.5 - 0.25 * (2.0 - gamma));
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("interpolation_exponent: alpha outside (0,1)");
    return alpha;
}

double IterationLemmaParams::d_min() const {
    if (d_list.empty()) throw std::invalid_argument("IterationLemmaParams: empty d_list");
    double d = d_list.front();
    for (double x : d_list) d = std::min(d, x);
    if (!(d > 1.5))
        throw std::invalid_argument("IterationLemmaParams: need min d > 3/2");
    return d;
}

IterationLemmaReport iteration_lemma_check(const IterationLemmaParams& params, double M,
                                           int n_max) {
    IterationLemmaReport rep;
    rep.y0 = params.y0();

    auto sum_powers = [&](double v) {
        double s = 0.0;
        for (double d : params.d_list) s += std::pow(v, d);
        return s;
    };
    double t1 = std::pow(std::pow(2.0, 2.0 * (params.a + rep.y0)) * sum_powers(params.V1) /
                             params.V0,
                         1.0 / params.b);
    double t2 = std::pow(sum_powers(params.V0) / params.V0, 1.0 / params.b);
    rep.m_threshold = std::max(t1, t2);
    rep.hypothesis_met = M >= rep.m_threshold;

    rep.sequence.push_back(params.V0);
    rep.sequence.push_back(params.V1);
    rep.verdict = true;
    double v_prev = params.V1;
    for (int n = 2; n <= n_max; ++n) {
        double v = params.C * std::pow(2.0, n * params.a) / std::pow(M, params.b) *
                   sum_powers(v_prev);
        rep.sequence.push_back(v);
        if (v > params.V0 * std::pow(2.0, -n * rep.y0) * (1.0 + 1e-12)) rep.verdict = false;
        v_prev = v;
    }
    return rep;
}

LinftyBoundReport linfty_bound_estimate(const Trajectory& w_traj, const SqgParams& sqg,
                                        const NudgeParams& nudge, double rho0,
                                        double theta_hsigma, double delta_inf) {
    LinftyBoundReport rep;
    for (const auto& s : w_traj.samples)
        rep.measured_sup = std::max(rep.measured_sup, to_physical(s).max_abs());

    LevelSetConfig cfg;
    cfg.M = 1.0;  // lambda_0 = 0 is all that enters U_0
    cfg.n_max = 0;
    cfg.delta_inf = std::min(delta_inf, w_traj.t_end() - w_traj.t0);
    rep.u0_measured = level_energies(w_traj, cfg, sqg.gamma, sqg.kappa).front();

    double f_lp_val =
        bounds::f_lp(sqg.kappa, lebesgue_norm(to_physical(sqg.forcing.steady), nudge.p));
    double f_hmg2 =
        bounds::f_hminusgamma2(sqg.kappa, sobolev_norm(sqg.forcing.steady, -0.5 * sqg.gamma));
    double g2 = bounds::g_l2_sq(sqg.kappa, nudge.mu, f_hmg2, theta_hsigma);
    rep.u0_bound = bounds::u0_bound(nudge.mu, cfg.delta_inf, g2);

    rep.m_estimate = bounds::dg_sup_bound(sqg.kappa, nudge.mu, sqg.gamma, nudge.p, f_lp_val,
                                          rho0, cfg.delta_inf, rep.u0_measured);
    rep.margin = rep.measured_sup > 0.0 ? rep.m_estimate / rep.measured_sup
                                        : std::numeric_limits<double>::infinity();
    rep.required_C = rep.m_estimate > 0.0 ? rep.measured_sup / rep.m_estimate : 0.0;
    return rep;
}

} // namespace sqglab
