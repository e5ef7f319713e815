#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sqglab/spectral_ops.hpp"

namespace sqglab {

struct TimePeriodicForcing {
    SpectralField amplitude;
    double period = 1.0;
};

/// f(x,t) = steady(x) + amp(x) cos(2 pi t / period); the oscillatory part is
/// optional, so a plain field doubles as the time-independent case.
struct Forcing {
    SpectralField steady;
    std::optional<TimePeriodicForcing> oscillatory;

    static Forcing zero(const TorusGrid& grid) { return Forcing{SpectralField(grid), {}}; }

    bool time_dependent() const { return oscillatory.has_value(); }

    SpectralField at(double t) const {
        SpectralField f = steady;
        if (oscillatory) {
            double a = std::cos(2.0 * M_PI * t / oscillatory->period);
            const auto& amp = oscillatory->amplitude.data();
            for (std::size_t i = 0; i < f.data().size(); ++i)
                f.data()[i] += a * amp[i];
        }
        return f;
    }
};

struct SqgParams {
    double kappa = 1.0;
    double gamma = 1.5;
    Forcing forcing;
    double eps_viscosity = 0.0;
    bool advection_enabled = true;  // diagnostic switch exposing linear closed forms

    void validate() const;
};

enum class Scheme { IfRk4, ExpEuler };

struct StepperConfig {
    double dt = 1e-3;
    Scheme scheme = Scheme::IfRk4;
};

/// Uniformly sampled sequence of fields; linear interpolation in between,
/// clamped to the endpoint values outside the sampled range.
struct Trajectory {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<SpectralField> samples;

    std::size_t size() const { return samples.size(); }
    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double t_end() const { return samples.empty() ? t0 : time(samples.size() - 1); }
    const TorusGrid& grid() const { return samples.at(0).grid(); }

    SpectralField interpolate(double s) const;

    Trajectory& operator+=(const Trajectory& o);
    Trajectory& operator*=(double a);
    friend Trajectory operator+(Trajectory a, const Trajectory& b) { return a += b; }
    friend Trajectory operator*(double a, Trajectory t) { return t *= a; }
    Trajectory operator-(const Trajectory& o) const;

    /// Apply a spectral multiplier table to every sample.
    Trajectory mapped(const std::vector<double>& table) const;
};

/// Thrown when a state develops a non-finite coefficient; names the mode.
struct NonFiniteFieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check_finite(const SpectralField& f, const std::string& where);

/// Integrating-factor stepper: the diagonal linear symbol L(k) is applied via
/// exact exponentials, the remaining terms explicitly (RK4 or Euler).
class ExponentialStepper {
public:
    using Nonlin = std::function<void(const SpectralField&, double, SpectralField&)>;

    ExponentialStepper(const TorusGrid& grid, std::vector<double> symbol, StepperConfig cfg);

    SpectralField step(const SpectralField& state, double t, const Nonlin& nonlin) const;

    const std::vector<double>& exp_half() const { return ehalf_; }
    const std::vector<double>& exp_full() const { return efull_; }
    const StepperConfig& config() const { return cfg_; }

private:
    TorusGrid grid_;
    StepperConfig cfg_;
    std::vector<double> ehalf_, efull_;
};

/// kappa |k|^gamma + eps |k|^2 per lattice site.
std::vector<double> sqg_linear_symbol(const TorusGrid& grid, const SqgParams& params);

/// Nonlinear + forcing part of the SQG right-hand side: -u.grad(theta) + f(t).
void sqg_nonlinear(const SpectralField& theta, double t, const SqgParams& params,
                   SpectralField& out);

/// One step of the dissipative SQG equation.
SpectralField sqg_step(const SpectralField& state, const SqgParams& params,
                       const StepperConfig& cfg, double t = 0.0);

struct DiagnosticsSpec {
    double sigma = 1.0;
    double p = 8.0;
};

struct DiagnosticsRow {
    double t = 0.0;
    double l2proxy = 0.0;
    double hsigma = 0.0;
    double lp = 0.0;
    double linf = 0.0;
    double energy_residual = 0.0;
};

struct IntegrateResult {
    Trajectory traj;
    std::vector<DiagnosticsRow> rows;
};

IntegrateResult integrate(const SpectralField& theta0, const SqgParams& params,
                          const StepperConfig& cfg, double t_span, int sample_every,
                          const DiagnosticsSpec& ds = {});

struct AttractorSample {
    Trajectory window;
    bool settled = false;
    double drift = 0.0;          // relative drift of the running Hsigma max
    double theta_hsigma_max = 0.0;
};

/// Spin a random smooth initial condition onto the attractor and return the
/// post-spin-up window.
AttractorSample attractor_sample(const SqgParams& params, const StepperConfig& cfg,
                                 double spinup, double window, std::uint64_t seed,
                                 int sample_every, const DiagnosticsSpec& ds = {},
                                 double ic_norm = 1.0);

struct SteadyStateResult {
    SpectralField state;
    double residual = 0.0;
    bool converged = false;
    double t_used = 0.0;
};

/// Instantaneous steady residual kappa L^gamma theta (+ eps L^2 theta)
/// + u.grad theta - f in the Hdot^{sigma-gamma} norm.
double steady_residual(const SpectralField& theta, const SqgParams& params, double sigma);

/// Forward integration until the steady residual drops below tol.
SteadyStateResult steady_state_find(const SqgParams& params, const StepperConfig& cfg,
                                    double tol, double t_max, double sigma = 1.0,
                                    const SpectralField* theta0 = nullptr);

struct PeriodicOrbitResult {
    Trajectory orbit;                    // one period
    std::vector<double> residuals;       // Poincare-iteration history
    bool converged = false;
};

/// Picard iteration of the period-tau_f Poincare map from a spun-up state.
PeriodicOrbitResult periodic_orbit_find(const SqgParams& params, const StepperConfig& cfg,
                                        double tol, int max_iters, double sigma = 1.0,
                                        double tau_f = 0.0, int orbit_samples = 32);

struct ResidualSeries {
    std::vector<double> residuals;       // consecutive sample pairs
    double max_abs = 0.0;                // worst cumulative residual
    bool pass = false;
};

/// Energy-balance residual d/ds |th|^2 + 2 kappa |th|^2_{gamma/2} = 2<f,th>
/// integrated by trapezoid between samples.
ResidualSeries apriori_bound_check(const Trajectory& traj, const SqgParams& params,
                                   double tolerance);

} // namespace sqglab
