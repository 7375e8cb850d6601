#pragma once

// Nondimensional Keller-Miksis bubble dynamics under arbitrary sampled forcing,
// far-field scattered pressure, and the closed-form linearised step response.

#include "bubblesynth/errors.hpp"
#include "bubblesynth/physics_params.hpp"
#include "bubblesynth/rk4.hpp"
#include "bubblesynth/score_codec.hpp"

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <string>
#include <vector>

namespace bubblesynth {

struct BubbleState {
    double r = 1.0;      // R / R0
    double r_dot = 0.0;  // dr/dtau
    double tau = 0.0;
};

/// Acoustic forcing seen by the equation at one instant: P_a(tau) and dP_a/dtau.
struct Forcing {
    double value = 0.0;
    double derivative = 0.0;
};

struct Derivatives {
    double r_dot = 0.0;
    double r_ddot = 0.0;
};

/// Far-field pressure (r/h)(r r'' + 2 r'^2), h in units of R0.
inline double scattered_pressure(double r, double r_dot, double r_ddot, double h)
{
    if (!(h > 0.0))
        throw DomainError("far-field distance h must be positive");
    return (r / h) * (r * r_ddot + 2.0 * r_dot * r_dot);
}

inline double km_acceleration(double r, double v, Forcing p, const DimensionlessSet& g)
{
    const double om = g.size_parameter;
    const double lead = (1.0 - om * v) * r + om * g.viscous;
    if (std::abs(lead) < 1e-12)
        throw SolverError("Keller-Miksis leading coefficient vanishes", 0.0);

    const double gas = (g.elasticity + g.surface_tension) *
                       (1.0 + (1.0 - g.stiffness) * om * v) * std::pow(r, -g.stiffness);
    const double rhs = (om * v - 3.0) * 0.5 * v * v - (g.surface_tension + g.viscous * v) / r +
                       gas - (1.0 + om * v) * (g.elasticity + g.forcing * p.value) -
                       g.forcing * om * r * p.derivative;
    return rhs / lead;
}

inline Derivatives km_rhs(const BubbleState& s, Forcing p, const DimensionlessSet& g)
{
    if (!(s.r > 0.0))
        throw DomainError("radius must be positive");
    return {s.r_dot, km_acceleration(s.r, s.r_dot, p, g)};
}

struct Trajectory {
    double tau_start = 0.0;
    double dtau = 0.0;           // spacing between stored points
    double angular_frequency = 0.0;  // omega_p, for seconds
    std::vector<double> r;
    std::vector<double> r_dot;
    std::vector<double> p_scat;

    std::size_t size() const { return r.size(); }
    double tau(std::size_t i) const { return tau_start + static_cast<double>(i) * dtau; }
    double seconds(std::size_t i) const { return tau(i) / angular_frequency; }
    double dt_seconds() const { return dtau / angular_frequency; }
};

/// How the dP_a/dtau term is realised for sampled (square) forcing.
enum class ForcingDerivative {
    dropped,           // term omitted; it is O(Omega)
    first_difference,  // (P_k - P_{k-1}) / dtau, an impulse spread over one step
};

struct SolverOptions {
    double dtau = 0.0;   // integration step
    double tau_end = 0.0;
    double far_field_distance = 100.0;  // h in units of R0
    ForcingDerivative derivative = ForcingDerivative::dropped;
    double collapse_radius = 1.0e-3;
    std::size_t output_stride = 1;
    bool check_resolution = true;
};

/// Default step: one hundredth of the natural period of the unforced bubble.
inline double default_dtau(const DimensionlessSet& g)
{
    const double omega0 = std::sqrt(g.stiffness * g.elasticity_base) / g.size_parameter;
    return 2.0 * std::numbers::pi / (100.0 * omega0);
}

/// Fixed-step RK4 integration. Forcing is a zero-order hold on its sample grid, read at
/// each step's midpoint and held over the step. An empty forcing signal means no drive.
inline Trajectory simulate(const BubbleState& initial, const PressureSignal& forcing,
                           const DimensionlessSet& g, const SolverOptions& opt)
{
    detail::require_positive(opt.dtau, "dtau");
    detail::require(opt.tau_end > initial.tau, "tau_end must exceed the initial tau");
    detail::require_positive(opt.far_field_distance, "far_field_distance");
    detail::require(initial.r > 0.0, "initial radius must be positive");
    const std::size_t stride = opt.output_stride == 0 ? 1 : opt.output_stride;

    const double omega0 = std::sqrt(g.stiffness * g.elasticity_base) / g.size_parameter;
    const double sample_tau = forcing.samples.empty() ? 0.0 : g.to_tau(forcing.dt_seconds);
    if (opt.check_resolution) {
        if (opt.dtau > 2.0 * std::numbers::pi / (40.0 * omega0))
            throw DomainError("dtau resolves fewer than 40 steps per natural period");
        if (!forcing.samples.empty() && opt.dtau > sample_tau * (1.0 + 1e-9))
            throw DomainError("dtau is coarser than the forcing sample spacing");
    }
    const auto steps =
        static_cast<std::size_t>(std::llround((opt.tau_end - initial.tau) / opt.dtau));
    detail::require(steps >= 1, "integration interval shorter than one step");
    if (!forcing.samples.empty()) {
        const double covered = sample_tau * static_cast<double>(forcing.samples.size());
        if (covered < (opt.tau_end - initial.tau) - opt.dtau)
            throw DomainError("forcing signal ends before tau_end");
    }

    auto held_forcing = [&](std::size_t step) {
        if (forcing.samples.empty())
            return 0.0;
        const double local = (static_cast<double>(step) + 0.5) * opt.dtau;
        auto idx = static_cast<std::size_t>(local / sample_tau);
        if (idx >= forcing.samples.size())
            idx = forcing.samples.size() - 1;
        return forcing.samples[idx];
    };

    Trajectory traj;
    traj.tau_start = initial.tau;
    traj.dtau = opt.dtau * static_cast<double>(stride);
    traj.angular_frequency = g.angular_frequency;
    const std::size_t stored = steps / stride + 1;
    traj.r.reserve(stored);
    traj.r_dot.reserve(stored);
    traj.p_scat.reserve(stored);

    const bool with_derivative = opt.derivative == ForcingDerivative::first_difference;
    OdeState<2> y{initial.r, initial.r_dot};
    for (std::size_t i = 0;; ++i) {
        const double tau = initial.tau + static_cast<double>(i) * opt.dtau;
        if (!(y[0] >= opt.collapse_radius) || !std::isfinite(y[1]))
            throw SolverError("bubble collapse (r=" + std::to_string(y[0]) + ")", tau);

        // The final stored point reuses the forcing of the last step.
        const std::size_t step = i < steps ? i : steps - 1;
        Forcing f{held_forcing(step), 0.0};
        if (with_derivative)
            f.derivative = (f.value - (step == 0 ? 0.0 : held_forcing(step - 1))) / opt.dtau;

        double accel = 0.0;
        try {
            accel = km_acceleration(y[0], y[1], f, g);
        } catch (const SolverError&) {
            throw SolverError("Keller-Miksis leading coefficient vanishes", tau);
        }
        if (i % stride == 0) {
            traj.r.push_back(y[0]);
            traj.r_dot.push_back(y[1]);
            traj.p_scat.push_back(scattered_pressure(y[0], y[1], accel, opt.far_field_distance));
        }
        if (i == steps)
            break;

        auto rhs = [&](double, const OdeState<2>& s) -> OdeState<2> {
            return {s[1], km_acceleration(s[0], s[1], f, g)};
        };
        try {
            y = rk4_step<2>(y, tau, opt.dtau, rhs);
        } catch (const SolverError&) {
            throw SolverError("Keller-Miksis leading coefficient vanishes", tau);
        }
    }
    return traj;
}

/// Damped linear oscillator obtained by linearising about r = 1 under a unit step.
struct LinearOscillatorParams {
    double quality = 0.0;          // Q
    double forcing_scale = 0.0;    // Lambda
    double omega0 = 0.0;           // undamped natural frequency
    double omega_damped = 0.0;     // omega'; imaginary magnitude when overdamped
    double relaxation_time = 0.0;  // tau0 = 2Q
    bool overdamped = false;
};

enum class Approximation {
    exact,          // closed forms keeping viscosity and surface tension
    elastic_limit,  // M >> W, R
};

inline LinearOscillatorParams linear_oracle(const DimensionlessSet& g,
                                            Approximation mode = Approximation::exact)
{
    detail::require(g.stiffness * g.elasticity_base > 0.0, "linear_oracle needs K*M_b > 0");
    const double om = g.size_parameter;
    LinearOscillatorParams p;
    if (mode == Approximation::exact) {
        const double a = (3.0 * g.surface_tension + 3.0 * g.elasticity) * g.polytropic_exponent -
                         g.surface_tension;
        const double inertia = om * g.viscous + 1.0;
        p.quality = inertia / (g.viscous + g.forcing * om + a * om);
        p.forcing_scale = g.forcing / inertia;
        p.omega0 = std::sqrt(a / inertia);
    } else {
        p.quality = om / (g.stiffness * g.elasticity_base);
        p.forcing_scale = g.forcing_base / (om * om);
        p.omega0 = std::sqrt(g.stiffness * g.elasticity_base) / om;
    }
    p.relaxation_time = 2.0 * p.quality;
    const double disc = p.omega0 * p.omega0 - 1.0 / (4.0 * p.quality * p.quality);
    p.overdamped = disc <= 0.0;
    p.omega_damped = std::sqrt(std::abs(disc));
    return p;
}

/// r1(tau) for a unit step switched on at tau = 0 from rest at equilibrium.
inline double linear_step_response(const LinearOscillatorParams& p, double tau)
{
    if (p.overdamped)
        throw DomainError("linear_step_response needs an underdamped oscillator");
    detail::require(tau >= 0.0, "tau must be non-negative");
    const double w2 = p.omega0 * p.omega0;
    const double wd = p.omega_damped;
    return std::exp(-tau / p.relaxation_time) *
               (p.forcing_scale * std::sin(wd * tau) / (2.0 * p.quality * w2 * wd) +
                p.forcing_scale * std::cos(wd * tau) / w2) -
           p.forcing_scale / w2;
}

/// Right-hand side of r1'' + r1'/Q + omega0^2 r1 = -Lambda as a first-order system.
inline auto linearized_rhs(const LinearOscillatorParams& p)
{
    return [p](double, const OdeState<2>& y) -> OdeState<2> {
        return {y[1], -y[1] / p.quality - p.omega0 * p.omega0 * y[0] - p.forcing_scale};
    };
}

/// Square pulse of sign `amplitude` lasting pulse_tau, followed by tail_tau of silence,
/// sampled every sample_tau (all in units of 1/omega_p).
inline PressureSignal step_pulse(double amplitude, double pulse_tau, double tail_tau,
                                 double sample_tau, const DimensionlessSet& g)
{
    detail::require(amplitude == 1.0 || amplitude == -1.0, "pulse amplitude must be +1 or -1");
    detail::require_positive(pulse_tau, "pulse duration");
    detail::require(tail_tau >= 0.0, "tail duration must be non-negative");
    detail::require_positive(sample_tau, "sample spacing");
    const auto on = static_cast<std::size_t>(std::llround(pulse_tau / sample_tau));
    const auto off = static_cast<std::size_t>(std::llround(tail_tau / sample_tau));
    detail::require(on >= 1, "pulse shorter than one sample");

    PressureSignal s;
    s.dt_seconds = g.to_seconds(sample_tau);
    s.samples.assign(on, amplitude);
    s.samples.insert(s.samples.end(), off, 0.0);
    return s;
}

inline void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                                 std::size_t stride = 1)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    out << "t_seconds,tau,r,r_dot,p_scat\n" << std::setprecision(12);
    stride = stride == 0 ? 1 : stride;
    for (std::size_t i = 0; i < traj.size(); i += stride)
        out << traj.seconds(i) << ',' << traj.tau(i) << ',' << traj.r[i] << ',' << traj.r_dot[i]
            << ',' << traj.p_scat[i] << '\n';
    if (!out)
        throw IoError("write failed for " + path);
}

}  // namespace bubblesynth
