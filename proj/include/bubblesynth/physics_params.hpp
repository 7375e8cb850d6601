#pragma once

// Dimensional parameters of the liquid, the bubble and the acoustic drive, and the
// nondimensional groups of the Keller-Miksis equation derived from them.
//
// Lengths are scaled by the equilibrium radius R0 and time by 1/omega_p, where
// omega_p = 2*pi*f_p is the reference (pulse repetition) angular frequency.

#include "bubblesynth/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace bubblesynth {

/// Liquid properties in SI units. Defaults: water at 20 degC.
struct FluidProperties {
    double sound_speed = 1484.0;        // c [m/s]
    double dynamic_viscosity = 1.0e-3;  // mu [kg/(m s)]
    double surface_tension = 7.25e-2;   // sigma [N/m]
    double density = 1.0e3;             // rho [kg/m^3]
    double vapor_pressure = 2330.0;     // P_v [Pa]

    void validate() const
    {
        detail::require_positive(sound_speed, "sound_speed");
        detail::require(dynamic_viscosity >= 0.0, "dynamic_viscosity must be non-negative");
        detail::require_positive(surface_tension, "surface_tension");
        detail::require_positive(density, "density");
        detail::require_positive(vapor_pressure, "vapor_pressure");
    }
};

/// Air bubble of millimetre size at atmospheric static pressure.
struct BubbleConfig {
    double equilibrium_radius = 1.0e-3;  // R0 [m]
    double static_pressure = 1.0e5;      // P0 [Pa]
    double polytropic_exponent = 4.0 / 3.0;

    void validate(const FluidProperties& fluid) const
    {
        detail::require_positive(equilibrium_radius, "equilibrium_radius");
        detail::require(static_pressure > fluid.vapor_pressure,
                        "static_pressure must exceed vapor_pressure");
        detail::require(polytropic_exponent >= 1.0, "polytropic_exponent must be >= 1");
    }
};

struct DriveConfig {
    double pressure_amplitude = 0.2e5;   // alpha [Pa], signed scale of P_a
    double reference_frequency = 100.0;  // f_p [Hz]

    double angular_frequency() const { return 2.0 * std::numbers::pi * reference_frequency; }

    void validate() const
    {
        detail::require_positive(reference_frequency, "reference_frequency");
        detail::require(std::isfinite(pressure_amplitude), "pressure_amplitude must be finite");
    }
};

/// Nondimensional groups. The *_base members are the Omega-independent factors;
/// the scaled groups follow as R = R_b/Omega^2, W = W_b/Omega^3, M = M_b/Omega^2, Me = Me_b/Omega^2.
struct DimensionlessSet {
    double size_parameter = 0.0;   // Omega = omega_p R0 / c
    double viscous = 0.0;          // inverse Reynolds number
    double surface_tension = 0.0;  // inverse Weber number
    double elasticity = 0.0;       // gas elasticity
    double forcing = 0.0;          // acoustic forcing strength
    double stiffness = 0.0;        // K = 3 kappa

    double viscous_base = 0.0;
    double surface_tension_base = 0.0;
    double elasticity_base = 0.0;
    double forcing_base = 0.0;

    double polytropic_exponent = 0.0;
    double angular_frequency = 0.0;  // omega_p [rad/s], converts tau to seconds

    double to_seconds(double tau) const { return tau / angular_frequency; }
    double to_tau(double seconds) const { return seconds * angular_frequency; }
    /// Dimensionless angular frequency -> Hz.
    double to_hertz(double omega) const
    {
        return omega * angular_frequency / (2.0 * std::numbers::pi);
    }
};

inline DimensionlessSet dimensionless_groups(const FluidProperties& fluid,
                                             const BubbleConfig& bubble,
                                             const DriveConfig& drive)
{
    fluid.validate();
    bubble.validate(fluid);
    drive.validate();

    const double c = fluid.sound_speed;
    const double rho_c2 = fluid.density * c * c;
    const double wp = drive.angular_frequency();

    DimensionlessSet g;
    g.angular_frequency = wp;
    g.polytropic_exponent = bubble.polytropic_exponent;
    g.stiffness = 3.0 * bubble.polytropic_exponent;
    g.size_parameter = wp * bubble.equilibrium_radius / c;

    g.viscous_base = 4.0 * fluid.dynamic_viscosity * wp / rho_c2;
    g.surface_tension_base = 2.0 * fluid.surface_tension * wp / (rho_c2 * c);
    g.elasticity_base = (bubble.static_pressure - fluid.vapor_pressure) / rho_c2;
    g.forcing_base = drive.pressure_amplitude / rho_c2;

    const double om2 = g.size_parameter * g.size_parameter;
    g.viscous = g.viscous_base / om2;
    g.surface_tension = g.surface_tension_base / (om2 * g.size_parameter);
    g.elasticity = g.elasticity_base / om2;
    g.forcing = g.forcing_base / om2;
    return g;
}

/// Small-amplitude natural frequency f0 [Hz] of the gas-elastic oscillator.
inline double natural_frequency(const FluidProperties& fluid, const BubbleConfig& bubble)
{
    fluid.validate();
    bubble.validate(fluid);
    const double stiffness = 3.0 * bubble.polytropic_exponent *
                             (bubble.static_pressure - fluid.vapor_pressure) / fluid.density;
    return std::sqrt(stiffness) / (2.0 * std::numbers::pi * bubble.equilibrium_radius);
}

/// Transient e-folding time tau0 ~ 2 Omega / (K M_b) in units of 1/omega_p.
inline double relaxation_time(const DimensionlessSet& g)
{
    const double km = g.stiffness * g.elasticity_base;
    detail::require(km > 0.0, "relaxation_time needs K*M_b > 0");
    return 2.0 * g.size_parameter / km;
}

}  // namespace bubblesynth
