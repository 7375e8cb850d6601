#pragma once

// Run configuration: INI-style sections of key=value pairs, command-line overrides of the
// form section.key=value, validation against each module's preconditions, and a canonical
// text form whose hash identifies a run.

#include "bubblesynth/bubble_solver.hpp"
#include "bubblesynth/errors.hpp"
#include "bubblesynth/physics_params.hpp"
#include "bubblesynth/reservoir.hpp"
#include "bubblesynth/score_codec.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace bubblesynth {

struct EncodingConfig {
    double duty = 0.5;
    double articulation = 0.1;
    int polarity = 1;
    double dt = 1.0e-5;  // seconds
};

struct SolverConfig {
    double dtau = 0.0;  // 0: one hundredth of the natural period
    double h = 100.0;
    ForcingDerivative derivative = ForcingDerivative::dropped;
    double collapse_radius = 1.0e-3;
};

struct StepConfig {
    double pulse_relaxation_times = 4.0;  // pulse length and post-pulse window, units of tau0
};

struct ReservoirConfig {
    int n_v = 20;
    double c_tau = 1.0;
    double beta = 1.0e-8;
    int k_max = 15;
    std::uint64_t seed = 1;
    int n_bits = 2000;
    double alpha = 1.0e4;  // Pa, drive amplitude for the bit stream
};

struct AudioConfig {
    double rate = 44100.0;
    double peak = 0.9;
};

struct RunConfig {
    FluidProperties fluid;
    BubbleConfig bubble;
    DriveConfig drive;
    EncodingConfig encoding;
    SolverConfig solver;
    StepConfig step;
    ReservoirConfig reservoir;
    AudioConfig audio;

    DimensionlessSet groups() const { return dimensionless_groups(fluid, bubble, drive); }

    DimensionlessSet groups_at(double alpha) const
    {
        DriveConfig d = drive;
        d.pressure_amplitude = alpha;
        return dimensionless_groups(fluid, bubble, d);
    }

    double dtau(const DimensionlessSet& g) const
    {
        return solver.dtau > 0.0 ? solver.dtau : default_dtau(g);
    }

    SolverOptions solver_options(const DimensionlessSet& g, double tau_end) const
    {
        SolverOptions o;
        o.dtau = dtau(g);
        o.tau_end = tau_end;
        o.far_field_distance = solver.h;
        o.derivative = solver.derivative;
        o.collapse_radius = solver.collapse_radius;
        return o;
    }

    PulseTrainOptions pulse_options() const
    {
        return {encoding.dt, encoding.polarity < 0 ? Polarity::negative : Polarity::positive,
                encoding.duty, encoding.articulation};
    }

    BubbleReservoirOptions reservoir_options() const
    {
        BubbleReservoirOptions o;
        o.virtual_neurons = reservoir.n_v;
        o.slot_relaxation_times = reservoir.c_tau;
        o.far_field_distance = solver.h;
        o.derivative = solver.derivative;
        o.max_dtau = solver.dtau;
        return o;
    }

    /// Throws DomainError naming the first offending value.
    void validate() const
    {
        const auto g = groups();
        detail::require(encoding.duty > 0.0 && encoding.duty < 1.0, "encoding.duty must lie in (0, 1)");
        detail::require(encoding.articulation >= 0.0 && encoding.articulation < 1.0,
                        "encoding.articulation must lie in [0, 1)");
        detail::require(encoding.polarity == 1 || encoding.polarity == -1,
                        "encoding.polarity must be +1 or -1");
        detail::require(encoding.dt > 0.0, "encoding.dt must be positive");
        detail::require(solver.dtau >= 0.0, "solver.dtau must be non-negative");
        detail::require(solver.h > 0.0, "solver.h must be positive");
        detail::require(solver.collapse_radius > 0.0 && solver.collapse_radius < 1.0,
                        "solver.collapse_radius must lie in (0, 1)");
        detail::require(step.pulse_relaxation_times > 0.0, "step.pulse_relaxation_times must be positive");
        detail::require(reservoir.n_v >= 1, "reservoir.n_v must be >= 1");
        detail::require(reservoir.c_tau > 0.0, "reservoir.c_tau must be positive");
        detail::require(reservoir.beta >= 0.0, "reservoir.beta must be non-negative");
        detail::require(reservoir.k_max >= 1, "reservoir.k_max must be >= 1");
        detail::require(reservoir.n_bits >= 1, "reservoir.n_bits must be >= 1");
        detail::require(reservoir.n_bits / 2 - (reservoir.k_max + 2) >= 2,
                        "reservoir.k_max too large for reservoir.n_bits");
        detail::require(std::abs(reservoir.alpha) < bubble.static_pressure,
                        "reservoir.alpha must lie inside (-p0, p0)");
        detail::require(audio.rate > 0.0, "audio.rate must be positive");
        detail::require(audio.peak > 0.0 && audio.peak <= 1.0, "audio.peak must lie in (0, 1]");
        if (solver.dtau > 0.0)
            detail::require(solver.dtau <= 2.0 * std::numbers::pi * g.size_parameter /
                                               (40.0 * std::sqrt(g.stiffness * g.elasticity_base)),
                            "solver.dtau resolves fewer than 40 steps per natural period");
    }
};

namespace detail {

struct ConfigField {
    const char* section;
    const char* key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline double to_double(const std::string& s, const std::string& name)
{
    auto v = parse_number(trim(s));
    if (!v)
        throw ParseError("value for " + name + " is not a number: '" + s + "'", 0);
    return *v;
}

inline std::string format_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

template <typename T>
ConfigField number_field(const char* section, const char* key, T RunConfig::*group,
                         double T::*member)
{
    return {section, key,
            [=](RunConfig& c, const std::string& s) {
                (c.*group).*member = to_double(s, std::string(section) + "." + key);
            },
            [=](const RunConfig& c) { return format_double((c.*group).*member); }};
}

template <typename T, typename I>
ConfigField integer_field(const char* section, const char* key, T RunConfig::*group, I T::*member)
{
    return {section, key,
            [=](RunConfig& c, const std::string& s) {
                const std::string name = std::string(section) + "." + key;
                const double v = to_double(s, name);
                if (v != std::floor(v))
                    throw ParseError("value for " + name + " must be an integer", 0);
                (c.*group).*member = static_cast<I>(v);
            },
            [=](const RunConfig& c) { return std::to_string((c.*group).*member); }};
}

inline const std::vector<ConfigField>& config_fields()
{
    static const std::vector<ConfigField> fields = {
        number_field("physics", "c", &RunConfig::fluid, &FluidProperties::sound_speed),
        number_field("physics", "mu", &RunConfig::fluid, &FluidProperties::dynamic_viscosity),
        number_field("physics", "sigma", &RunConfig::fluid, &FluidProperties::surface_tension),
        number_field("physics", "rho", &RunConfig::fluid, &FluidProperties::density),
        number_field("physics", "p_v", &RunConfig::fluid, &FluidProperties::vapor_pressure),
        number_field("physics", "r0", &RunConfig::bubble, &BubbleConfig::equilibrium_radius),
        number_field("physics", "p0", &RunConfig::bubble, &BubbleConfig::static_pressure),
        number_field("physics", "kappa", &RunConfig::bubble, &BubbleConfig::polytropic_exponent),
        number_field("physics", "alpha", &RunConfig::drive, &DriveConfig::pressure_amplitude),
        number_field("physics", "f_p", &RunConfig::drive, &DriveConfig::reference_frequency),
        number_field("encoding", "duty", &RunConfig::encoding, &EncodingConfig::duty),
        number_field("encoding", "articulation", &RunConfig::encoding, &EncodingConfig::articulation),
        integer_field("encoding", "polarity", &RunConfig::encoding, &EncodingConfig::polarity),
        number_field("encoding", "dt", &RunConfig::encoding, &EncodingConfig::dt),
        number_field("solver", "dtau", &RunConfig::solver, &SolverConfig::dtau),
        number_field("solver", "h", &RunConfig::solver, &SolverConfig::h),
        {"solver", "derivative",
         [](RunConfig& c, const std::string& s) {
             const std::string v = trim(s);
             if (v == "dropped")
                 c.solver.derivative = ForcingDerivative::dropped;
             else if (v == "first_difference")
                 c.solver.derivative = ForcingDerivative::first_difference;
             else
                 throw ParseError("solver.derivative must be 'dropped' or 'first_difference'", 0);
         },
         [](const RunConfig& c) {
             return std::string(c.solver.derivative == ForcingDerivative::dropped
                                    ? "dropped"
                                    : "first_difference");
         }},
        number_field("solver", "collapse_radius", &RunConfig::solver, &SolverConfig::collapse_radius),
        number_field("step", "pulse_relaxation_times", &RunConfig::step,
                     &StepConfig::pulse_relaxation_times),
        integer_field("reservoir", "n_v", &RunConfig::reservoir, &ReservoirConfig::n_v),
        number_field("reservoir", "c_tau", &RunConfig::reservoir, &ReservoirConfig::c_tau),
        number_field("reservoir", "beta", &RunConfig::reservoir, &ReservoirConfig::beta),
        integer_field("reservoir", "k_max", &RunConfig::reservoir, &ReservoirConfig::k_max),
        integer_field("reservoir", "seed", &RunConfig::reservoir, &ReservoirConfig::seed),
        integer_field("reservoir", "n_bits", &RunConfig::reservoir, &ReservoirConfig::n_bits),
        number_field("reservoir", "alpha", &RunConfig::reservoir, &ReservoirConfig::alpha),
        number_field("audio", "rate", &RunConfig::audio, &AudioConfig::rate),
        number_field("audio", "peak", &RunConfig::audio, &AudioConfig::peak),
    };
    return fields;
}

inline const ConfigField* find_field(const std::string& section, const std::string& key)
{
    for (const auto& f : config_fields())
        if (section == f.section && key == f.key)
            return &f;
    return nullptr;
}

}  // namespace detail

/// Applies one "section.key=value" override.
inline void apply_override(RunConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ParseError("override '" + assignment + "' is not section.key=value", 0);
    const std::string section = detail::trim(assignment.substr(0, dot));
    const std::string key = detail::trim(assignment.substr(dot + 1, eq - dot - 1));
    const auto* field = detail::find_field(section, key);
    if (!field)
        throw ParseError("unknown configuration key " + section + "." + key, 0);
    field->set(cfg, assignment.substr(eq + 1));
}

inline RunConfig parse_config(const std::string& text)
{
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError(e.message(), static_cast<int>(e.line()));
    }
    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty())
            throw ParseError("key '" + section + "' outside any [section]", 0);
        for (const auto& [key, value] : body) {
            const auto* field = detail::find_field(section, key);
            if (!field)
                throw ParseError("unknown configuration key " + section + "." + key, 0);
            field->set(cfg, value.data());
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

/// Every key in a fixed order; parse_config(to_text(c)) reproduces c.
inline std::string to_text(const RunConfig& cfg)
{
    std::ostringstream os;
    std::string current;
    for (const auto& f : detail::config_fields()) {
        if (current != f.section) {
            if (!current.empty())
                os << '\n';
            current = f.section;
            os << '[' << current << "]\n";
        }
        os << f.key << '=' << f.get(cfg) << '\n';
    }
    return os.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash(const RunConfig& cfg)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(to_text(cfg));
    return os.str();
}

}  // namespace bubblesynth
