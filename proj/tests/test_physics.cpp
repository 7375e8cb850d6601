#include "bubblesynth/physics_params.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bubblesynth;

namespace {

DimensionlessSet defaults(double alpha = 0.2e5, double fp = 100.0)
{
    DriveConfig d;
    d.pressure_amplitude = alpha;
    d.reference_frequency = fp;
    return dimensionless_groups(FluidProperties{}, BubbleConfig{}, d);
}

}  // namespace

TEST(DimensionlessGroups, BaseValuesAtWaterDefaults)
{
    const auto g = defaults();
    EXPECT_NEAR(g.viscous_base, 1.14e-9, 0.01 * 1.14e-9);
    EXPECT_NEAR(g.surface_tension_base, 2.79e-11, 0.01 * 2.79e-11);
    EXPECT_NEAR(g.elasticity_base, 4.43e-5, 0.01 * 4.43e-5);
}

TEST(DimensionlessGroups, FrozenOracleValues)
{
    // independent evaluation of the closed forms, frozen
    const auto g = defaults();
    EXPECT_NEAR(g.viscous_base, 1.1412270521101246e-09, 1e-22);
    EXPECT_NEAR(g.surface_tension_base, 2.7877008516840977e-11, 1e-24);
    EXPECT_NEAR(g.elasticity_base, 4.4349975661321847e-05, 1e-18);
    EXPECT_NEAR(g.forcing_base, 9.081596326675917e-06, 1e-18);
    EXPECT_NEAR(g.size_parameter, 4.2339523e-4, 1e-10);
}

TEST(DimensionlessGroups, ScaledGroupsFollowFromBases)
{
    const auto g = defaults();
    const double om = g.size_parameter;
    EXPECT_DOUBLE_EQ(g.viscous, g.viscous_base / (om * om));
    EXPECT_DOUBLE_EQ(g.surface_tension, g.surface_tension_base / (om * om * om));
    EXPECT_DOUBLE_EQ(g.elasticity, g.elasticity_base / (om * om));
    EXPECT_DOUBLE_EQ(g.forcing, g.forcing_base / (om * om));
    EXPECT_DOUBLE_EQ(g.stiffness, 4.0);
}

TEST(DimensionlessGroups, InviscidLimit)
{
    FluidProperties f;
    f.dynamic_viscosity = 0.0;
    const auto g = dimensionless_groups(f, BubbleConfig{}, DriveConfig{});
    EXPECT_EQ(g.viscous_base, 0.0);
    EXPECT_EQ(g.viscous, 0.0);
}

TEST(DimensionlessGroups, ElasticityDominates)
{
    const auto g = defaults();
    EXPECT_GT(g.elasticity / g.viscous, 1e3);
    // M/W = M_b Omega / W_b is only ~674 at 1 mm and 100 Hz
    EXPECT_NEAR(g.elasticity / g.surface_tension, 673.586, 1e-3);
    EXPECT_GT(g.elasticity_base / g.surface_tension_base, 1e3);
}

TEST(DimensionlessGroups, ScaleConsistencyInReferenceFrequency)
{
    const auto a = defaults(0.2e5, 100.0);
    const auto b = defaults(0.2e5, 200.0);
    EXPECT_NEAR(b.size_parameter / a.size_parameter, 2.0, 1e-12);
    EXPECT_NEAR(a.elasticity / b.elasticity, 4.0, 1e-12);
}

TEST(DimensionlessGroups, RejectsBadInputs)
{
    FluidProperties f;
    f.sound_speed = 0.0;
    EXPECT_THROW(dimensionless_groups(f, BubbleConfig{}, DriveConfig{}), DomainError);
    BubbleConfig b;
    b.equilibrium_radius = -1.0;
    EXPECT_THROW(dimensionless_groups(FluidProperties{}, b, DriveConfig{}), DomainError);
    DriveConfig d;
    d.reference_frequency = 0.0;
    EXPECT_THROW(dimensionless_groups(FluidProperties{}, BubbleConfig{}, d), DomainError);
    try {
        dimensionless_groups(f, BubbleConfig{}, DriveConfig{});
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("sound_speed"), std::string::npos);
    }
}

TEST(NaturalFrequency, DefaultsAndKappa)
{
    EXPECT_NEAR(natural_frequency(FluidProperties{}, BubbleConfig{}), 3145.79719726926, 1e-6);
    BubbleConfig b;
    b.polytropic_exponent = 1.4;
    EXPECT_NEAR(natural_frequency(FluidProperties{}, b), 3223.48290001118, 1e-6);
}

TEST(NaturalFrequency, InverseInRadius)
{
    BubbleConfig b;
    const double f1 = natural_frequency(FluidProperties{}, b);
    b.equilibrium_radius *= 2.0;
    EXPECT_NEAR(natural_frequency(FluidProperties{}, b), f1 / 2.0, 1e-9);
    for (double r0 : {1e-4, 5e-4, 3e-3}) {
        b.equilibrium_radius = r0;
        EXPECT_NEAR(natural_frequency(FluidProperties{}, b) * r0, f1 * 1e-3, 1e-9);
    }
}

TEST(NaturalFrequency, MatchesNondimensionalForm)
{
    const auto g = defaults();
    const double omega0 = std::sqrt(g.stiffness * g.elasticity_base) / g.size_parameter;
    EXPECT_NEAR(g.to_hertz(omega0), natural_frequency(FluidProperties{}, BubbleConfig{}), 1e-9);
}

TEST(NaturalFrequency, RequiresStaticAboveVapour)
{
    BubbleConfig b;
    b.static_pressure = 2000.0;
    EXPECT_THROW(natural_frequency(FluidProperties{}, b), DomainError);
}

TEST(RelaxationTime, Values)
{
    const auto g = defaults();
    EXPECT_NEAR(relaxation_time(g), 4.773342375271069, 1e-12);
    EXPECT_NEAR(relaxation_time(g), 2.0 * g.size_parameter / (4.0 * g.elasticity_base), 1e-15);
}

TEST(RelaxationTime, ProportionalToSizeParameterAndFrequencyFree)
{
    const auto a = defaults(0.2e5, 100.0);
    const auto b = defaults(0.2e5, 200.0);
    EXPECT_NEAR(relaxation_time(b) / relaxation_time(a), 2.0, 1e-12);
    EXPECT_NEAR(a.to_seconds(relaxation_time(a)), b.to_seconds(relaxation_time(b)), 1e-15);
}
