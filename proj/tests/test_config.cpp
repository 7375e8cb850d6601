#include "bubblesynth/config.hpp"
#include "bubblesynth/pipelines.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bubblesynth;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("bubblesynth_cfg_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(Config, DefaultsMatchModules)
{
    const RunConfig c;
    EXPECT_EQ(c.fluid.sound_speed, 1484.0);
    EXPECT_EQ(c.reservoir.n_v, 20);
    EXPECT_EQ(c.reservoir.alpha, 1.0e4);
    EXPECT_EQ(c.audio.rate, 44100.0);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParseSectionsAndOverrides)
{
    auto c = parse_config("[physics]\nr0 = 2e-3\nkappa=1.4\n\n[solver]\nderivative=first_difference\n"
                          "[reservoir]\nseed=7\n");
    EXPECT_EQ(c.bubble.equilibrium_radius, 2e-3);
    EXPECT_EQ(c.bubble.polytropic_exponent, 1.4);
    EXPECT_EQ(c.solver.derivative, ForcingDerivative::first_difference);
    EXPECT_EQ(c.reservoir.seed, 7u);
    apply_override(c, "audio.rate=48000");
    apply_override(c, "encoding.polarity=-1");
    EXPECT_EQ(c.audio.rate, 48000.0);
    EXPECT_EQ(c.pulse_options().polarity, Polarity::negative);
}

TEST(Config, RejectsUnknownAndMalformed)
{
    EXPECT_THROW(parse_config("[physics]\nradius=1\n"), ParseError);
    EXPECT_THROW(parse_config("[nope]\nx=1\n"), ParseError);
    EXPECT_THROW(parse_config("[physics]\nr0=abc\n"), ParseError);
    EXPECT_THROW(parse_config("[reservoir]\nn_v=2.5\n"), ParseError);
    EXPECT_THROW(parse_config("[solver]\nderivative=maybe\n"), ParseError);
    RunConfig c;
    EXPECT_THROW(apply_override(c, "physics.r0"), ParseError);
    EXPECT_THROW(apply_override(c, "r0=1"), ParseError);
    EXPECT_THROW(apply_override(c, "physics.nothing=1"), ParseError);
}

TEST(Config, ValidationNamesTheField)
{
    RunConfig c;
    c.encoding.duty = 1.5;
    EXPECT_THROW(c.validate(), DomainError);
    c = RunConfig{};
    c.reservoir.n_bits = 10;
    try {
        c.validate();
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("k_max"), std::string::npos);
    }
    c = RunConfig{};
    c.fluid.density = -1.0;
    EXPECT_THROW(c.validate(), DomainError);
    c = RunConfig{};
    c.solver.dtau = 0.5;
    EXPECT_THROW(c.validate(), DomainError);
}

TEST(Config, CanonicalTextRoundTripsAndHashes)
{
    RunConfig c;
    apply_override(c, "physics.alpha=12345.678");
    apply_override(c, "solver.derivative=first_difference");
    const auto text = to_text(c);
    const auto back = parse_config(text);
    EXPECT_EQ(to_text(back), text);
    EXPECT_EQ(config_hash(back), config_hash(c));
    EXPECT_NE(config_hash(c), config_hash(RunConfig{}));
    EXPECT_EQ(config_hash(c).size(), 16u);
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Pipelines, StepDirectionsAndSilence)
{
    const RunConfig c;
    const auto rep = cmd_step(c, {2.0e4, -2.0e4, 0.0});
    ASSERT_EQ(rep.records.size(), 3u);
    const auto& up = rep.records[0];
    const auto& down = rep.records[1];
    EXPECT_GT(up.in_pulse_hz, up.post_pulse_hz);
    EXPECT_LT(down.in_pulse_hz, down.post_pulse_hz);
    EXPECT_LT(up.in_pulse_relaxation_s, rep.unforced_relaxation_s);
    EXPECT_GT(down.in_pulse_relaxation_s, rep.unforced_relaxation_s);
    EXPECT_FALSE(rep.records[2].oscillating);
    EXPECT_EQ(rep.records[2].note, "no oscillation");
    EXPECT_THROW(cmd_step(c, {2.0e5}), DomainError);
}

TEST(Pipelines, CollapseIsReportedPerAmplitude)
{
    RunConfig c;
    c.solver.collapse_radius = 0.97;
    const auto rep = cmd_step(c, {2.0e4, 100.0}, scratch("collapse"));
    EXPECT_TRUE(rep.records[0].collapsed);
    EXPECT_NE(rep.records[0].note.find("collapse"), std::string::npos);
    EXPECT_TRUE(rep.records[1].oscillating);
    EXPECT_TRUE(fs::exists(scratch("collapse").parent_path()));
}

TEST(Pipelines, MemoryIsSeededAndChecksKmax)
{
    RunConfig c;
    c.reservoir.n_bits = 200;
    c.reservoir.k_max = 5;
    const auto a = cmd_memory(c);
    const auto b = cmd_memory(c);
    EXPECT_EQ(a.stm.r2, b.stm.r2);
    EXPECT_EQ(a.pc.r2, b.pc.r2);
    c.reservoir.n_bits = 10;
    c.reservoir.k_max = 15;
    EXPECT_THROW(cmd_memory(c), DomainError);
}

TEST(Pipelines, MemoryWritesCsvAndManifest)
{
    RunConfig c;
    c.reservoir.n_bits = 100;
    c.reservoir.k_max = 4;
    const auto dir = scratch("memory");
    const auto r = cmd_memory(c, dir);
    const auto csv = slurp(dir / "capacity.csv");
    EXPECT_EQ(csv.rfind("k,r2_stm,r2_pc\n", 0), 0u);
    EXPECT_NE(csv.find("# C_STM="), std::string::npos);
    const auto manifest = slurp(dir / "manifest.txt");
    EXPECT_NE(manifest.find("config_hash: " + config_hash(c)), std::string::npos);
    EXPECT_NE(manifest.find("output: capacity.csv"), std::string::npos);
    EXPECT_NE(manifest.find(to_text(c)), std::string::npos);
    EXPECT_EQ(r.stm.r2.size(), 5u);
}

TEST(Pipelines, RenderIsDeterministic)
{
    const auto score = parse_score("tempo=240\nA4 1/2\nR 1/4\nC#5 1/2\n");
    const RunConfig c;
    const auto d1 = scratch("render1"), d2 = scratch("render2");
    const auto s = cmd_render(score, c, d1);
    cmd_render(score, c, d2);
    for (const auto& f : s.outputs)
        EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
    const auto wav = read_wav((d1 / "response.wav").string());
    EXPECT_EQ(wav.sample_rate, 44100.0);
    EXPECT_NEAR(wav.duration_seconds(), 0.3125, 1.0 / 44100.0);
    EXPECT_GT(s.gap_energy_response, 0.0);
    EXPECT_EQ(s.gap_energy_input, 0.0);
}

TEST(Pipelines, SpectrumOfCsv)
{
    const auto dir = scratch("spectrum");
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "sig.csv");
        out << "t,v\n";
        for (int i = 0; i < 8000; ++i)
            out << i * 1e-4 << ',' << std::sin(2 * std::numbers::pi * 250.0 * i * 1e-4) << '\n';
    }
    const auto s = cmd_spectrum((dir / "sig.csv").string(), RunConfig{}, dir / "out");
    EXPECT_NEAR(s.dominant_hz, 250.0, s.spectrum.bin_width());
    EXPECT_TRUE(fs::exists(dir / "out" / "spectrum.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "manifest.txt"));
}
