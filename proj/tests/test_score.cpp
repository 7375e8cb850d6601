#include "bubblesynth/score_codec.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace bubblesynth;

TEST(KeyFrequency, Anchors)
{
    EXPECT_DOUBLE_EQ(key_frequency(49), 440.0);
    EXPECT_NEAR(key_frequency(61), 880.0, 1e-9);
    EXPECT_NEAR(key_frequency(40), 261.6255653005986, 1e-9);
}

TEST(KeyFrequency, OctaveDoublingForAllKeys)
{
    for (int n = kLowestKey; n + 12 <= kHighestKey; ++n)
        EXPECT_NEAR(key_frequency(n + 12), 2.0 * key_frequency(n), 1e-9 * key_frequency(n));
}

TEST(KeyFrequency, OutOfRange)
{
    EXPECT_THROW(key_frequency(0), DomainError);
    EXPECT_THROW(key_frequency(89), DomainError);
}

TEST(NoteNames, Mapping)
{
    EXPECT_EQ(note_name_to_key("A4"), 49);
    EXPECT_EQ(note_name_to_key("C4"), 40);
    EXPECT_EQ(note_name_to_key("A0"), 1);
    EXPECT_EQ(note_name_to_key("C8"), 88);
    EXPECT_EQ(note_name_to_key("F#4"), note_name_to_key("Gb4"));
    EXPECT_EQ(note_name_to_key("B3"), 39);
    EXPECT_FALSE(note_name_to_key("H4"));
    EXPECT_FALSE(note_name_to_key("C9"));
}

TEST(ParseScore, SingleEvent)
{
    const auto s = parse_score("tempo=120 beats_per_bar=4\nA4 1\n");
    EXPECT_EQ(s.tempo_bpm, 120.0);
    EXPECT_EQ(s.beats_per_bar, 4);
    ASSERT_EQ(s.events.size(), 1u);
    EXPECT_EQ(s.events[0], (NoteEvent{49, 1.0}));
    EXPECT_DOUBLE_EQ(s.events[0].duration_beats * s.seconds_per_beat(), 0.5);
    EXPECT_DOUBLE_EQ(s.bar_seconds(), 2.0);
}

TEST(ParseScore, RestsRationalsSharpsAndComments)
{
    const auto s = parse_score("# opening\ntempo=90\nR 2\nC#4 1/2  # sharp, not a comment\n40 3/4\n");
    ASSERT_EQ(s.events.size(), 3u);
    EXPECT_TRUE(s.events[0].is_rest());
    EXPECT_EQ(s.events[0].duration_beats, 2.0);
    EXPECT_EQ(s.events[1].key, 41);
    EXPECT_EQ(s.events[1].duration_beats, 0.5);
    EXPECT_EQ(s.events[2].key, 40);
    EXPECT_EQ(s.events[2].duration_beats, 0.75);
}

TEST(ParseScore, ErrorsCarryLineNumbers)
{
    try {
        parse_score("tempo=120\nA4 1\nQ4 1\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
    try {
        parse_score("tempo=120\nA4 zero\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2);
    }
    EXPECT_THROW(parse_score(""), ParseError);
    EXPECT_THROW(parse_score("# nothing\n"), ParseError);
    EXPECT_THROW(parse_score("tempo=120\n"), ParseError);
    EXPECT_THROW(parse_score("tempo=0\nA4 1\n"), ParseError);
    EXPECT_THROW(parse_score("speed=3\nA4 1\n"), ParseError);
    EXPECT_THROW(parse_score("tempo=120\n89 1\n"), ParseError);
}

TEST(PulseTrain, SingleNoteSquareWave)
{
    Score s{120.0, 4, {NoteEvent{49, 1.0}}};
    PulseTrainOptions o;
    o.dt_seconds = 1e-6;
    o.articulation = 0.0;
    const auto sig = render_pulse_train(s, o);
    ASSERT_EQ(sig.size(), 500000u);

    std::size_t rising = 0, high = 0;
    for (std::size_t i = 0; i < sig.size(); ++i) {
        EXPECT_TRUE(sig.samples[i] == 0.0 || sig.samples[i] == 1.0);
        high += sig.samples[i] == 1.0;
        if (sig.samples[i] == 1.0 && (i == 0 || sig.samples[i - 1] == 0.0))
            ++rising;
    }
    EXPECT_EQ(rising, 220u);
    EXPECT_NEAR(static_cast<double>(high) / sig.size(), 0.5, 1e-3);
}

TEST(PulseTrain, RestsArticulationAndPolarity)
{
    Score s{120.0, 4, {NoteEvent{49, 1.0}, NoteEvent{std::nullopt, 1.0}}};
    PulseTrainOptions o;
    o.polarity = Polarity::negative;
    const auto sig = render_pulse_train(s, o);
    ASSERT_EQ(sig.size(), 100000u);
    for (std::size_t i = 0; i < sig.size(); ++i)
        EXPECT_TRUE(sig.samples[i] == 0.0 || sig.samples[i] == -1.0);
    // articulation gap 0.45..0.5 s and the rest are silent
    EXPECT_TRUE(std::all_of(sig.samples.begin() + 45001, sig.samples.end(),
                            [](double v) { return v == 0.0; }));
    EXPECT_TRUE(std::any_of(sig.samples.begin() + 44000, sig.samples.begin() + 45000,
                            [](double v) { return v != 0.0; }));
}

TEST(PulseTrain, LengthMatchesScore)
{
    const auto s = parse_score("tempo=133\nA4 1/3\nR 2/3\nC5 5/7\nE3 1\n");
    PulseTrainOptions o;
    const auto sig = render_pulse_train(s, o);
    EXPECT_NEAR(static_cast<double>(sig.size()), s.duration_seconds() / o.dt_seconds, 1.0);
}

TEST(PulseTrain, CoarseStepNamesTheKey)
{
    Score s{120.0, 4, {NoteEvent{88, 1.0}}};
    PulseTrainOptions o;
    o.dt_seconds = 1e-3;
    try {
        render_pulse_train(s, o);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("88"), std::string::npos);
    }
}

TEST(EncodeBinary, Patterns)
{
    const auto a = encode_binary(bits_from_string("10101", 1e-3), 1e-4);
    ASSERT_EQ(a.size(), 50u);
    for (std::size_t slot = 0; slot < 5; ++slot)
        for (std::size_t i = 0; i < 10; ++i)
            EXPECT_EQ(a.samples[slot * 10 + i], slot % 2 == 0 ? 1.0 : 0.0);

    const auto b = encode_binary(bits_from_string("111001111", 1.0), 1.0);
    EXPECT_EQ(b.samples, (std::vector<double>{1, 1, 1, 0, 0, 1, 1, 1, 1}));

    const auto c = encode_binary(bits_from_string("0", 1.0), 0.25);
    EXPECT_EQ(c.samples, (std::vector<double>(4, 0.0)));
    EXPECT_THROW(encode_binary(bits_from_string("", 1.0), 0.25), DomainError);
}

TEST(EncodeBinary, InjectiveOverAllFiveBitStrings)
{
    std::vector<std::vector<double>> seen;
    for (int code = 0; code < 32; ++code) {
        std::string s;
        for (int b = 4; b >= 0; --b)
            s.push_back((code >> b) & 1 ? '1' : '0');
        const auto sig = encode_binary(bits_from_string(s, 1.0), 0.5);
        for (const auto& other : seen)
            EXPECT_NE(sig.samples, other);
        seen.push_back(sig.samples);
    }
}
