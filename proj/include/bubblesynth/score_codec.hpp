#pragma once

// Text scores, piano-key frequencies and square-pulse encodings of melodies and bit streams.
//
// Score format (UTF-8, one item per line, '#' starts a comment):
//
//     tempo=120 beats_per_bar=4
//     B3   1/2
//     C#4  1/2
//     R    1
//     49   2        # key numbers are accepted too
//
// The header holds key=value pairs; every following line is an event: a note name
// (letter, optional '#' or 'b', octave), a piano key number 1..88 or "R" for a rest,
// followed by the duration in beats as a decimal or a fraction.

#include "bubblesynth/errors.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace bubblesynth {

inline constexpr int kLowestKey = 1;
inline constexpr int kHighestKey = 88;
inline constexpr int kConcertPitchKey = 49;  // A4

struct NoteEvent {
    std::optional<int> key;  // nullopt for a rest
    double duration_beats = 1.0;

    bool is_rest() const { return !key.has_value(); }
    bool operator==(const NoteEvent&) const = default;
};

struct Score {
    double tempo_bpm = 120.0;
    int beats_per_bar = 4;
    std::vector<NoteEvent> events;

    double seconds_per_beat() const { return 60.0 / tempo_bpm; }
    double bar_seconds() const { return beats_per_bar * seconds_per_beat(); }
    double duration_seconds() const
    {
        double beats = 0.0;
        for (const auto& e : events)
            beats += e.duration_beats;
        return beats * seconds_per_beat();
    }
};

/// Sampled dimensionless forcing P_a(t), |P_a| <= 1. The physical pressure is amplitude_scale * P_a.
struct PressureSignal {
    std::vector<double> samples;
    double dt_seconds = 1.0;
    double amplitude_scale = 0.0;  // alpha [Pa]

    std::size_t size() const { return samples.size(); }
    double duration_seconds() const { return static_cast<double>(samples.size()) * dt_seconds; }
};

struct BinarySequence {
    std::vector<int> bits;
    double symbol_seconds = 1.0;
};

enum class Polarity { positive = 1, negative = -1 };

/// Equal-tempered piano key frequency, key 49 = A4 = 440 Hz.
inline double key_frequency(int key)
{
    if (key < kLowestKey || key > kHighestKey)
        throw DomainError("piano key " + std::to_string(key) + " outside 1..88");
    return std::pow(2.0, (key - kConcertPitchKey) / 12.0) * 440.0;
}

/// "A4" -> 49, "C#4" -> 41, "Bb3" -> 38. Returns nullopt for anything that is not a note name.
inline std::optional<int> note_name_to_key(std::string_view name)
{
    if (name.size() < 2)
        return std::nullopt;
    static constexpr int semitone_from_c[] = {9, 11, 0, 2, 4, 5, 7};  // A B C D E F G
    const char letter = name[0];
    if (letter < 'A' || letter > 'G')
        return std::nullopt;
    int semitone = semitone_from_c[letter - 'A'];
    std::size_t pos = 1;
    if (name[pos] == '#') {
        ++semitone;
        ++pos;
    } else if (name[pos] == 'b') {
        --semitone;
        ++pos;
    }
    int octave = 0;
    const auto* first = name.data() + pos;
    const auto* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, octave);
    if (ec != std::errc{} || ptr != last || first == last)
        return std::nullopt;
    const int key = 12 * octave + semitone - 8;
    if (key < kLowestKey || key > kHighestKey)
        return std::nullopt;
    return key;
}

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> parse_number(std::string_view s)
{
    double value = 0.0;
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), last, value);
    if (ec != std::errc{} || ptr != last || s.empty())
        return std::nullopt;
    return value;
}

/// "3", "0.5" or "1/2".
inline std::optional<double> parse_rational(std::string_view s)
{
    const auto slash = s.find('/');
    if (slash == std::string_view::npos)
        return parse_number(s);
    auto num = parse_number(s.substr(0, slash));
    auto den = parse_number(s.substr(slash + 1));
    if (!num || !den || *den == 0.0)
        return std::nullopt;
    return *num / *den;
}

}  // namespace detail

namespace detail {

/// '#' opens a comment at the start of a line or after whitespace; elsewhere it is a sharp.
inline std::string strip_comment(const std::string& raw)
{
    for (std::size_t i = 0; i < raw.size(); ++i)
        if (raw[i] == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(raw[i - 1]))))
            return raw.substr(0, i);
    return raw;
}

}  // namespace detail

inline Score parse_score(std::string_view text)
{
    Score score;
    bool have_header = false;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = detail::trim(detail::strip_comment(raw));
        if (line.empty())
            continue;

        if (!have_header) {
            if (line.find('=') == std::string::npos)
                throw ParseError("expected header 'tempo=<bpm> beats_per_bar=<n>'", line_no);
            std::istringstream fields(line);
            std::string field;
            bool have_tempo = false;
            while (fields >> field) {
                const auto eq = field.find('=');
                if (eq == std::string::npos)
                    throw ParseError("header field '" + field + "' is not key=value", line_no);
                const std::string key = field.substr(0, eq);
                const auto value = detail::parse_number(std::string_view(field).substr(eq + 1));
                if (!value)
                    throw ParseError("header value for '" + key + "' is not a number", line_no);
                if (key == "tempo") {
                    if (!(*value > 0.0))
                        throw ParseError("tempo must be positive", line_no);
                    score.tempo_bpm = *value;
                    have_tempo = true;
                } else if (key == "beats_per_bar") {
                    if (*value < 1.0 || *value != std::floor(*value))
                        throw ParseError("beats_per_bar must be a positive integer", line_no);
                    score.beats_per_bar = static_cast<int>(*value);
                } else {
                    throw ParseError("unknown header key '" + key + "'", line_no);
                }
            }
            if (!have_tempo)
                throw ParseError("header lacks tempo", line_no);
            have_header = true;
            continue;
        }

        std::istringstream fields(line);
        std::string pitch, duration, extra;
        if (!(fields >> pitch >> duration) || (fields >> extra))
            throw ParseError("expected '<note> <beats>'", line_no);

        NoteEvent event;
        if (pitch == "R" || pitch == "r") {
            event.key = std::nullopt;
        } else if (auto key = note_name_to_key(pitch)) {
            event.key = *key;
        } else if (auto number = detail::parse_number(pitch);
                   number && *number == std::floor(*number)) {
            if (*number < kLowestKey || *number > kHighestKey)
                throw ParseError("key number " + pitch + " outside 1..88", line_no);
            event.key = static_cast<int>(*number);
        } else {
            throw ParseError("unrecognised note '" + pitch + "'", line_no);
        }

        auto beats = detail::parse_rational(duration);
        if (!beats || !(*beats > 0.0))
            throw ParseError("duration '" + duration + "' is not a positive number of beats",
                             line_no);
        event.duration_beats = *beats;
        score.events.push_back(event);
    }
    if (!have_header)
        throw ParseError("empty score", 0);
    if (score.events.empty())
        throw ParseError("score has no events", line_no);
    return score;
}

inline Score load_score(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open score " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_score(buf.str());
}

struct PulseTrainOptions {
    double dt_seconds = 1.0e-5;
    Polarity polarity = Polarity::positive;
    double duty = 0.5;
    double articulation = 0.1;  // silent fraction at the end of each note
};

/// Each note becomes a unipolar square wave at its key frequency, taking values {polarity, 0}.
inline PressureSignal render_pulse_train(const Score& score, const PulseTrainOptions& opt)
{
    detail::require_positive(opt.dt_seconds, "dt");
    detail::require(opt.duty > 0.0 && opt.duty < 1.0, "duty must lie in (0, 1)");
    detail::require(opt.articulation >= 0.0 && opt.articulation < 1.0,
                    "articulation must lie in [0, 1)");
    detail::require(score.tempo_bpm > 0.0, "tempo must be positive");
    detail::require(!score.events.empty(), "score has no events");

    for (const auto& e : score.events) {
        if (e.is_rest())
            continue;
        const double f = key_frequency(*e.key);
        if (!(opt.dt_seconds < 0.5 / f))
            throw DomainError("dt too coarse for key " + std::to_string(*e.key) + " (" +
                              std::to_string(f) + " Hz)");
    }

    const double level = static_cast<double>(static_cast<int>(opt.polarity));
    PressureSignal out;
    out.dt_seconds = opt.dt_seconds;

    double t_start = 0.0;
    for (const auto& e : score.events) {
        const double span = e.duration_beats * score.seconds_per_beat();
        const double t_end = t_start + span;
        const auto first = static_cast<std::size_t>(std::llround(t_start / opt.dt_seconds));
        const auto last = static_cast<std::size_t>(std::llround(t_end / opt.dt_seconds));
        const double sounding = (1.0 - opt.articulation) * span;
        const double f = e.is_rest() ? 0.0 : key_frequency(*e.key);
        for (std::size_t i = first; i < last; ++i) {
            const double t = static_cast<double>(i - first) * opt.dt_seconds;
            double v = 0.0;
            if (!e.is_rest() && t < sounding) {
                const double phase = t * f - std::floor(t * f);
                v = phase < opt.duty ? level : 0.0;
            }
            out.samples.push_back(v);
        }
        t_start = t_end;
    }
    return out;
}

/// '1' -> one slot of +1, '0' -> one slot of 0.
inline PressureSignal encode_binary(const BinarySequence& seq, double dt_seconds)
{
    detail::require_positive(dt_seconds, "dt");
    detail::require_positive(seq.symbol_seconds, "symbol_seconds");
    detail::require(!seq.bits.empty(), "binary sequence is empty");
    const auto per_slot = std::llround(seq.symbol_seconds / dt_seconds);
    detail::require(per_slot >= 1, "dt longer than one symbol slot");

    PressureSignal out;
    out.dt_seconds = dt_seconds;
    out.samples.reserve(seq.bits.size() * static_cast<std::size_t>(per_slot));
    for (int bit : seq.bits) {
        detail::require(bit == 0 || bit == 1, "bits must be 0 or 1");
        out.samples.insert(out.samples.end(), static_cast<std::size_t>(per_slot),
                           static_cast<double>(bit));
    }
    return out;
}

inline BinarySequence bits_from_string(std::string_view s, double symbol_seconds)
{
    BinarySequence seq;
    seq.symbol_seconds = symbol_seconds;
    for (char ch : s) {
        detail::require(ch == '0' || ch == '1', "bit strings contain only '0' and '1'");
        seq.bits.push_back(ch - '0');
    }
    return seq;
}

inline void write_signal_csv(const PressureSignal& signal, const std::string& path,
                             std::size_t stride = 1)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    out << "t_seconds,p_a\n" << std::setprecision(12);
    stride = stride == 0 ? 1 : stride;
    for (std::size_t i = 0; i < signal.samples.size(); i += stride)
        out << static_cast<double>(i) * signal.dt_seconds << ',' << signal.samples[i] << '\n';
    if (!out)
        throw IoError("write failed for " + path);
}

}  // namespace bubblesynth
