#pragma once

// Resampling, peak normalisation and 16-bit mono PCM WAV files.

#include "bubblesynth/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <span>
#include <string>
#include <vector>

namespace bubblesynth {

struct AudioBuffer {
    std::vector<double> samples;
    double sample_rate = 44100.0;

    double duration_seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Boxcar averaging when decimating by 2:1 or more, linear interpolation otherwise.
inline AudioBuffer resample(std::span<const double> signal, double dt_in, double rate_out)
{
    detail::require(!signal.empty(), "cannot resample an empty signal");
    detail::require_positive(dt_in, "dt_in");
    detail::require_positive(rate_out, "rate_out");

    const double rate_in = 1.0 / dt_in;
    AudioBuffer out;
    out.sample_rate = rate_out;
    if (std::abs(rate_in - rate_out) <= 1e-9 * rate_out) {
        out.samples.assign(signal.begin(), signal.end());
        return out;
    }

    const double ratio = rate_in / rate_out;
    const std::size_t n_in = signal.size();
    const auto n_out = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(static_cast<double>(n_in) / ratio)));
    out.samples.resize(n_out);

    if (ratio >= 2.0) {
        for (std::size_t m = 0; m < n_out; ++m) {
            auto lo = static_cast<std::size_t>(std::floor(static_cast<double>(m) * ratio));
            auto hi = static_cast<std::size_t>(std::floor(static_cast<double>(m + 1) * ratio));
            lo = std::min(lo, n_in - 1);
            hi = std::clamp(hi, lo + 1, n_in);
            double sum = 0.0;
            for (std::size_t i = lo; i < hi; ++i)
                sum += signal[i];
            out.samples[m] = sum / static_cast<double>(hi - lo);
        }
    } else {
        for (std::size_t m = 0; m < n_out; ++m) {
            const double t = static_cast<double>(m) * ratio;
            const auto i = static_cast<std::size_t>(t);
            if (i + 1 >= n_in) {
                out.samples[m] = signal[n_in - 1];
                continue;
            }
            const double w = t - static_cast<double>(i);
            out.samples[m] = (1.0 - w) * signal[i] + w * signal[i + 1];
        }
    }
    return out;
}

/// Scales the buffer so that max |sample| equals `peak`.
inline AudioBuffer normalize(const AudioBuffer& buffer, double peak = 0.9)
{
    detail::require(peak > 0.0 && peak <= 1.0, "peak must lie in (0, 1]");
    double top = 0.0;
    for (double s : buffer.samples)
        top = std::max(top, std::abs(s));
    detail::require(top > 0.0, "cannot normalise an all-zero buffer");
    AudioBuffer out = buffer;
    const double gain = peak / top;
    for (double& s : out.samples)
        s *= gain;
    return out;
}

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v)
{
    b.push_back(static_cast<std::uint8_t>(v & 0xff));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_tag(std::vector<std::uint8_t>& b, const char (&tag)[5])
{
    b.insert(b.end(), tag, tag + 4);
}

inline std::uint32_t get_u32(const std::uint8_t* p)
{
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t get_u16(const std::uint8_t* p)
{
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

inline std::int16_t quantize_pcm16(double sample)
{
    const double scaled = std::round(sample * 32767.0);
    return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

/// Canonical 44-byte RIFF/WAVE header followed by 16-bit little-endian mono PCM.
inline std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer)
{
    detail::require_positive(buffer.sample_rate, "sample_rate");
    const auto rate = static_cast<std::uint32_t>(std::llround(buffer.sample_rate));
    const auto data_bytes = static_cast<std::uint32_t>(buffer.samples.size() * 2);

    std::vector<std::uint8_t> b;
    b.reserve(44 + data_bytes);
    detail::put_tag(b, "RIFF");
    detail::put_u32(b, 36 + data_bytes);
    detail::put_tag(b, "WAVE");
    detail::put_tag(b, "fmt ");
    detail::put_u32(b, 16);
    detail::put_u16(b, 1);  // PCM
    detail::put_u16(b, 1);  // mono
    detail::put_u32(b, rate);
    detail::put_u32(b, rate * 2);  // byte rate
    detail::put_u16(b, 2);         // block align
    detail::put_u16(b, 16);        // bits per sample
    detail::put_tag(b, "data");
    detail::put_u32(b, data_bytes);
    for (double s : buffer.samples)
        detail::put_u16(b, static_cast<std::uint16_t>(quantize_pcm16(s)));
    return b;
}

inline void write_wav(const AudioBuffer& buffer, const std::string& path)
{
    const auto bytes = encode_wav(buffer);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed for " + path);
}

/// Reads 16-bit mono PCM WAV files; samples are scaled by 1/32767.
inline AudioBuffer read_wav(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    const std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(in)),
                                      std::istreambuf_iterator<char>());
    if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
        std::memcmp(b.data() + 8, "WAVE", 4) != 0)
        throw IoError(path + " is not a RIFF/WAVE file");

    AudioBuffer out;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= b.size()) {
        const std::uint32_t size = detail::get_u32(b.data() + pos + 4);
        const std::uint8_t* body = b.data() + pos + 8;
        if (pos + 8 + size > b.size())
            throw IoError(path + ": truncated chunk");
        if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
            if (size < 16 || detail::get_u16(body) != 1 || detail::get_u16(body + 2) != 1 ||
                detail::get_u16(body + 14) != 16)
                throw IoError(path + ": only 16-bit mono PCM is supported");
            out.sample_rate = detail::get_u32(body + 4);
            have_fmt = true;
        } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
            if (!have_fmt)
                throw IoError(path + ": data chunk before fmt chunk");
            out.samples.resize(size / 2);
            for (std::size_t i = 0; i < out.samples.size(); ++i)
                out.samples[i] = static_cast<std::int16_t>(detail::get_u16(body + 2 * i)) / 32767.0;
            return out;
        }
        pos += 8 + size + (size & 1u);
    }
    throw IoError(path + ": no data chunk");
}

inline void write_audio_csv(const AudioBuffer& buffer, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    out << "t_seconds,sample\n" << std::setprecision(10);
    for (std::size_t i = 0; i < buffer.samples.size(); ++i)
        out << static_cast<double>(i) / buffer.sample_rate << ',' << buffer.samples[i] << '\n';
    if (!out)
        throw IoError("write failed for " + path);
}

}  // namespace bubblesynth
