#pragma once

// Power spectra, dominant frequencies, envelopes, exponential-decay fits,
// correlation and harmonic measures used to characterise bubble responses.

#include "bubblesynth/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <ranges>
#include <span>
#include <string>
#include <vector>

namespace bubblesynth {

enum class Window { rectangular, hann };

enum class FftLength {
    exact,       // transform length = signal length
    next_pow2,   // zero-pad to the next power of two
};

inline const char* to_string(Window w) { return w == Window::hann ? "hann" : "rectangular"; }

/// One-sided power spectrum. power[k] is scaled so that sum(power) equals the energy
/// sum(x_n^2) of the windowed signal.
struct PowerSpectrum {
    std::vector<double> frequencies;
    std::vector<double> power;
    Window window = Window::rectangular;
    std::size_t fft_length = 0;

    double bin_width() const { return frequencies.size() > 1 ? frequencies[1] : 0.0; }
    double nyquist() const { return frequencies.empty() ? 0.0 : frequencies.back(); }
};

struct Envelope {
    std::vector<double> times;
    std::vector<double> magnitudes;
    bool normalized = false;

    /// Piecewise-linear value; clamps outside the knot range.
    double at(double t) const
    {
        if (t <= times.front())
            return magnitudes.front();
        if (t >= times.back())
            return magnitudes.back();
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const auto i = static_cast<std::size_t>(it - times.begin());
        const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
        return magnitudes[i - 1] + w * (magnitudes[i] - magnitudes[i - 1]);
    }
};

inline std::vector<double> window_coefficients(Window w, std::size_t n)
{
    std::vector<double> c(n, 1.0);
    if (w == Window::hann && n > 1) {
        for (std::size_t i = 0; i < n; ++i)
            c[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                         static_cast<double>(n - 1)));
    }
    return c;
}

inline PowerSpectrum power_spectrum(std::span<const double> signal, double dt,
                                    Window window = Window::hann,
                                    FftLength length = FftLength::next_pow2)
{
    detail::require(signal.size() >= 16, "power_spectrum needs at least 16 samples");
    detail::require_positive(dt, "dt");

    const std::size_t n = signal.size();
    std::size_t nfft = n;
    if (length == FftLength::next_pow2)
        nfft = std::bit_ceil(n);

    const auto w = window_coefficients(window, n);
    std::vector<double> buf(nfft, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        buf[i] = signal[i] * w[i];

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, buf);

    const std::size_t half = nfft / 2;
    PowerSpectrum out;
    out.window = window;
    out.fft_length = nfft;
    out.frequencies.resize(half + 1);
    out.power.resize(half + 1);
    const double df = 1.0 / (static_cast<double>(nfft) * dt);
    const double scale = 1.0 / static_cast<double>(nfft);
    for (std::size_t k = 0; k <= half; ++k) {
        out.frequencies[k] = static_cast<double>(k) * df;
        const bool edge = k == 0 || (nfft % 2 == 0 && k == half);
        out.power[k] = (edge ? 1.0 : 2.0) * std::norm(spec[k]) * scale;
    }
    return out;
}

/// Peak frequency in [f_lo, f_hi], refined by a parabola through the log-power of the
/// maximum bin and its two neighbours.
inline double dominant_frequency(const PowerSpectrum& spec, double f_lo, double f_hi)
{
    detail::require(f_hi > f_lo, "empty frequency band");
    std::size_t best = spec.power.size();
    for (std::size_t k = 0; k < spec.power.size(); ++k) {
        const double f = spec.frequencies[k];
        if (f < f_lo || f > f_hi)
            continue;
        if (best == spec.power.size() || spec.power[k] > spec.power[best])
            best = k;
    }
    if (best == spec.power.size())
        throw DomainError("no spectral bins inside the requested band");
    if (best == 0 || best + 1 >= spec.power.size())
        return spec.frequencies[best];

    const double a = spec.power[best - 1];
    const double b = spec.power[best];
    const double c = spec.power[best + 1];
    double offset = 0.0;
    if (a > 0.0 && b > 0.0 && c > 0.0) {
        const double la = std::log(a), lb = std::log(b), lc = std::log(c);
        const double denom = la - 2.0 * lb + lc;
        if (denom < 0.0)
            offset = 0.5 * (la - lc) / denom;
    } else {
        const double denom = a - 2.0 * b + c;
        if (denom < 0.0)
            offset = 0.5 * (a - c) / denom;
    }
    return spec.frequencies[best] + std::clamp(offset, -0.5, 0.5) * spec.bin_width();
}

/// Piecewise-linear envelope through the local maxima of |x|.
inline Envelope envelope(std::span<const double> signal, double dt, bool normalize = false,
                         double t0 = 0.0)
{
    detail::require_positive(dt, "dt");
    Envelope env;
    for (std::size_t i = 1; i + 1 < signal.size(); ++i) {
        const double m = std::abs(signal[i]);
        if (m > std::abs(signal[i - 1]) && m >= std::abs(signal[i + 1])) {
            env.times.push_back(t0 + static_cast<double>(i) * dt);
            env.magnitudes.push_back(m);
        }
    }
    if (env.times.size() < 3)
        throw DomainError("envelope needs at least three local maxima of |signal|");
    if (normalize) {
        const double peak = *std::max_element(env.magnitudes.begin(), env.magnitudes.end());
        for (double& m : env.magnitudes)
            m /= peak;
        env.normalized = true;
    }
    return env;
}

struct FitRange {
    double t_begin = 0.0;
    double t_end = 0.0;
};

/// From the largest envelope knot to the first later knot below 10 % of it.
inline FitRange default_fit_range(const Envelope& env, double fraction = 0.1)
{
    const auto peak_it = std::max_element(env.magnitudes.begin(), env.magnitudes.end());
    const auto peak = static_cast<std::size_t>(peak_it - env.magnitudes.begin());
    FitRange range{env.times[peak], env.times.back()};
    for (std::size_t i = peak; i < env.times.size(); ++i) {
        if (env.magnitudes[i] < fraction * *peak_it) {
            range.t_end = env.times[i];
            break;
        }
    }
    return range;
}

/// Least-squares slope of log(magnitude) against time; returns -1/slope.
inline double fit_relaxation(const Envelope& env, FitRange range)
{
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < env.times.size(); ++i) {
        const double t = env.times[i];
        if (t < range.t_begin || t > range.t_end)
            continue;
        if (!(env.magnitudes[i] > 0.0))
            throw DomainError("envelope is not strictly positive on the fit range");
        const double y = std::log(env.magnitudes[i]);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++n;
    }
    detail::require(n >= 2, "fit range holds fewer than two envelope points");
    const double dn = static_cast<double>(n);
    const double denom = dn * stt - st * st;
    detail::require(denom > 0.0, "degenerate fit range");
    const double slope = (dn * sty - st * sy) / denom;
    detail::require(slope < 0.0, "envelope does not decay on the fit range");
    return -1.0 / slope;
}

inline double fit_relaxation(const Envelope& env) { return fit_relaxation(env, default_fit_range(env)); }

/// Squared Pearson correlation coefficient.
template <std::ranges::random_access_range A, std::ranges::random_access_range B>
double pearson_r2(const A& a, const B& b)
{
    const auto n = static_cast<std::size_t>(std::ranges::size(a));
    detail::require(n == static_cast<std::size_t>(std::ranges::size(b)),
                    "pearson_r2 needs equal lengths");
    detail::require(n >= 2, "pearson_r2 needs at least two points");
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += static_cast<double>(a[i]);
        mb += static_cast<double>(b[i]);
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = static_cast<double>(a[i]) - ma;
        const double db = static_cast<double>(b[i]) - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0))
        throw DomainError("pearson_r2 needs non-zero variance in both series");
    return std::clamp(sab * sab / (saa * sbb), 0.0, 1.0);
}

namespace detail {

inline double peak_power_near(const PowerSpectrum& spec, double f, double half_width_bins)
{
    const double df = spec.bin_width();
    double best = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < spec.power.size(); ++k) {
        if (std::abs(spec.frequencies[k] - f) <= half_width_bins * df) {
            best = std::max(best, spec.power[k]);
            any = true;
        }
    }
    require(any, "no bins near requested frequency");
    return best;
}

}  // namespace detail

/// Power near k*f0 relative to power near f0, in dB (each the maximum within +-1.5 bins).
inline double harmonic_ratio(const PowerSpectrum& spec, double f0, int k)
{
    detail::require_positive(f0, "fundamental frequency");
    detail::require(k >= 1, "harmonic index must be >= 1");
    if (k * f0 + 1.5 * spec.bin_width() > spec.nyquist())
        throw DomainError("harmonic " + std::to_string(k) + " lies above Nyquist");
    const double fundamental = detail::peak_power_near(spec, f0, 1.5);
    detail::require(fundamental > 0.0, "no power at the fundamental");
    const double harmonic = detail::peak_power_near(spec, k * f0, 1.5);
    if (harmonic <= 0.0)
        return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(harmonic / fundamental);
}

/// Median bin power inside [f_lo, f_hi]; a robust reference level for "above the noise floor".
inline double noise_floor(const PowerSpectrum& spec, double f_lo, double f_hi)
{
    std::vector<double> band;
    for (std::size_t k = 0; k < spec.power.size(); ++k)
        if (spec.frequencies[k] >= f_lo && spec.frequencies[k] <= f_hi)
            band.push_back(spec.power[k]);
    detail::require(!band.empty(), "empty band for noise floor");
    auto mid = band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2);
    std::nth_element(band.begin(), mid, band.end());
    return *mid;
}

/// Counts spectral peaks in [f_lo, f_hi] that are within threshold_db of the strongest bin
/// in that band and are the maximum of their +-half_width_hz neighbourhood.
inline std::size_t count_peaks(const PowerSpectrum& spec, double threshold_db, double f_lo,
                               double f_hi, double half_width_hz)
{
    double top = 0.0;
    for (std::size_t k = 0; k < spec.power.size(); ++k)
        if (spec.frequencies[k] >= f_lo && spec.frequencies[k] <= f_hi)
            top = std::max(top, spec.power[k]);
    if (top <= 0.0)
        return 0;
    const double level = top * std::pow(10.0, threshold_db / 10.0);
    const auto reach = static_cast<std::size_t>(
        std::max(1.0, std::round(half_width_hz / spec.bin_width())));

    std::size_t count = 0;
    const std::size_t n = spec.power.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (spec.frequencies[k] < f_lo || spec.frequencies[k] > f_hi || spec.power[k] < level)
            continue;
        const std::size_t lo = k > reach ? k - reach : 0;
        const std::size_t hi = std::min(n - 1, k + reach);
        bool is_max = true;
        for (std::size_t j = lo; j <= hi && is_max; ++j) {
            if (j == k)
                continue;
            // ties resolve to the lowest index
            if (spec.power[j] > spec.power[k] || (spec.power[j] == spec.power[k] && j < k))
                is_max = false;
        }
        if (is_max)
            ++count;
    }
    return count;
}

inline void write_spectrum_csv(const PowerSpectrum& spec, const std::string& path,
                               double f_max = std::numeric_limits<double>::infinity())
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    out << "f_hz,power\n" << std::setprecision(12);
    for (std::size_t k = 0; k < spec.power.size() && spec.frequencies[k] <= f_max; ++k)
        out << spec.frequencies[k] << ',' << spec.power[k] << '\n';
    if (!out)
        throw IoError("write failed for " + path);
}

inline void write_envelope_csv(const Envelope& env, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    out << "t_seconds,magnitude\n" << std::setprecision(12);
    for (std::size_t i = 0; i < env.times.size(); ++i)
        out << env.times[i] << ',' << env.magnitudes[i] << '\n';
    if (!out)
        throw IoError("write failed for " + path);
}

}  // namespace bubblesynth
