#pragma once

// End-to-end runs behind the command-line tool: score rendering, single-pulse step studies,
// spectra of existing recordings and the memory-capacity benchmark. Each writes its
// artifacts plus a manifest into an output directory.

#include "bubblesynth/audio_io.hpp"
#include "bubblesynth/bubble_solver.hpp"
#include "bubblesynth/config.hpp"
#include "bubblesynth/reservoir.hpp"
#include "bubblesynth/score_codec.hpp"
#include "bubblesynth/signal_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace bubblesynth {

namespace fs = std::filesystem;

/// Peak counting used to compare input and response spectra.
struct PeakCountOptions {
    double threshold_db = -40.0;
    double f_lo = 20.0;
    double f_hi = 20000.0;
    double half_width_hz = 10.0;
};

inline void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg,
                           const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs)
{
    std::ofstream out(dir / "manifest.txt");
    if (!out)
        throw IoError("cannot write " + (dir / "manifest.txt").string());
    out << "command: " << command << '\n';
    for (const auto& in : inputs)
        out << "input: " << in << '\n';
    out << "config_hash: " << config_hash(cfg) << '\n';
    for (const auto& o : outputs)
        out << "output: " << o << '\n';
    out << "\n# config\n" << to_text(cfg);
    if (!out)
        throw IoError("write failed for manifest.txt");
}

inline void prepare_output_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory " + dir.string());
}

// ---------------------------------------------------------------------------------- render

struct Interval {
    double begin = 0.0;
    double end = 0.0;
};

/// Silent tails of sounding notes, where the encoded forcing is exactly zero.
inline std::vector<Interval> articulation_gaps(const Score& score, double articulation)
{
    std::vector<Interval> gaps;
    double t = 0.0;
    for (const auto& e : score.events) {
        const double span = e.duration_beats * score.seconds_per_beat();
        if (!e.is_rest() && articulation > 0.0)
            gaps.push_back({t + (1.0 - articulation) * span, t + span});
        t += span;
    }
    return gaps;
}

struct RenderSummary {
    double duration_seconds = 0.0;
    double response_fundamental_hz = 0.0;
    double harmonic_db[3] = {0.0, 0.0, 0.0};  // k = 2, 3, 4 relative to the fundamental
    std::size_t input_peaks = 0;
    std::size_t response_peaks = 0;
    double gap_energy_response = 0.0;  // mean p_scat^2 inside articulation gaps
    double gap_energy_input = 0.0;     // mean P_a^2 there (zero by construction)
    std::vector<std::string> outputs;
};

inline std::string format_summary(const RenderSummary& s)
{
    std::ostringstream os;
    os << std::setprecision(6);
    os << "duration_s=" << s.duration_seconds << '\n'
       << "response_fundamental_hz=" << s.response_fundamental_hz << '\n'
       << "harmonic_db_2=" << s.harmonic_db[0] << '\n'
       << "harmonic_db_3=" << s.harmonic_db[1] << '\n'
       << "harmonic_db_4=" << s.harmonic_db[2] << '\n'
       << "input_peaks=" << s.input_peaks << '\n'
       << "response_peaks=" << s.response_peaks << '\n'
       << "gap_energy_response=" << s.gap_energy_response << '\n'
       << "gap_energy_input=" << s.gap_energy_input << '\n';
    return os.str();
}

inline RenderSummary cmd_render(const Score& score, const RunConfig& cfg, const fs::path& out_dir,
                                const std::string& score_label = "score",
                                const PeakCountOptions& peaks = {})
{
    cfg.validate();
    prepare_output_dir(out_dir);
    const auto g = cfg.groups();

    const PressureSignal forcing = render_pulse_train(score, cfg.pulse_options());
    const double dtau = cfg.dtau(g);
    const double tau_end = g.to_tau(forcing.duration_seconds());

    // Keep at least two stored points per audio sample before decimation.
    const double audio_dt = 1.0 / cfg.audio.rate;
    const double step_seconds = g.to_seconds(dtau);
    SolverOptions so = cfg.solver_options(g, tau_end);
    so.output_stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(audio_dt / step_seconds / 2.0)));
    const Trajectory traj = simulate(BubbleState{}, forcing, g, so);

    const AudioBuffer response =
        normalize(resample(traj.p_scat, traj.dt_seconds(), cfg.audio.rate), cfg.audio.peak);
    const AudioBuffer melody =
        normalize(resample(forcing.samples, forcing.dt_seconds, cfg.audio.rate), cfg.audio.peak);

    RenderSummary s;
    s.duration_seconds = forcing.duration_seconds();

    const auto input_spec = power_spectrum(melody.samples, 1.0 / melody.sample_rate);
    const auto response_spec = power_spectrum(response.samples, 1.0 / response.sample_rate);
    s.input_peaks = count_peaks(input_spec, peaks.threshold_db, peaks.f_lo, peaks.f_hi,
                                peaks.half_width_hz);
    s.response_peaks = count_peaks(response_spec, peaks.threshold_db, peaks.f_lo, peaks.f_hi,
                                   peaks.half_width_hz);
    s.response_fundamental_hz = dominant_frequency(response_spec, peaks.f_lo, peaks.f_hi);
    for (int k = 2; k <= 4; ++k)
        s.harmonic_db[k - 2] = harmonic_ratio(response_spec, s.response_fundamental_hz, k);

    double e_resp = 0.0, e_in = 0.0;
    std::size_t n_gap = 0;
    for (const auto& gap : articulation_gaps(score, cfg.encoding.articulation)) {
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const double t = traj.seconds(i);
            if (t < gap.begin || t >= gap.end)
                continue;
            e_resp += traj.p_scat[i] * traj.p_scat[i];
            auto j = static_cast<std::size_t>(t / forcing.dt_seconds);
            j = std::min(j, forcing.samples.size() - 1);
            e_in += forcing.samples[j] * forcing.samples[j];
            ++n_gap;
        }
    }
    if (n_gap > 0) {
        s.gap_energy_response = e_resp / static_cast<double>(n_gap);
        s.gap_energy_input = e_in / static_cast<double>(n_gap);
    }

    write_wav(response, (out_dir / "response.wav").string());
    write_wav(melody, (out_dir / "melody.wav").string());
    const auto traj_stride = std::max<std::size_t>(1, traj.size() / 200000);
    write_trajectory_csv(traj, (out_dir / "trajectory.csv").string(), traj_stride);
    write_spectrum_csv(input_spec, (out_dir / "input_spectrum.csv").string(), peaks.f_hi);
    write_spectrum_csv(response_spec, (out_dir / "response_spectrum.csv").string(), peaks.f_hi);
    {
        std::ofstream sum(out_dir / "summary.txt");
        sum << format_summary(s);
        if (!sum)
            throw IoError("write failed for summary.txt");
    }
    s.outputs = {"response.wav",          "melody.wav", "trajectory.csv", "input_spectrum.csv",
                 "response_spectrum.csv", "summary.txt"};
    write_manifest(out_dir, "render", cfg, {score_label}, s.outputs);
    return s;
}

// ------------------------------------------------------------------------------------ step

struct StepRecord {
    double alpha = 0.0;  // Pa
    bool collapsed = false;
    bool oscillating = true;
    std::string note;  // collapse message or "no oscillation"
    double in_pulse_hz = 0.0;
    double post_pulse_hz = 0.0;
    double in_pulse_relaxation_s = 0.0;
    double post_pulse_relaxation_s = 0.0;
    double harmonic_db[3] = {0.0, 0.0, 0.0};  // in-pulse, k = 2, 3, 4
    PowerSpectrum in_pulse_spectrum;
    PowerSpectrum post_pulse_spectrum;
    Envelope in_pulse_envelope;
    Envelope post_pulse_envelope;
};

struct StepReport {
    double unforced_hz = 0.0;          // free decay from a small displacement
    double unforced_relaxation_s = 0.0;
    std::vector<StepRecord> records;
};

inline constexpr double kStepBandLow = 500.0;  // Hz, keeps the pulse edges' low-frequency content out

/// Free decay from r = 1 + displacement with no drive.
inline std::pair<double, double> free_decay(const RunConfig& cfg, double displacement = 1.0e-3)
{
    const auto g = cfg.groups();
    const double window = 2.0 * cfg.step.pulse_relaxation_times * relaxation_time(g);
    const Trajectory traj =
        simulate(BubbleState{1.0 + displacement, 0.0, 0.0}, PressureSignal{}, g,
                 cfg.solver_options(g, window));
    const auto spec = power_spectrum(traj.p_scat, traj.dt_seconds());
    const auto env = envelope(traj.p_scat, traj.dt_seconds());
    return {dominant_frequency(spec, kStepBandLow, spec.nyquist()), fit_relaxation(env)};
}

/// Square pulse of amplitude alpha lasting pulse_relaxation_times * tau0, then the same
/// length of free ringing.
inline StepRecord run_step(const RunConfig& cfg, double alpha)
{
    StepRecord rec;
    rec.alpha = alpha;
    if (alpha == 0.0) {
        rec.oscillating = false;
        rec.note = "no oscillation";
        return rec;
    }
    const auto g = cfg.groups_at(std::abs(alpha));
    const double span = cfg.step.pulse_relaxation_times * relaxation_time(g);
    const double dtau = cfg.dtau(g);
    const PressureSignal pulse = step_pulse(alpha > 0.0 ? 1.0 : -1.0, span, span, dtau, g);
    Trajectory traj;
    try {
        traj = simulate(BubbleState{}, pulse, g, cfg.solver_options(g, 2.0 * span));
    } catch (const SolverError& e) {
        rec.collapsed = true;
        rec.oscillating = false;
        rec.note = e.what();
        return rec;
    }

    const auto hold = static_cast<std::size_t>(std::llround(span / traj.dtau));
    const std::span<const double> p(traj.p_scat);
    const auto in = p.subspan(1, hold - 1);
    const auto post = p.subspan(hold + 1);
    const double dt = traj.dt_seconds();

    rec.in_pulse_spectrum = power_spectrum(in, dt);
    rec.post_pulse_spectrum = power_spectrum(post, dt);
    rec.in_pulse_hz = dominant_frequency(rec.in_pulse_spectrum, kStepBandLow,
                                         rec.in_pulse_spectrum.nyquist());
    rec.post_pulse_hz = dominant_frequency(rec.post_pulse_spectrum, kStepBandLow,
                                           rec.post_pulse_spectrum.nyquist());
    for (int k = 2; k <= 4; ++k)
        rec.harmonic_db[k - 2] = harmonic_ratio(rec.in_pulse_spectrum, rec.in_pulse_hz, k);
    rec.in_pulse_envelope = envelope(in, dt);
    rec.post_pulse_envelope = envelope(post, dt);
    rec.in_pulse_relaxation_s = fit_relaxation(rec.in_pulse_envelope);
    rec.post_pulse_relaxation_s = fit_relaxation(rec.post_pulse_envelope);
    return rec;
}

inline StepReport cmd_step(const RunConfig& cfg, const std::vector<double>& amplitudes,
                           const std::optional<fs::path>& out_dir = std::nullopt)
{
    cfg.validate();
    for (double a : amplitudes)
        detail::require(std::abs(a) < cfg.bubble.static_pressure,
                        "step amplitudes must lie inside (-p0, p0)");
    StepReport report;
    std::tie(report.unforced_hz, report.unforced_relaxation_s) = free_decay(cfg);
    for (double a : amplitudes)
        report.records.push_back(run_step(cfg, a));

    if (!out_dir)
        return report;
    prepare_output_dir(*out_dir);
    std::vector<std::string> outputs{"step_response.csv"};
    std::ofstream csv(*out_dir / "step_response.csv");
    csv << std::setprecision(8)
        << "alpha_pa,status,f_in_hz,f_post_hz,tau_in_s,tau_post_s,h2_db,h3_db,h4_db\n";
    csv << "0,unforced," << report.unforced_hz << ',' << report.unforced_hz << ','
        << report.unforced_relaxation_s << ',' << report.unforced_relaxation_s << ",,,\n";
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        const auto& r = report.records[i];
        if (!r.oscillating) {
            csv << r.alpha << ",\"" << r.note << "\",,,,,,,\n";
            continue;
        }
        csv << r.alpha << ",ok," << r.in_pulse_hz << ',' << r.post_pulse_hz << ','
            << r.in_pulse_relaxation_s << ',' << r.post_pulse_relaxation_s << ','
            << r.harmonic_db[0] << ',' << r.harmonic_db[1] << ',' << r.harmonic_db[2] << '\n';
        const std::string tag = "alpha_" + std::to_string(i);
        write_spectrum_csv(r.in_pulse_spectrum, (*out_dir / (tag + "_in_spectrum.csv")).string(), 20000.0);
        write_spectrum_csv(r.post_pulse_spectrum, (*out_dir / (tag + "_post_spectrum.csv")).string(), 20000.0);
        write_envelope_csv(r.in_pulse_envelope, (*out_dir / (tag + "_in_envelope.csv")).string());
        write_envelope_csv(r.post_pulse_envelope, (*out_dir / (tag + "_post_envelope.csv")).string());
        for (const char* part : {"_in_spectrum.csv", "_post_spectrum.csv", "_in_envelope.csv",
                                 "_post_envelope.csv"})
            outputs.push_back(tag + part);
    }
    if (!csv)
        throw IoError("write failed for step_response.csv");
    std::ostringstream inputs;
    inputs << "amplitudes_pa=";
    for (std::size_t i = 0; i < amplitudes.size(); ++i)
        inputs << (i ? "," : "") << amplitudes[i];
    write_manifest(*out_dir, "step-response", cfg, {inputs.str()}, outputs);
    return report;
}

// -------------------------------------------------------------------------------- spectrum

/// Loads a mono signal from a WAV file or a CSV whose first two columns are time and value.
inline AudioBuffer load_signal(const std::string& path)
{
    if (fs::path(path).extension() == ".wav")
        return read_wav(path);
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    std::vector<double> t, v;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#')
            continue;
        const auto comma = s.find(',');
        if (comma == std::string::npos)
            throw ParseError("expected 't,value' in " + path, line_no);
        auto tv = detail::parse_number(detail::trim(s.substr(0, comma)));
        const auto rest = s.substr(comma + 1);
        auto vv = detail::parse_number(detail::trim(rest.substr(0, rest.find(','))));
        if (!tv || !vv) {
            if (t.empty())
                continue;  // header
            throw ParseError("non-numeric sample in " + path, line_no);
        }
        t.push_back(*tv);
        v.push_back(*vv);
    }
    detail::require(v.size() >= 2, path + " holds fewer than two samples");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    detail::require(dt > 0.0, path + ": time column must increase");
    return AudioBuffer{std::move(v), 1.0 / dt};
}

struct SpectrumSummary {
    double dominant_hz = 0.0;
    double harmonic_db[3] = {0.0, 0.0, 0.0};
    std::size_t peaks = 0;
    PowerSpectrum spectrum;
};

inline SpectrumSummary cmd_spectrum(const std::string& input, const RunConfig& cfg,
                                    const std::optional<fs::path>& out_dir = std::nullopt,
                                    const PeakCountOptions& peaks = {})
{
    cfg.validate();
    const AudioBuffer signal = load_signal(input);
    SpectrumSummary s;
    s.spectrum = power_spectrum(signal.samples, 1.0 / signal.sample_rate);
    const double f_hi = std::min(peaks.f_hi, s.spectrum.nyquist());
    s.dominant_hz = dominant_frequency(s.spectrum, peaks.f_lo, f_hi);
    for (int k = 2; k <= 4; ++k)
        s.harmonic_db[k - 2] = harmonic_ratio(s.spectrum, s.dominant_hz, k);
    s.peaks = count_peaks(s.spectrum, peaks.threshold_db, peaks.f_lo, f_hi, peaks.half_width_hz);
    if (out_dir) {
        prepare_output_dir(*out_dir);
        write_spectrum_csv(s.spectrum, (*out_dir / "spectrum.csv").string());
        write_manifest(*out_dir, "spectrum", cfg, {input}, {"spectrum.csv"});
    }
    return s;
}

// ---------------------------------------------------------------------------------- memory

struct MemoryReport {
    CapacityReport stm;
    CapacityReport pc;
};

inline MemoryReport cmd_memory(const RunConfig& cfg,
                               const std::optional<fs::path>& out_dir = std::nullopt)
{
    cfg.validate();
    const auto bits =
        random_bits(static_cast<std::size_t>(cfg.reservoir.n_bits), cfg.reservoir.seed);
    const auto g = cfg.groups_at(cfg.reservoir.alpha);
    const StateMatrix states = bubble_state_matrix(bits, g, cfg.reservoir_options());
    const CapacityOptions opt{cfg.reservoir.beta, cfg.reservoir.k_max};
    MemoryReport r{stm_capacity(states, bits, opt), pc_capacity(states, bits, opt)};
    if (out_dir) {
        prepare_output_dir(*out_dir);
        write_capacity_csv(r.stm, r.pc, (*out_dir / "capacity.csv").string());
        std::ofstream sum(*out_dir / "summary.txt");
        sum << std::setprecision(6) << "C_STM=" << r.stm.capacity << "\nC_PC=" << r.pc.capacity
            << "\nr2_stm_k0=" << r.stm.r2.front() << '\n';
        if (!sum)
            throw IoError("write failed for summary.txt");
        write_manifest(*out_dir, "memory-test", cfg,
                       {"random_bits(n=" + std::to_string(cfg.reservoir.n_bits) +
                        ", seed=" + std::to_string(cfg.reservoir.seed) + ")"},
                       {"capacity.csv", "summary.txt"});
    }
    return r;
}

}  // namespace bubblesynth
