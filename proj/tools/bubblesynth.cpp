// bubblesynth: command-line front end.
//
//   bubblesynth render SCORE            score -> bubble response + melody WAVs, CSVs
//   bubblesynth step-response           single-pulse study at several amplitudes
//   bubblesynth spectrum --input FILE   power spectrum of a WAV or t,value CSV
//   bubblesynth memory-test             STM / parity capacity of the bubble reservoir
//
// Global: --config PATH, --seed N, --out DIR, --set section.key=value (repeatable).

#include "bubblesynth/bubblesynth.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace bs = bubblesynth;

int main(int argc, char** argv)
{
    CLI::App app{"Acoustically driven bubble synthesiser and reservoir benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "INI run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "random seed (reservoir.seed)");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--set", overrides, "override, e.g. --set physics.alpha=1e4");

    auto* render = app.add_subcommand("render", "render a score through the bubble");
    std::string score_path;
    render->add_option("score", score_path, "score file")->required()->check(CLI::ExistingFile);

    auto* step = app.add_subcommand("step-response", "single square pulse at each amplitude");
    std::vector<double> amplitudes{2.0e4, -2.0e4};
    step->add_option("--amplitudes", amplitudes, "pulse amplitudes in Pa")
        ->delimiter(',')
        ->capture_default_str();

    auto* spectrum = app.add_subcommand("spectrum", "power spectrum of a recording");
    std::string input;
    spectrum->add_option("--input", input, "WAV or t,value CSV")->required()->check(CLI::ExistingFile);

    auto* memory = app.add_subcommand("memory-test", "memory capacity of the bubble reservoir");

    CLI11_PARSE(app, argc, argv);

    try {
        bs::RunConfig cfg = config_path.empty() ? bs::RunConfig{} : bs::load_config(config_path);
        for (const auto& o : overrides)
            bs::apply_override(cfg, o);
        if (seed)
            cfg.reservoir.seed = *seed;
        cfg.validate();

        if (render->parsed()) {
            const auto s = bs::cmd_render(bs::load_score(score_path), cfg, out_dir, score_path);
            std::cout << bs::format_summary(s);
        } else if (step->parsed()) {
            const auto report = bs::cmd_step(cfg, amplitudes, bs::fs::path(out_dir));
            std::cout << "unforced: f=" << report.unforced_hz
                      << " Hz tau=" << report.unforced_relaxation_s * 1e3 << " ms\n";
            for (const auto& r : report.records) {
                std::cout << "alpha=" << r.alpha << " Pa: ";
                if (!r.oscillating)
                    std::cout << r.note << '\n';
                else
                    std::cout << "f_in=" << r.in_pulse_hz << " Hz f_post=" << r.post_pulse_hz
                              << " Hz tau_in=" << r.in_pulse_relaxation_s * 1e3
                              << " ms tau_post=" << r.post_pulse_relaxation_s * 1e3 << " ms\n";
            }
        } else if (spectrum->parsed()) {
            const auto s = bs::cmd_spectrum(input, cfg, bs::fs::path(out_dir));
            std::cout << "dominant_hz=" << s.dominant_hz << "\nharmonic_db_2=" << s.harmonic_db[0]
                      << "\nharmonic_db_3=" << s.harmonic_db[1]
                      << "\nharmonic_db_4=" << s.harmonic_db[2] << "\npeaks=" << s.peaks << '\n';
        } else if (memory->parsed()) {
            const auto r = bs::cmd_memory(cfg, bs::fs::path(out_dir));
            std::cout << "C_STM=" << r.stm.capacity << "\nC_PC=" << r.pc.capacity
                      << "\nr2_stm_k0=" << r.stm.r2.front() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
