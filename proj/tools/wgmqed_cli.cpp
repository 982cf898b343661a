// wgmqed: command-line front end.
//
//   wgmqed sweep         coupling sweep of the polarization transmission
//   wgmqed coincidences  delay-resolved coincidence rates (and sampled counts)
//   wgmqed tomography    windowed state reconstruction, metrics and bootstrap
//   wgmqed gate-check    sign-flip gate truth table
//   wgmqed verify        acceptance property suite
//
// Exit codes: 0 ok, 1 configuration or input error, 2 numerical failure, 3 partial results.

#include "acceptance_suite.hpp"

#include "wgmqed/bootstrap.hpp"
#include "wgmqed/config.hpp"
#include "wgmqed/io.hpp"
#include "wgmqed/metrics.hpp"
#include "wgmqed/tomography.hpp"
#include "wgmqed/transmission.hpp"
#include "wgmqed/twophoton.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace wgmqed;

namespace {

enum ExitCode { ok = 0, config_error = 1, numerical_failure = 2, partial_results = 3 };

struct GlobalOptions {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

RunConfig resolve_config(const GlobalOptions& g) {
    RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
    if (g.out) cfg.out = *g.out;
    if (g.seed) cfg.seed = *g.seed;
    if (g.threads) cfg.threads = *g.threads;
    cfg.validate();
    return cfg;
}

fs::path prepare_out(const RunConfig& cfg, const std::string& command) {
    const fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.out + "': " + ec.message());
    write_json_file(dir / "manifest.json", make_manifest(command, cfg));
    return dir;
}

int cmd_sweep(const RunConfig& cfg) {
    const fs::path dir = prepare_out(cfg, "sweep");
    const SystemParams p = cfg.sweep_params();
    const std::vector<double> grid = cfg.sweep_grid();
    const SweepTable table = sweep_coupling(p, grid, cfg.sweep.coupling_nodes);
    {
        std::ofstream a(dir / "sweep_atom.csv");
        write_sweep_csv(a, table.atom);
        std::ofstream e(dir / "sweep_empty.csv");
        write_sweep_csv(e, table.empty);
    }
    std::size_t peak = 0;
    for (std::size_t k = 1; k < table.atom.size(); ++k)
        if (table.atom[k].p_overlap > table.atom[peak].p_overlap) peak = k;
    json side = {{"kappa_i_mhz", cfg.system.kappa_i_mhz},
                 {"g_mean_mhz", cfg.system.g_mean_mhz},
                 {"g_sigma_mhz", cfg.system.g_sigma_mhz},
                 {"gamma_mhz", cfg.system.gamma_mhz},
                 {"delta_al_mhz", cfg.sweep.delta_al_mhz},
                 {"delta_rl_mhz", cfg.sweep.delta_rl_mhz},
                 {"coupling_quadrature_nodes", cfg.sweep.coupling_nodes},
                 {"coupling_distribution", "normal truncated at g >= 0, renormalized"},
                 {"p_overlap_average", "mean over g of the per-g normalized P projection"},
                 {"peak_p_overlap", table.atom[peak].p_overlap},
                 {"peak_kappa_f_over_kappa_i", grid[peak]},
                 {"peak_kappa_f_mhz", grid[peak] * cfg.system.kappa_i_mhz}};
    write_json_file(dir / "sweep.json", side);
    std::cout << "sweep: " << grid.size() << " points, peak p_overlap " << table.atom[peak].p_overlap
              << " at kappa_f = 2pi x " << grid[peak] * cfg.system.kappa_i_mhz << " MHz -> " << dir.string() << '\n';
    return ok;
}

int cmd_coincidences(const RunConfig& cfg) {
    const fs::path dir = prepare_out(cfg, "coincidences");
    const SystemParams p = cfg.two_photon_params();
    const JonesVector in = balanced_drive(p, cfg.two_photon.input_amplitude);
    const std::vector<double> delays = symmetric_delay_grid(cfg.two_photon.half_range_ns, cfg.two_photon.bin_width_ns);
    const CoincidenceTable rates =
        coincidence_rates(p, in, cfg.detector_settings(), delays, cfg.two_photon.bin_width_ns, cfg.two_photon_options());
    const json meta = {{"kind", "coincidence rate per bin, photons^2/us^2"},
                       {"kappa_f_over_kappa_i", cfg.two_photon.kf_over_ki},
                       {"atom", cfg.two_photon.atom},
                       {"input_amplitude", cfg.two_photon.input_amplitude}};
    save_coincidence_table((dir / "coincidences_rate.csv").string(), rates, meta);

    const NormalizedTable norm = normalized_correlations(rates);
    json undefined = json::array();
    for (const auto& s : norm.undefined) undefined.push_back(s.name());
    if (!norm.table.settings.empty()) {
        save_coincidence_table((dir / "coincidences_normalized.csv").string(), norm.table,
                               {{"kind", "coincidence rate / product of singles rates"}, {"undefined_settings", undefined}});
    }
    if (!norm.undefined.empty()) {
        std::cerr << "coincidences: no normalization for " << undefined.dump() << " (vanishing singles rate)\n";
    }
    if (cfg.two_photon.sample_pairs > 0.0) {
        const CoincidenceTable counts = sample_clicks(rates, cfg.two_photon.sample_pairs, cfg.seed);
        save_coincidence_table((dir / "coincidences_counts.csv").string(), counts, {{"kind", "sampled counts"}});
    }
    std::cout << "coincidences: " << rates.settings.size() << " settings x " << rates.bins() << " bins -> "
              << dir.string() << '\n';
    return ok;
}

struct WindowOutcome {
    double delay = 0.0;
    double window = 0.0;
    std::optional<MetricsReport> metrics;
    std::optional<BootstrapReport> boot;
    std::optional<TwoPhotonState> state;
    std::string status = "ok";
};

int cmd_tomography(const RunConfig& cfg) {
    const fs::path dir = prepare_out(cfg, "tomography");
    CoincidenceTable table;
    if (!cfg.tomography.data.empty()) {
        table = load_coincidence_table(cfg.tomography.data);
    } else {
        const SystemParams p = cfg.two_photon_params();
        const JonesVector in = balanced_drive(p, cfg.two_photon.input_amplitude);
        const std::vector<double> delays = symmetric_delay_grid(cfg.two_photon.half_range_ns, cfg.two_photon.bin_width_ns);
        table = coincidence_rates(p, in, canonical_settings(), delays, cfg.two_photon.bin_width_ns, cfg.two_photon_options());
    }
    const MeasurementModel model = build_measurement_model(table.settings, SettingWeights::coincidence);
    MleOptions mle;
    mle.restarts = cfg.tomography.mle_restarts;
    mle.seed = cfg.seed;
    const bool counts_mode = table.mode == TableMode::count;

    auto analyse = [&](double delay, double window, bool with_bootstrap) {
        WindowOutcome o;
        o.delay = delay;
        o.window = window;
        try {
            const std::vector<double> sums = window_sums(table, delay, window);
            const std::vector<double> data = counts_mode ? sums : pseudo_counts(sums);
            const MleResult fit = mle_reconstruct(data, model, mle);
            o.state = fit.rho;
            o.metrics = evaluate_metrics(fit.rho, delay, window);
            if (with_bootstrap && counts_mode) {
                BootstrapOptions bo;
                bo.replicates = cfg.bootstrap.replicates;
                bo.seed = cfg.seed;
                bo.threads = cfg.threads;
                bo.mle = mle;
                bo.mle.restarts = std::min(mle.restarts, 2);
                o.boot = bootstrap_metrics(data, model, bo);
            }
        } catch (const Error& e) {
            o.status = e.what();
        }
        return o;
    };

    std::vector<WindowOutcome> grid;
    int failures = 0;
    for (double w : cfg.tomography.windows_ns) {
        for (double d : cfg.tomography.mean_delays_ns) {
            grid.push_back(analyse(d, w, cfg.bootstrap.all_windows));
            failures += grid.back().metrics ? 0 : 1;
        }
    }
    const WindowOutcome head = analyse(cfg.tomography.headline_delay_ns, cfg.tomography.headline_window_ns, true);

    {
        std::ofstream csv(dir / "metrics_surface.csv");
        csv << "mean_delay_ns,window_ns,overlap,concurrence,phase_pi,overlap_std,concurrence_std,phase_std_pi,status\n"
            << std::setprecision(10);
        for (const auto& o : grid) {
            csv << o.delay << ',' << o.window << ',';
            if (o.metrics) {
                csv << o.metrics->overlap << ',' << o.metrics->concurrence << ',';
                if (o.metrics->phase) csv << phase_display_units(*o.metrics->phase);
                csv << ',';
            } else {
                csv << ",,,";
            }
            if (o.boot) {
                csv << o.boot->overlap.stddev << ',' << o.boot->concurrence.stddev << ','
                    << o.boot->phase.stddev / std::numbers::pi << ',';
            } else {
                csv << ",,,";
            }
            std::string status = o.status;
            for (char& c : status)
                if (c == ',' || c == '\n') c = ';';
            csv << status << '\n';
        }
    }
    {
        std::ofstream f(dir / "rho_final.csv");
        write_matrix_csv(f, TwoPhotonState::pure(ideal_states().final).matrix(), symmetric_labels());
    }
    json summary = {{"source", cfg.tomography.data.empty() ? "simulated rates" : cfg.tomography.data},
                    {"mode", counts_mode ? "count" : "rate"},
                    {"circular_convention", std::string(circular_convention)},
                    {"windows_failed", failures},
                    {"windows_total", grid.size()}};
    if (head.metrics) {
        std::ofstream f(dir / "rho_headline.csv");
        write_matrix_csv(f, head.state->matrix(), symmetric_labels());
        std::ofstream f4(dir / "rho_headline_4x4.csv");
        write_matrix_csv(f4, head.state->embed(), product_labels());
        summary["headline"] = metrics_json(*head.metrics);
        summary["headline_rho"] = matrix_json(head.state->matrix());
        summary["bootstrap"] = head.boot ? bootstrap_json(*head.boot) : json("not run: rate tables carry no counts");
        std::cout << "tomography: headline overlap " << head.metrics->overlap << ", concurrence "
                  << head.metrics->concurrence;
        if (head.metrics->phase) std::cout << ", phase " << phase_display_units(*head.metrics->phase) << " pi";
        std::cout << '\n';
    } else {
        summary["headline"] = {{"status", head.status}};
        std::cerr << "tomography: headline window failed: " << head.status << '\n';
    }
    write_json_file(dir / "metrics.json", summary);
    std::cout << "tomography: " << grid.size() - failures << '/' << grid.size() << " windows reconstructed -> "
              << dir.string() << '\n';
    if (!head.metrics && failures == static_cast<int>(grid.size())) return numerical_failure;
    return failures > 0 || !head.metrics ? partial_results : ok;
}

int cmd_gate_check(const RunConfig& cfg) {
    const fs::path dir = prepare_out(cfg, "gate-check");
    const acceptance::CheckResult r = acceptance::criterion8();
    Matrix4 truth;
    for (int k = 0; k < 4; ++k) truth.col(k) = sign_flip_gate(Vector4::Unit(k));
    const Vector4 pp = sign_flip_gate(Vector4::Constant(0.5));
    write_json_file(dir / "gate.json", {{"truth_table", matrix_json(truth)},
                                        {"basis", product_labels()},
                                        {"output_for_PP", matrix_json(Eigen::Matrix<cplx, 4, 1>(pp))},
                                        {"concurrence_PP", concurrence(Matrix4(pp * pp.adjoint()))},
                                        {"pass", r.pass},
                                        {"detail", r.detail}});
    std::cout << acceptance::format_line(r) << '\n';
    return r.pass ? ok : numerical_failure;
}

int cmd_verify(const RunConfig& cfg) {
    const fs::path dir = prepare_out(cfg, "verify");
    std::ofstream log(dir / "verify.txt");
    const auto results = acceptance::run_all([&](const acceptance::CheckResult& r) {
        const std::string line = acceptance::format_line(r);
        std::cout << line << std::endl;
        log << line << '\n';
    });
    int failed = 0;
    for (const auto& r : results) failed += r.pass ? 0 : 1;
    return failed == 0 ? ok : numerical_failure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Atom-resonator polarization nonlinearity simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    std::string out, seed_text;
    int threads = 0;
    app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed_text, "random seed (overrides config)");
    app.add_option("--threads", threads, "worker threads (overrides config)")->check(CLI::PositiveNumber);

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const Command commands[] = {
        {"sweep", "coupling sweep of P overlap and survival", cmd_sweep},
        {"coincidences", "delay-resolved coincidence rates for the detector settings", cmd_coincidences},
        {"tomography", "windowed reconstruction, metrics and bootstrap errors", cmd_tomography},
        {"gate-check", "truth table of the sign-flip gate protocol", cmd_gate_check},
        {"verify", "run the acceptance property suite", cmd_verify},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) subs.push_back(app.add_subcommand(c.name, c.help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (!out.empty()) g.out = out;
        if (!seed_text.empty()) {
            try {
                std::size_t pos = 0;
                g.seed = std::stoull(seed_text, &pos);
                if (pos != seed_text.size()) throw std::invalid_argument(seed_text);
            } catch (const std::exception&) {
                throw ConfigError("--seed must be a nonnegative integer");
            }
        }
        if (threads > 0) g.threads = threads;
        const RunConfig cfg = resolve_config(g);
        for (std::size_t k = 0; k < subs.size(); ++k)
            if (subs[k]->parsed()) return commands[k].run(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return config_error;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    }
    return config_error;
}
