// Command-line front end: run, optimize, presets.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <string_view>

#include "micromaser/micromaser.hpp"

namespace fs = std::filesystem;
using namespace micromaser;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitTruncation = 2;
constexpr int kExitConvergence = 3;

constexpr std::string_view kPresetPrefix = "preset:";

/// A config path, or preset:NAME for a built-in scenario.
ScenarioConfig resolve(const std::string& source) {
    if (source.starts_with(kPresetPrefix)) {
        const std::string name = source.substr(kPresetPrefix.size());
        auto p = find_preset(name);
        if (!p) throw ConfigError("unknown preset '" + name + "'");
        return p->config;
    }
    return load_config(source);
}

void prepare_output(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
}

int cmd_run(const std::string& src, const fs::path& out_dir, bool skip_audit) {
    const ScenarioConfig cfg = resolve(src);
    prepare_output(out_dir);

    const ObservableSeries series = run_sequence(cfg.run);
    detail::write_file(out_dir / "series.csv", series_csv(series));
    for (const auto& snap : series.snapshots) {
        const std::string k = std::to_string(snap.atom_index);
        detail::write_file(out_dir / ("pn_" + k + ".csv"), photon_distribution_csv(snap.pn));
        detail::write_file(out_dir / ("qgrid_" + k + ".csv"), qgrid_csv(snap.q));
    }
    std::cout << "min zeta " << detail::sci(series.min_zeta()) << " at atom "
              << series.argmin_zeta() << "\n";

    if (skip_audit) {
        detail::write_file(out_dir / "audit.txt", "status SKIPPED\n");
        return kExitOk;
    }
    const ConvergenceReport report = convergence_audit(cfg.run);
    detail::write_file(out_dir / "audit.txt", report.to_string());
    std::cout << "convergence audit " << (report.pass ? "PASS" : "FAIL") << " (zeta drift "
              << detail::sci(report.zeta_drift) << ")\n";
    return report.pass ? kExitOk : kExitConvergence;
}

int cmd_optimize(const std::string& src, const fs::path& out_dir, int refine_iters, unsigned threads) {
    const ScenarioConfig cfg = resolve(src);
    if (!cfg.tau_scan) throw ConfigError("optimize needs tau_scan_lo, tau_scan_hi and tau_scan_step");
    prepare_output(out_dir);
    const auto& scan = *cfg.tau_scan;
    const TauOptimum best =
        optimize_interaction_time(cfg.run, scan.lo, scan.hi, scan.step, refine_iters, threads);
    detail::write_file(out_dir / "tau_scan.csv", tau_scan_csv(best.coarse));
    std::string summary = "tau_star " + detail::sci(best.tau_star) + "\n" +
                          "zeta_min " + detail::sci(best.zeta_min) + "\n" +
                          "argmin_atom_index " + std::to_string(best.argmin_atom) + "\n" +
                          "feasible " + (best.feasible ? "yes" : "no") + "\n";
    detail::write_file(out_dir / "best.txt", summary);
    std::cout << summary;
    return kExitOk;
}

int cmd_presets(const std::string& name) {
    for (const auto& p : presets()) {
        if (!name.empty() && p.name != name) continue;
        if (name.empty()) std::cout << "# preset " << p.name << ": " << p.description << "\n";
        std::cout << emit_config(p.config);
        if (name.empty()) std::cout << "\n";
    }
    if (!name.empty() && !find_preset(name)) {
        std::cerr << "unknown preset '" << name << "'\n";
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven two-photon micromaser simulator"};
    app.require_subcommand(1);

    std::string run_src;
    std::string run_out;
    bool skip_audit = false;
    auto* run = app.add_subcommand("run", "simulate an atom sequence and write CSV series");
    run->add_option("config", run_src, "key=value config file, or preset:NAME")->required();
    run->add_option("output", run_out, "output directory")->required();
    run->add_flag("--skip-audit", skip_audit, "do not rerun at twice the cutoff");

    std::string opt_src;
    std::string opt_out;
    int refine_iters = 1;
    unsigned threads = 0;
    auto* optimize = app.add_subcommand("optimize", "scan the interaction time for minimum entropy");
    optimize->add_option("config", opt_src, "key=value config file, or preset:NAME")->required();
    optimize->add_option("output", opt_out, "output directory")->required();
    optimize->add_option("--refine", refine_iters, "tenfold refinement rounds")->check(CLI::NonNegativeNumber);
    optimize->add_option("--threads", threads, "worker threads (0 = all cores)");

    std::string preset_name;
    auto* list = app.add_subcommand("presets", "print built-in presets as config files");
    list->add_option("name", preset_name, "print only this preset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(run_src, run_out, skip_audit);
        if (*optimize) return cmd_optimize(opt_src, opt_out, refine_iters, threads);
        if (*list) return cmd_presets(preset_name);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const GridOutsideTruncation& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CutoffTooSmall& e) {
        std::cerr << "truncation error: " << e.what() << "\n";
        return kExitTruncation;
    } catch (const LeakageExceeded& e) {
        std::cerr << "truncation error: " << e.what() << "\n";
        return kExitTruncation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
