#pragma once

// Flat key=value scenario files, built-in presets and CSV writers.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "micromaser/errors.hpp"
#include "micromaser/experiments.hpp"

namespace micromaser {

struct TauScanRange {
    double lo = 0.0;
    double hi = 12.0;
    double step = 0.05;
};

/// Everything a config file can express.
struct ScenarioConfig {
    RunConfig run;
    std::optional<TauScanRange> tau_scan;  // set only when all three keys were given
};

inline constexpr std::array<std::string_view, 21> kConfigKeys = {
    "n_bar",        "cutoff",      "chi_over_lambda", "delta_over_lambda", "eps_re",
    "eps_im",       "tau",         "atom_a",          "atom_b",            "atom_phi",
    "n_atoms",      "snapshots",   "q_xmin",          "q_xmax",            "q_ymin",
    "q_ymax",       "q_nx",        "q_ny",            "tau_scan_lo",       "tau_scan_hi",
    "tau_scan_step"};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_real(std::string_view key, std::string_view text) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty() || !std::isfinite(value)) {
        throw ConfigError("invalid number for key '" + std::string(key) + "': '" +
                          std::string(text) + "'");
    }
    return value;
}

inline long parse_integer(std::string_view key, std::string_view text) {
    long value = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ConfigError("invalid integer for key '" + std::string(key) + "': '" +
                          std::string(text) + "'");
    }
    return value;
}

inline std::vector<int> parse_index_list(std::string_view key, std::string_view text) {
    std::vector<int> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        if (!item.empty()) out.push_back(static_cast<int>(parse_integer(key, item)));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

/// Shortest round-trip decimal, always with a decimal point or exponent.
inline std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    std::string s(buf.data(), ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

}  // namespace detail

/// Parses a config document. Unknown or repeated keys are errors; missing
/// keys keep their RunConfig defaults.
inline ScenarioConfig parse_config(std::string_view text) {
    std::map<std::string, std::string, std::less<>> values;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
            throw ConfigError("unknown key '" + key + "' on line " + std::to_string(line_no));
        }
        if (!values.emplace(key, value).second) {
            throw ConfigError("duplicate key '" + key + "' on line " + std::to_string(line_no));
        }
    }

    ScenarioConfig cfg;
    RunConfig& run = cfg.run;
    auto real = [&](std::string_view key, double& target) {
        if (auto it = values.find(key); it != values.end()) target = detail::parse_real(key, it->second);
    };
    auto integer = [&](std::string_view key, auto& target) {
        if (auto it = values.find(key); it != values.end()) {
            const long v = detail::parse_integer(key, it->second);
            if (v < 0) throw ConfigError("key '" + std::string(key) + "' must be non-negative");
            target = static_cast<std::remove_reference_t<decltype(target)>>(v);
        }
    };

    real("n_bar", run.n_bar);
    std::size_t cutoff = run.params.space.cutoff();
    integer("cutoff", cutoff);
    if (cutoff < 4) throw ConfigError("cutoff must be at least 4");
    run.params.space = FockSpace{cutoff};
    real("chi_over_lambda", run.params.chi_over_lambda);
    real("delta_over_lambda", run.params.delta_over_lambda);
    double eps_re = run.params.eps.real();
    double eps_im = run.params.eps.imag();
    real("eps_re", eps_re);
    real("eps_im", eps_im);
    run.params.eps = {eps_re, eps_im};
    real("tau", run.params.tau);
    real("atom_a", run.atom.a);
    real("atom_b", run.atom.b);
    real("atom_phi", run.atom.phi);
    integer("n_atoms", run.n_atoms);
    if (auto it = values.find("snapshots"); it != values.end()) {
        run.snapshots = detail::parse_index_list("snapshots", it->second);
    }
    real("q_xmin", run.q_grid.x_min);
    real("q_xmax", run.q_grid.x_max);
    real("q_ymin", run.q_grid.y_min);
    real("q_ymax", run.q_grid.y_max);
    integer("q_nx", run.q_grid.nx);
    integer("q_ny", run.q_grid.ny);

    const bool has_lo = values.contains("tau_scan_lo");
    const bool has_hi = values.contains("tau_scan_hi");
    const bool has_step = values.contains("tau_scan_step");
    if (has_lo || has_hi || has_step) {
        if (!(has_lo && has_hi && has_step)) {
            throw ConfigError("tau_scan_lo, tau_scan_hi and tau_scan_step must be given together");
        }
        TauScanRange scan;
        real("tau_scan_lo", scan.lo);
        real("tau_scan_hi", scan.hi);
        real("tau_scan_step", scan.step);
        cfg.tau_scan = scan;
    }

    try {
        run.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    if (run.q_grid.nx < 1 || run.q_grid.ny < 1) throw ConfigError("q_nx and q_ny must be positive");
    if (cfg.tau_scan && (cfg.tau_scan->lo < 0.0 || cfg.tau_scan->hi < cfg.tau_scan->lo ||
                         !(cfg.tau_scan->step > 0.0))) {
        throw ConfigError("tau scan needs 0 <= tau_scan_lo <= tau_scan_hi and tau_scan_step > 0");
    }
    return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

/// Writes every key, so the output re-parses to the same configuration.
inline std::string emit_config(const ScenarioConfig& cfg) {
    const RunConfig& run = cfg.run;
    const auto r = detail::format_real;
    std::string snaps;
    for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
        if (i) snaps += ",";
        snaps += std::to_string(run.snapshots[i]);
    }
    const TauScanRange scan = cfg.tau_scan.value_or(TauScanRange{});
    std::string out;
    auto line = [&](std::string_view key, const std::string& value) {
        out.append(key).append("=").append(value).append("\n");
    };
    line("n_bar", r(run.n_bar));
    line("cutoff", std::to_string(run.params.space.cutoff()));
    line("chi_over_lambda", r(run.params.chi_over_lambda));
    line("delta_over_lambda", r(run.params.delta_over_lambda));
    line("eps_re", r(run.params.eps.real()));
    line("eps_im", r(run.params.eps.imag()));
    line("tau", r(run.params.tau));
    line("atom_a", r(run.atom.a));
    line("atom_b", r(run.atom.b));
    line("atom_phi", r(run.atom.phi));
    line("n_atoms", std::to_string(run.n_atoms));
    line("snapshots", snaps);
    line("q_xmin", r(run.q_grid.x_min));
    line("q_xmax", r(run.q_grid.x_max));
    line("q_ymin", r(run.q_grid.y_min));
    line("q_ymax", r(run.q_grid.y_max));
    line("q_nx", std::to_string(run.q_grid.nx));
    line("q_ny", std::to_string(run.q_grid.ny));
    line("tau_scan_lo", r(scan.lo));
    line("tau_scan_hi", r(scan.hi));
    line("tau_scan_step", r(scan.step));
    return out;
}

struct Preset {
    std::string name;
    std::string description;
    ScenarioConfig config;
};

/// Thermal n_bar = 5 field, excited atoms, chi/lambda = Delta/lambda = 1,
/// tau = 8.9, 100 atoms.
inline ScenarioConfig paper_scenario(double eps) {
    ScenarioConfig cfg;
    cfg.run.params = ModelParams{1.0, 1.0, {eps, 0.0}, 8.9, FockSpace{kDefaultCutoff}};
    cfg.run.atom = AtomPrep::excited();
    cfg.run.n_atoms = 100;
    cfg.run.n_bar = 5.0;
    cfg.tau_scan = TauScanRange{0.0, 12.0, 0.05};
    return cfg;
}

inline std::vector<Preset> presets() {
    std::vector<Preset> out;
    out.push_back({"paper-fig2-eps1", "linear entropy series, drive amplitude 1", paper_scenario(1.0)});
    out.push_back({"paper-fig2-eps2", "linear entropy series, drive amplitude 2", paper_scenario(2.0)});
    out.push_back({"paper-fig2-eps3", "linear entropy series, drive amplitude 3", paper_scenario(3.0)});
    ScenarioConfig snap = paper_scenario(1.0);
    snap.run.snapshots = {100};
    out.push_back({"paper-fig5-7", "photon distribution and Q-function after 100 atoms", snap});
    return out;
}

inline std::optional<Preset> find_preset(std::string_view name) {
    for (auto& p : presets()) {
        if (p.name == name) return p;
    }
    return std::nullopt;
}

// CSV output ---------------------------------------------------------------

namespace detail {

inline std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace detail

inline std::string series_csv(const ObservableSeries& series) {
    std::string out = "atom_index,zeta,mean_n,g2\n";
    for (std::size_t k = 0; k < series.zeta.size(); ++k) {
        out += std::to_string(k) + "," + detail::sci(series.zeta[k]) + "," +
               detail::sci(series.mean_n[k]) + "," + detail::sci(series.g2[k]) + "\n";
    }
    return out;
}

inline std::string photon_distribution_csv(const PhotonDistribution& pn) {
    std::string out = "n,p_n\n";
    for (std::size_t n = 0; n < pn.size(); ++n) {
        out += std::to_string(n) + "," + detail::sci(pn[n]) + "\n";
    }
    return out;
}

inline std::string qgrid_csv(const QGrid& grid) {
    std::string out = "x,y,q\n";
    for (int i = 0; i < grid.spec.nx; ++i) {
        for (int k = 0; k < grid.spec.ny; ++k) {
            out += detail::sci(grid.spec.x(i)) + "," + detail::sci(grid.spec.y(k)) + "," +
                   detail::sci(grid.values(i, k)) + "\n";
        }
    }
    return out;
}

inline std::string tau_scan_csv(const std::vector<TauScanPoint>& points) {
    std::string out = "tau,zeta_min,argmin_atom_index\n";
    for (const auto& p : points) {
        out += detail::sci(p.tau) + "," + detail::sci(p.zeta_min) + "," +
               std::to_string(p.argmin_atom) + "\n";
    }
    return out;
}

}  // namespace micromaser
