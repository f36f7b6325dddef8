#pragma once

// N-atom sequences, interaction-time search and truncation audits.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "micromaser/dynamics.hpp"
#include "micromaser/fock.hpp"
#include "micromaser/observables.hpp"

namespace micromaser {

/// Cutoff used when a configuration does not name one.
inline constexpr std::size_t kDefaultCutoff = 256;

/// Candidates whose run ever drops <n> below n_bar minus this are rejected.
inline constexpr double kEnergyTolerance = 0.1;

struct RunConfig {
    ModelParams params{1.0, 1.0, {0.0, 0.0}, 8.9, FockSpace{kDefaultCutoff}};
    AtomPrep atom = AtomPrep::excited();
    int n_atoms = 100;
    double n_bar = 5.0;
    std::vector<int> snapshots;
    QGridSpec q_grid;
    double leakage_tolerance = kLeakageTolerance;
    double tail_tolerance = kThermalTailTolerance;

    void validate() const {
        params.validate();
        atom.validate();
        if (n_atoms < 1) throw std::invalid_argument("n_atoms must be at least 1");
        if (!(n_bar >= 0.0)) throw std::invalid_argument("n_bar must be non-negative");
        for (int k : snapshots) {
            if (k < 0 || k > n_atoms) {
                throw std::invalid_argument("snapshot index " + std::to_string(k) +
                                            " outside [0, n_atoms]");
            }
        }
    }

    RunConfig with_tau(double tau) const {
        RunConfig c = *this;
        c.params.tau = tau;
        return c;
    }

    RunConfig with_eps(Complex eps) const {
        RunConfig c = *this;
        c.params.eps = eps;
        return c;
    }

    RunConfig with_cutoff(std::size_t cutoff) const {
        RunConfig c = *this;
        c.params.space = FockSpace{cutoff};
        return c;
    }
};

struct Snapshot {
    int atom_index;
    PhotonDistribution pn;
    QGrid q;
};

/// Observables after each passage; index 0 is the initial thermal field.
struct ObservableSeries {
    std::vector<double> zeta;
    std::vector<double> mean_n;
    std::vector<double> g2;        // NaN where the field is vacuum
    std::vector<double> leakage;   // leakage[0] is always 0
    std::vector<Snapshot> snapshots;
    std::optional<DensityOperator> final_state;

    std::size_t argmin_zeta() const {
        return static_cast<std::size_t>(std::min_element(zeta.begin(), zeta.end()) - zeta.begin());
    }
    double min_zeta() const { return zeta[argmin_zeta()]; }
};

namespace detail {

inline double g2_or_nan(const DensityOperator& rho) {
    try {
        return g2_zero(rho);
    } catch (const UndefinedForVacuum&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
    }
}

}  // namespace detail

/// Sends `n_atoms` identically prepared atoms through an initially thermal
/// cavity, all with the same interaction time.
inline ObservableSeries run_sequence(const RunConfig& config) {
    config.validate();
    const KrausPair kraus = kraus_pair(config.params, config.atom);
    DensityOperator rho = thermal_state(config.n_bar, config.params.space, config.tail_tolerance);

    ObservableSeries series;
    const auto count = static_cast<std::size_t>(config.n_atoms) + 1;
    series.zeta.reserve(count);
    series.mean_n.reserve(count);
    series.g2.reserve(count);
    series.leakage.reserve(count);

    std::vector<int> wanted = config.snapshots;
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
    auto next_snapshot = wanted.begin();

    auto record = [&](int index, double leak) {
        series.zeta.push_back(linear_entropy(rho));
        series.mean_n.push_back(mean_photon(rho));
        series.g2.push_back(detail::g2_or_nan(rho));
        series.leakage.push_back(leak);
        if (next_snapshot != wanted.end() && *next_snapshot == index) {
            series.snapshots.push_back({index, photon_distribution(rho), q_function(rho, config.q_grid)});
            ++next_snapshot;
        }
    };

    record(0, 0.0);
    for (int k = 1; k <= config.n_atoms; ++k) {
        try {
            auto step = apply_atom(rho, kraus, config.leakage_tolerance);
            rho = std::move(step.state);
            record(k, step.leakage);
        } catch (const LeakageExceeded& err) {
            throw LeakageExceeded(err.leakage(), static_cast<std::size_t>(k));
        }
    }
    series.final_state = std::move(rho);
    return series;
}

/// Outcome of one interaction time in a scan.
struct TauScanPoint {
    double tau = 0.0;
    double zeta_min = 1.0;
    int argmin_atom = 0;
    double min_mean_n = 0.0;
    bool feasible = false;  // energy kept and no leakage error
};

struct TauOptimum {
    double tau_star = 0.0;
    double zeta_min = 1.0;
    int argmin_atom = 0;
    bool feasible = false;  // false when every candidate was rejected
    std::vector<TauScanPoint> coarse;   // the fixed-step grid
    std::vector<TauScanPoint> refined;  // all refinement evaluations
};

/// Minimum linear entropy along one run at interaction time `tau`.
inline TauScanPoint evaluate_tau(const RunConfig& base, double tau) {
    const RunConfig config = base.with_tau(tau);
    TauScanPoint point;
    point.tau = tau;
    try {
        const KrausPair kraus = kraus_pair(config.params, config.atom);
        DensityOperator rho =
            thermal_state(config.n_bar, config.params.space, config.tail_tolerance);
        point.zeta_min = linear_entropy(rho);
        point.min_mean_n = mean_photon(rho);
        for (int k = 1; k <= config.n_atoms; ++k) {
            rho = apply_atom(rho, kraus, config.leakage_tolerance).state;
            const double z = linear_entropy(rho);
            if (z < point.zeta_min) {
                point.zeta_min = z;
                point.argmin_atom = k;
            }
            point.min_mean_n = std::min(point.min_mean_n, mean_photon(rho));
        }
        point.feasible = point.min_mean_n >= config.n_bar - kEnergyTolerance;
    } catch (const LeakageExceeded&) {
        point.feasible = false;
    }
    return point;
}

/// Number of points lo, lo+step, ... not exceeding hi.
inline std::size_t tau_grid_size(double lo, double hi, double step) {
    return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

inline std::vector<TauScanPoint> scan_tau(const RunConfig& base, double lo, double hi,
                                          double step, unsigned threads = 0) {
    const std::size_t count = tau_grid_size(lo, hi, step);
    std::vector<TauScanPoint> points(count);
    detail::parallel_for(count, threads, [&](std::size_t i) {
        points[i] = evaluate_tau(base, lo + static_cast<double>(i) * step);
    });
    return points;
}

/// Coarse grid search over [lo, hi] followed by `refine_iters` rounds of
/// tenfold refinement around the incumbent. Ties go to the shorter time.
inline TauOptimum optimize_interaction_time(const RunConfig& base, double lo, double hi,
                                            double step, int refine_iters,
                                            unsigned threads = 0) {
    if (!(lo >= 0.0) || hi < lo) throw std::invalid_argument("tau range must satisfy 0 <= lo <= hi");
    if (!(step > 0.0)) throw std::invalid_argument("tau step must be positive");
    base.validate();

    TauOptimum best;
    best.coarse = scan_tau(base, lo, hi, step, threads);

    auto better = [](const TauScanPoint& cand, const TauScanPoint& inc, bool have) {
        if (!have) return true;
        if (cand.feasible != inc.feasible) return cand.feasible;
        if (cand.zeta_min != inc.zeta_min) return cand.zeta_min < inc.zeta_min;
        return cand.tau < inc.tau;
    };

    TauScanPoint incumbent;
    bool have = false;
    auto consider = [&](const std::vector<TauScanPoint>& points) {
        for (const auto& p : points) {
            if (better(p, incumbent, have)) {
                incumbent = p;
                have = true;
            }
        }
    };
    consider(best.coarse);

    double width = step;
    for (int iter = 0; iter < refine_iters && hi > lo; ++iter) {
        const double fine = width / 10.0;
        const double from = std::max(lo, incumbent.tau - width);
        const double to = std::min(hi, incumbent.tau + width);
        auto points = scan_tau(base, from, to, fine, threads);
        consider(points);
        best.refined.insert(best.refined.end(), points.begin(), points.end());
        width = fine;
    }

    best.tau_star = incumbent.tau;
    best.zeta_min = incumbent.zeta_min;
    best.argmin_atom = incumbent.argmin_atom;
    best.feasible = incumbent.feasible;
    return best;
}

/// Reduced states of the atoms as they leave the cavity, ordered [e, g].
struct AtomExitRecord {
    std::vector<Eigen::Matrix2cd> states;
    std::vector<double> purity;
};

inline AtomExitRecord atom_exit_states(const RunConfig& config) {
    config.validate();
    const KrausPair kraus = kraus_pair(config.params, config.atom);
    DensityOperator rho = thermal_state(config.n_bar, config.params.space, config.tail_tolerance);
    AtomExitRecord record;
    record.states.reserve(static_cast<std::size_t>(config.n_atoms));
    record.purity.reserve(static_cast<std::size_t>(config.n_atoms));
    const ComplexMatrix* ops[2] = {&kraus.k_e, &kraus.k_g};
    for (int k = 1; k <= config.n_atoms; ++k) {
        ComplexMatrix applied[2] = {kraus.k_e * rho.matrix(), kraus.k_g * rho.matrix()};
        Eigen::Matrix2cd atom;
        for (int x = 0; x < 2; ++x) {
            for (int y = 0; y < 2; ++y) {
                // Tr[k_x rho k_y^dag]
                atom(x, y) = (applied[x].array() * ops[y]->conjugate().array()).sum();
            }
        }
        atom = 0.5 * (atom + atom.adjoint()).eval();
        atom /= atom.trace().real();
        record.states.push_back(atom);
        record.purity.push_back(atom.cwiseAbs2().sum());
        try {
            rho = apply_atom(rho, kraus, config.leakage_tolerance).state;
        } catch (const LeakageExceeded& err) {
            throw LeakageExceeded(err.leakage(), static_cast<std::size_t>(k));
        }
    }
    return record;
}

/// max |rho_N^{-eps}(n,n') - (-1)^{n-n'} rho_N^{+eps}(n,n')| after the full run.
inline double parity_reflection_check(const RunConfig& config) {
    RunConfig plain = config;
    plain.snapshots.clear();
    const auto plus = run_sequence(plain);
    if (config.params.eps == Complex{}) return 0.0;
    const auto minus = run_sequence(plain.with_eps(-config.params.eps));
    const ComplexMatrix& p = plus.final_state->matrix();
    const ComplexMatrix& m = minus.final_state->matrix();
    double worst = 0.0;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            const double sign = ((r - c) % 2 == 0) ? 1.0 : -1.0;
            worst = std::max(worst, std::abs(m(r, c) - sign * p(r, c)));
        }
    }
    return worst;
}

inline constexpr double kConvergenceTolerance = 1e-3;

struct ConvergenceReport {
    std::size_t base_cutoff = 0;
    std::size_t fine_cutoff = 0;
    double zeta_drift = 0.0;
    double mean_drift = 0.0;
    double rho_drift = 0.0;
    double base_max_leakage = 0.0;
    double fine_max_leakage = 0.0;
    double base_thermal_tail = 0.0;
    bool pass = true;

    std::string to_string() const;
};

inline std::string ConvergenceReport::to_string() const {
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6e", v);
        return std::string(buf);
    };
    std::string out;
    out += "base_cutoff " + std::to_string(base_cutoff) + "\n";
    out += "fine_cutoff " + std::to_string(fine_cutoff) + "\n";
    out += "zeta_drift " + fmt(zeta_drift) + "\n";
    out += "mean_n_drift " + fmt(mean_drift) + "\n";
    out += "final_rho_drift " + fmt(rho_drift) + "\n";
    out += "base_max_leakage " + fmt(base_max_leakage) + "\n";
    out += "fine_max_leakage " + fmt(fine_max_leakage) + "\n";
    out += "base_thermal_tail " + fmt(base_thermal_tail) + "\n";
    out += std::string("status ") + (pass ? "PASS" : "FAIL") + "\n";
    return out;
}

/// Reruns the sequence at twice the cutoff and compares. Both runs have the
/// tail and leakage guards lifted so that the audit itself always completes.
inline ConvergenceReport convergence_audit(const RunConfig& config) {
    RunConfig relaxed = config;
    relaxed.snapshots.clear();
    relaxed.tail_tolerance = 1.0;
    relaxed.leakage_tolerance = std::numeric_limits<double>::infinity();
    const std::size_t cutoff = config.params.space.cutoff();

    const auto coarse = run_sequence(relaxed);
    const auto fine = run_sequence(relaxed.with_cutoff(2 * cutoff));

    ConvergenceReport report;
    report.base_cutoff = cutoff;
    report.fine_cutoff = 2 * cutoff;
    for (std::size_t k = 0; k < coarse.zeta.size(); ++k) {
        report.zeta_drift = std::max(report.zeta_drift, std::abs(coarse.zeta[k] - fine.zeta[k]));
        report.mean_drift = std::max(report.mean_drift, std::abs(coarse.mean_n[k] - fine.mean_n[k]));
    }
    const auto dim = config.params.space.dim();
    report.rho_drift = (coarse.final_state->matrix() -
                        fine.final_state->matrix().topLeftCorner(dim, dim))
                           .cwiseAbs()
                           .maxCoeff();
    report.base_max_leakage = *std::max_element(coarse.leakage.begin(), coarse.leakage.end());
    report.fine_max_leakage = *std::max_element(fine.leakage.begin(), fine.leakage.end());
    const double ratio = config.n_bar / (config.n_bar + 1.0);
    report.base_thermal_tail = std::pow(ratio, static_cast<double>(cutoff));
    report.pass = report.zeta_drift <= kConvergenceTolerance;
    return report;
}

}  // namespace micromaser
