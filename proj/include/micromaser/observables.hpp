#pragma once

// Purity, photon statistics and the Husimi Q-function of a field state.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "micromaser/fock.hpp"

namespace micromaser {

/// 1 - Tr rho^2, clamped to [0, 1].
inline double linear_entropy(const DensityOperator& rho) {
    const double purity = rho.matrix().cwiseAbs2().sum();
    return std::clamp(1.0 - purity, 0.0, 1.0);
}

inline constexpr double kEigenvalueFloor = 1e-14;

/// -sum lambda ln lambda over eigenvalues above kEigenvalueFloor.
inline double von_neumann_entropy(const DensityOperator& rho) {
    const RealVector lambdas = rho.eigenvalues();
    double s = 0.0;
    for (double l : lambdas) {
        if (l > kEigenvalueFloor) s -= l * std::log(l);
    }
    return s;
}

inline double mean_photon(const DensityOperator& rho) {
    double mean = 0.0;
    for (Eigen::Index n = 0; n < rho.dim(); ++n) {
        mean += static_cast<double>(n) * rho(n, n).real();
    }
    return mean;
}

inline constexpr double kVacuumThreshold = 1e-9;

/// <a^dag a^dag a a> / <a^dag a>^2.
inline double g2_zero(const DensityOperator& rho) {
    const double mean = mean_photon(rho);
    if (mean < kVacuumThreshold) throw UndefinedForVacuum();
    double pairs = 0.0;
    for (Eigen::Index n = 2; n < rho.dim(); ++n) {
        const double nn = static_cast<double>(n);
        pairs += nn * (nn - 1.0) * rho(n, n).real();
    }
    return pairs / (mean * mean);
}

struct PhotonDistribution {
    std::vector<double> p;

    std::size_t size() const noexcept { return p.size(); }
    double operator[](std::size_t n) const { return p[n]; }
};

inline PhotonDistribution photon_distribution(const DensityOperator& rho) {
    PhotonDistribution dist;
    dist.p.resize(static_cast<std::size_t>(rho.dim()));
    for (Eigen::Index n = 0; n < rho.dim(); ++n) {
        const double v = rho(n, n).real();
        dist.p[static_cast<std::size_t>(n)] = (v < 0.0 && v > -1e-12) ? 0.0 : v;
    }
    return dist;
}

/// Rectangular grid of coherent amplitudes beta = x + i y.
struct QGridSpec {
    double x_min = -6.0;
    double x_max = 6.0;
    double y_min = -6.0;
    double y_max = 6.0;
    int nx = 121;
    int ny = 121;

    double x(int i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1); }
    double y(int k) const { return ny == 1 ? y_min : y_min + (y_max - y_min) * k / (ny - 1); }

    double max_beta_sq() const {
        const double xm = std::max(std::abs(x_min), std::abs(x_max));
        const double ym = std::max(std::abs(y_min), std::abs(y_max));
        return xm * xm + ym * ym;
    }
};

/// Q(x, y) sampled on a QGridSpec; values(i, k) belongs to (x(i), y(k)).
struct QGrid {
    QGridSpec spec;
    Eigen::MatrixXd values;

    double integral() const {
        const double dx = spec.nx > 1 ? (spec.x_max - spec.x_min) / (spec.nx - 1) : 0.0;
        const double dy = spec.ny > 1 ? (spec.y_max - spec.y_min) / (spec.ny - 1) : 0.0;
        return values.sum() * dx * dy;
    }
};

/// <n|beta> = exp(-|beta|^2/2) beta^n / sqrt(n!), evaluated in log space.
inline ComplexVector coherent_amplitudes(Complex beta, Eigen::Index dim) {
    ComplexVector c = ComplexVector::Zero(dim);
    const double r = std::abs(beta);
    if (r == 0.0) {
        c(0) = 1.0;
        return c;
    }
    const double log_r = std::log(r);
    const double theta = std::arg(beta);
    for (Eigen::Index n = 0; n < dim; ++n) {
        const double nn = static_cast<double>(n);
        const double log_mag = -0.5 * r * r + nn * log_r - 0.5 * std::lgamma(nn + 1.0);
        c(n) = std::polar(std::exp(log_mag), nn * theta);
    }
    return c;
}

/// Husimi Q-function (1/pi) <beta|rho|beta>.
inline QGrid q_function(const DensityOperator& rho, const QGridSpec& spec = {}) {
    if (spec.nx < 1 || spec.ny < 1) {
        throw std::invalid_argument("Q grid needs at least one point per axis");
    }
    if (spec.max_beta_sq() > 0.5 * static_cast<double>(rho.dim())) {
        throw GridOutsideTruncation(spec.max_beta_sq(), rho.space().cutoff());
    }
    QGrid grid{spec, Eigen::MatrixXd(spec.nx, spec.ny)};
    ComplexMatrix columns(rho.dim(), spec.ny);
    for (int i = 0; i < spec.nx; ++i) {
        // One row of grid points at a time so the rho product is a single GEMM.
        for (int k = 0; k < spec.ny; ++k) {
            columns.col(k) = coherent_amplitudes({spec.x(i), spec.y(k)}, rho.dim());
        }
        const ComplexMatrix applied = rho.matrix() * columns;
        for (int k = 0; k < spec.ny; ++k) {
            const double q = columns.col(k).dot(applied.col(k)).real() / kPi;
            grid.values(i, k) = std::max(q, 0.0);
        }
    }
    return grid;
}

}  // namespace micromaser
