#pragma once

// Truncated Fock-space machinery: density operators, thermal states,
// associated Laguerre polynomials and displacement matrices.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

#include "micromaser/errors.hpp"

namespace micromaser {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Number of retained Fock levels |0>..|D-1>.
class FockSpace {
public:
    explicit FockSpace(std::size_t cutoff) : cutoff_(cutoff) {
        if (cutoff_ < 4) {
            throw std::invalid_argument("Fock cutoff must be at least 4");
        }
    }

    std::size_t cutoff() const noexcept { return cutoff_; }
    Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(cutoff_); }

    friend bool operator==(const FockSpace&, const FockSpace&) = default;

private:
    std::size_t cutoff_;
};

/// Field density matrix on a truncated Fock space.
///
/// The class does not enforce Hermiticity or positivity on construction;
/// producers in this library guarantee them and the diagnostics below make
/// them checkable.
class DensityOperator {
public:
    DensityOperator(FockSpace space, ComplexMatrix matrix)
        : space_(space), matrix_(std::move(matrix)) {
        if (matrix_.rows() != space_.dim() || matrix_.cols() != space_.dim()) {
            throw std::invalid_argument("density matrix shape does not match Fock space");
        }
    }

    const FockSpace& space() const noexcept { return space_; }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    Eigen::Index dim() const noexcept { return space_.dim(); }

    Complex operator()(Eigen::Index n, Eigen::Index m) const { return matrix_(n, m); }

    double trace() const { return matrix_.trace().real(); }

    double hermiticity_defect() const {
        return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
    }

    RealVector eigenvalues() const {
        const ComplexMatrix herm = 0.5 * (matrix_ + matrix_.adjoint());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::EigenvaluesOnly);
        return solver.eigenvalues();
    }

    double min_eigenvalue() const { return eigenvalues().minCoeff(); }

    /// Pure state |psi><psi| (psi is normalized here).
    static DensityOperator pure(FockSpace space, const ComplexVector& psi) {
        const ComplexVector v = psi.normalized();
        return DensityOperator(space, v * v.adjoint());
    }

    static DensityOperator fock(FockSpace space, std::size_t n) {
        ComplexMatrix m = ComplexMatrix::Zero(space.dim(), space.dim());
        m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = 1.0;
        return DensityOperator(space, std::move(m));
    }

    /// Diagonal state with the given populations, renormalized to unit trace.
    static DensityOperator diagonal(FockSpace space, const RealVector& populations) {
        if (populations.size() != space.dim()) {
            throw std::invalid_argument("population vector length does not match Fock space");
        }
        ComplexMatrix m = ComplexMatrix::Zero(space.dim(), space.dim());
        m.diagonal() = (populations / populations.sum()).cast<Complex>();
        return DensityOperator(space, std::move(m));
    }

private:
    FockSpace space_;
    ComplexMatrix matrix_;
};

inline constexpr double kThermalTailTolerance = 1e-10;

/// Thermal field with mean photon number `n_bar`, renormalized over the
/// retained levels. Throws CutoffTooSmall when the discarded geometric tail
/// (n_bar/(n_bar+1))^D exceeds `tail_tolerance`.
inline DensityOperator thermal_state(double n_bar, FockSpace space,
                                     double tail_tolerance = kThermalTailTolerance) {
    if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) {
        throw std::invalid_argument("thermal mean photon number must be finite and >= 0");
    }
    const double ratio = n_bar / (n_bar + 1.0);
    const double tail = std::pow(ratio, static_cast<double>(space.cutoff()));
    if (tail > tail_tolerance) {
        throw CutoffTooSmall(space.cutoff(), tail);
    }
    RealVector p(space.dim());
    double weight = 1.0 / (n_bar + 1.0);
    for (Eigen::Index n = 0; n < space.dim(); ++n) {
        p(n) = weight;
        weight *= ratio;
    }
    return DensityOperator::diagonal(space, p);
}

/// Associated Laguerre polynomial L_n^k(x) by upward recurrence in n.
/// Valid for any integer k >= -n.
inline double laguerre_assoc(unsigned n, int k, double x) {
    double prev = 1.0;
    if (n == 0) return prev;
    double curr = 1.0 + k - x;
    for (unsigned i = 1; i < n; ++i) {
        const double m = i;
        const double next = ((2.0 * m + 1.0 + k - x) * curr - (m + k) * prev) / (m + 1.0);
        prev = curr;
        curr = next;
    }
    return curr;
}

/// <j|D(eps)|n> for the infinite-dimensional displacement operator.
inline Complex displacement_element(Complex eps, unsigned j, unsigned n) {
    const double x = std::norm(eps);
    const unsigned lo = std::min(j, n);
    const unsigned hi = std::max(j, n);
    const unsigned k = hi - lo;
    if (k > 0 && x == 0.0) return 0.0;
    // eps^(j-n) sqrt(n!/j!) for j >= n; (-eps*)^(n-j) sqrt(j!/n!) otherwise.
    const Complex base = j >= n ? eps : -std::conj(eps);
    const double log_mag = -0.5 * x + 0.5 * k * std::log(x > 0.0 ? x : 1.0) +
                           0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0));
    const double phase = k * std::arg(base);
    return std::polar(std::exp(log_mag), phase) * laguerre_assoc(lo, static_cast<int>(k), x);
}

/// Matrix of <j|D(eps)|n> restricted to the retained levels.
///
/// Near the cutoff the restriction is not unitary; see column_norm_defect().
class DisplacementMatrix {
public:
    DisplacementMatrix(Complex eps, FockSpace space)
        : eps_(eps), space_(space), matrix_(space.dim(), space.dim()) {
        const auto dim = space.dim();
        if (eps == Complex{}) {
            matrix_.setIdentity();
            return;
        }
        for (Eigen::Index n = 0; n < dim; ++n) {
            for (Eigen::Index j = 0; j < dim; ++j) {
                matrix_(j, n) = displacement_element(eps, static_cast<unsigned>(j),
                                                     static_cast<unsigned>(n));
            }
        }
    }

    Complex amplitude() const noexcept { return eps_; }
    const FockSpace& space() const noexcept { return space_; }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }

    /// Largest |1 - ||column n||| over columns n < limit.
    double column_norm_defect(Eigen::Index limit) const {
        double worst = 0.0;
        limit = std::min(limit, matrix_.cols());
        for (Eigen::Index n = 0; n < limit; ++n) {
            worst = std::max(worst, std::abs(1.0 - matrix_.col(n).norm()));
        }
        return worst;
    }

private:
    Complex eps_;
    FockSpace space_;
    ComplexMatrix matrix_;
};

inline DisplacementMatrix displacement_matrix(Complex eps, FockSpace space) {
    return DisplacementMatrix(eps, space);
}

/// Truncated annihilation operator.
inline ComplexMatrix annihilation(FockSpace space) {
    ComplexMatrix a = ComplexMatrix::Zero(space.dim(), space.dim());
    for (Eigen::Index n = 1; n < space.dim(); ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

/// exp(-i H) for Hermitian H via eigendecomposition.
inline ComplexMatrix unitary_from_hermitian(const ComplexMatrix& hermitian, double time = 1.0) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian);
    const ComplexVector phases =
        (-Complex(0.0, time) * solver.eigenvalues().cast<Complex>()).array().exp().matrix();
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

/// exp(eps a^dag - eps* a) built from truncated ladder matrices. Test oracle
/// for displacement_matrix; differs from it only near the cutoff.
inline ComplexMatrix displacement_exponential_oracle(Complex eps, FockSpace space) {
    const ComplexMatrix a = annihilation(space);
    // eps a^dag - eps* a = -i H with H = i (eps a^dag - eps* a) Hermitian.
    const ComplexMatrix generator = eps * a.adjoint() - std::conj(eps) * a;
    const ComplexMatrix hermitian = Complex(0.0, 1.0) * generator;
    return unitary_from_hermitian(hermitian);
}

}  // namespace micromaser
