#pragma once

// Driven two-photon Jaynes-Cummings evolution and the one-atom field channel.
//
// Joint atom-field matrices are ordered atom-major: rows/columns [0, D) hold
// |e> (x) field, rows/columns [D, 2D) hold |g> (x) field.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "micromaser/fock.hpp"

namespace micromaser {

/// Dimensionless model configuration; rates are in units of the two-photon
/// coupling and `tau` is the coupling times the interaction time.
struct ModelParams {
    double chi_over_lambda = 1.0;
    double delta_over_lambda = 1.0;
    Complex eps{0.0, 0.0};
    double tau = 0.0;
    FockSpace space{64};

    void validate() const {
        if (!std::isfinite(chi_over_lambda) || !std::isfinite(delta_over_lambda) ||
            !std::isfinite(eps.real()) || !std::isfinite(eps.imag()) || !std::isfinite(tau)) {
            throw std::invalid_argument("model parameters must be finite");
        }
        if (tau < 0.0) {
            throw std::invalid_argument("interaction time must be non-negative");
        }
    }

    /// Detuning term Delta/(2 lambda) of the generator.
    double half_detuning() const noexcept { return 0.5 * delta_over_lambda; }
};

/// Injected atom b|g> + a e^{i phi}|e>.
struct AtomPrep {
    double a = 1.0;
    double b = 0.0;
    double phi = 0.0;

    static AtomPrep excited() { return {1.0, 0.0, 0.0}; }
    static AtomPrep ground() { return {0.0, 1.0, 0.0}; }

    void validate() const {
        if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0 || !std::isfinite(phi)) {
            throw std::invalid_argument("atomic amplitudes must lie in [0, 1]");
        }
        if (std::abs(a * a + b * b - 1.0) > 1e-12) {
            throw std::invalid_argument("atomic state is not normalized");
        }
    }

    Complex excited_amplitude() const { return std::polar(a, phi); }
    Complex ground_amplitude() const { return b; }
};

/// 2D x 2D joint evolution operator.
struct AtomFieldUnitary {
    FockSpace space;
    ComplexMatrix matrix;

    auto ee() const { return matrix.topLeftCorner(space.dim(), space.dim()); }
    auto eg() const { return matrix.topRightCorner(space.dim(), space.dim()); }
    auto ge() const { return matrix.bottomLeftCorner(space.dim(), space.dim()); }
    auto gg() const { return matrix.bottomRightCorner(space.dim(), space.dim()); }

    double unitarity_defect(Eigen::Index limit) const {
        const ComplexMatrix product = matrix.adjoint() * matrix;
        return restricted_identity_defect(product, limit);
    }

    /// Max |U^dag U - 1| over field indices < limit in both atomic sectors.
    static double restricted_identity_defect(const ComplexMatrix& product, Eigen::Index limit) {
        const Eigen::Index dim = product.rows() / 2;
        limit = std::min(limit, dim);
        double worst = 0.0;
        for (Eigen::Index ra = 0; ra < 2; ++ra) {
            for (Eigen::Index ca = 0; ca < 2; ++ca) {
                for (Eigen::Index r = 0; r < limit; ++r) {
                    for (Eigen::Index c = 0; c < limit; ++c) {
                        const Complex expected = (ra == ca && r == c) ? 1.0 : 0.0;
                        worst = std::max(worst,
                                         std::abs(product(ra * dim + r, ca * dim + c) - expected));
                    }
                }
            }
        }
        return worst;
    }
};

/// Generalized Rabi frequencies of the |e,n> <-> |g,n+2> blocks (gamma) and
/// of the |e,n-2> <-> |g,n> blocks seen from the ground level (epsilon).
struct RabiFrequencies {
    std::vector<double> gamma;
    std::vector<double> epsilon;
};

inline RabiFrequencies rabi_frequencies(const ModelParams& params) {
    const auto dim = params.space.cutoff();
    const double half_det = params.half_detuning();
    const double chi = params.chi_over_lambda;
    RabiFrequencies freqs;
    freqs.gamma.resize(dim);
    freqs.epsilon.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const double n = static_cast<double>(i);
        freqs.gamma[i] = std::hypot(half_det + chi * (n + 1.0), std::sqrt((n + 1.0) * (n + 2.0)));
        freqs.epsilon[i] = std::hypot(half_det + chi * (n - 1.0), std::sqrt(n * (n - 1.0)));
    }
    return freqs;
}

namespace detail {

/// sin(w t)/w with the w -> 0 limit.
inline double sin_over(double w, double t) {
    return w > 0.0 ? std::sin(w * t) / w : t;
}

}  // namespace detail

/// Dimensionless generator (Delta/2l) s_z + (chi/l) a^dag a s_z + a^dag^2 s_- + a^2 s_+
/// on the truncated joint space.
inline ComplexMatrix tpjc_generator(const ModelParams& params) {
    const Eigen::Index dim = params.space.dim();
    const ComplexMatrix a = annihilation(params.space);
    const ComplexMatrix a2 = a * a;
    ComplexMatrix gen = ComplexMatrix::Zero(2 * dim, 2 * dim);
    for (Eigen::Index n = 0; n < dim; ++n) {
        const double stark = params.half_detuning() + params.chi_over_lambda * static_cast<double>(n);
        gen(n, n) = stark;
        gen(dim + n, dim + n) = -stark;
    }
    gen.topRightCorner(dim, dim) = a2;               // s_+ a^2 : |g,n+2> -> |e,n>
    gen.bottomLeftCorner(dim, dim) = a2.adjoint();   // s_- a^dag^2 : |e,n> -> |g,n+2>
    return gen;
}

/// exp(-i tau G) assembled from closed-form 2x2 rotations of each
/// {|e,n>, |g,n+2>} block. |e,D-2>, |e,D-1>, |g,0>, |g,1> only pick up phases.
inline AtomFieldUnitary block_unitary(const ModelParams& params) {
    params.validate();
    const Eigen::Index dim = params.space.dim();
    const double tau = params.tau;
    const double half_det = params.half_detuning();
    const double chi = params.chi_over_lambda;
    const auto freqs = rabi_frequencies(params);

    ComplexMatrix u = ComplexMatrix::Zero(2 * dim, 2 * dim);
    const Complex common_phase = std::polar(1.0, chi * tau);
    const Complex i_unit(0.0, 1.0);

    for (Eigen::Index n = 0; n + 2 < dim; ++n) {
        const double nn = static_cast<double>(n);
        const double centre = half_det + chi * (nn + 1.0);
        const double coupling = std::sqrt((nn + 1.0) * (nn + 2.0));
        const double gamma = freqs.gamma[static_cast<std::size_t>(n)];
        const double c = std::cos(gamma * tau);
        const double s = detail::sin_over(gamma, tau);
        const Eigen::Index e_idx = n;
        const Eigen::Index g_idx = dim + n + 2;
        u(e_idx, e_idx) = common_phase * (c - i_unit * centre * s);
        u(g_idx, g_idx) = common_phase * (c + i_unit * centre * s);
        u(e_idx, g_idx) = common_phase * (-i_unit * coupling * s);
        u(g_idx, e_idx) = u(e_idx, g_idx);
    }
    for (Eigen::Index n = std::max<Eigen::Index>(dim - 2, 0); n < dim; ++n) {
        u(n, n) = std::polar(1.0, -tau * (half_det + chi * static_cast<double>(n)));
    }
    for (Eigen::Index n = 0; n < 2; ++n) {
        u(dim + n, dim + n) = std::polar(1.0, tau * (half_det + chi * static_cast<double>(n)));
    }
    return {params.space, std::move(u)};
}

/// exp(-i tau G) by eigendecomposition of the Hermitian generator.
inline AtomFieldUnitary unitary_exponential_oracle(const ModelParams& params) {
    params.validate();
    return {params.space, unitary_from_hermitian(tpjc_generator(params), params.tau)};
}

/// D(eps)^dag U_tp D(eps) with the displacement acting on the field only.
inline AtomFieldUnitary full_unitary(const ModelParams& params) {
    AtomFieldUnitary tp = block_unitary(params);
    if (params.eps == Complex{}) return tp;
    const Eigen::Index dim = params.space.dim();
    const DisplacementMatrix displacement = displacement_matrix(params.eps, params.space);
    const ComplexMatrix& disp = displacement.matrix();
    const ComplexMatrix disp_adj = disp.adjoint();
    ComplexMatrix out(2 * dim, 2 * dim);
    for (Eigen::Index r = 0; r < 2; ++r) {
        for (Eigen::Index c = 0; c < 2; ++c) {
            out.block(r * dim, c * dim, dim, dim).noalias() =
                disp_adj * tp.matrix.block(r * dim, c * dim, dim, dim) * disp;
        }
    }
    return {params.space, std::move(out)};
}

/// Field operators of one atom passage, traced over the exit atom:
/// rho -> k_e rho k_e^dag + k_g rho k_g^dag.
struct KrausPair {
    FockSpace space;
    ComplexMatrix k_e;
    ComplexMatrix k_g;

    /// Largest entry of |k_e^dag k_e + k_g^dag k_g - 1| over indices < limit.
    double completeness_defect(Eigen::Index limit) const {
        const ComplexMatrix sum = k_e.adjoint() * k_e + k_g.adjoint() * k_g;
        limit = std::min(limit, sum.rows());
        return (sum.topLeftCorner(limit, limit) - ComplexMatrix::Identity(limit, limit))
            .cwiseAbs()
            .maxCoeff();
    }
};

/// Number of low field levels on which the truncated displacement for
/// amplitude `eps` behaves unitarily. D(eps)|n> spreads over about
/// |eps| sqrt(2n+1) levels around n + |eps|^2, so the admitted n satisfy
/// n + |eps|^2 + 5 |eps| sqrt(n+1) + 8 <= D.
inline Eigen::Index truncation_safe_limit(Complex eps, FockSpace space) {
    const double r = std::abs(eps);
    const double dim = static_cast<double>(space.dim());
    if (r == 0.0) return space.dim();
    Eigen::Index limit = 0;
    while (limit < space.dim()) {
        const double n = static_cast<double>(limit);
        if (n + r * r + 5.0 * r * std::sqrt(n + 1.0) + 8.0 > dim) break;
        ++limit;
    }
    return limit;
}

inline KrausPair kraus_pair(const ModelParams& params, const AtomPrep& atom) {
    atom.validate();
    // Contract the atomic index before displacing: D^dag (a U_e. + b U_.g) D.
    const AtomFieldUnitary u = block_unitary(params);
    const Complex ae = atom.excited_amplitude();
    const Complex ag = atom.ground_amplitude();
    ComplexMatrix k_e = ae * u.ee() + ag * u.eg();
    ComplexMatrix k_g = ae * u.ge() + ag * u.gg();
    if (params.eps != Complex{}) {
        const DisplacementMatrix displacement = displacement_matrix(params.eps, params.space);
        const ComplexMatrix& disp = displacement.matrix();
        k_e = (disp.adjoint() * k_e * disp).eval();
        k_g = (disp.adjoint() * k_g * disp).eval();
    }
    return {params.space, std::move(k_e), std::move(k_g)};
}

inline constexpr double kLeakageTolerance = 1e-4;

/// Channel output together with the probability lost through the cutoff.
struct ChannelStep {
    DensityOperator state;
    double leakage;  // |Tr rho' - 1| before renormalization
};

/// One atom passage. Throws LeakageExceeded if the pre-normalization trace
/// deviates from one by more than `leakage_tolerance`.
inline ChannelStep apply_atom(const DensityOperator& rho, const KrausPair& kraus,
                              double leakage_tolerance = kLeakageTolerance) {
    if (!(rho.space() == kraus.space)) {
        throw std::invalid_argument("Kraus pair and density operator live on different spaces");
    }
    ComplexMatrix out = kraus.k_e * rho.matrix() * kraus.k_e.adjoint();
    out.noalias() += kraus.k_g * rho.matrix() * kraus.k_g.adjoint();
    const double trace_before = out.trace().real();
    const double leakage = std::abs(trace_before - 1.0);
    if (leakage > leakage_tolerance) {
        throw LeakageExceeded(leakage);
    }
    ComplexMatrix herm = 0.5 * (out + out.adjoint());
    herm /= herm.trace().real();
    return {DensityOperator(rho.space(), std::move(herm)), leakage};
}

/// Field update written out as the explicit eight-term sum over displaced
/// Fock amplitudes e_{j,n} = <j|D(eps)|n>, cross-check for the Kraus route.
///
/// The input is displaced, each of the eight atomic branch products is
/// accumulated term by term with its scalar coefficient and ladder factor,
/// and the result is displaced back. O(D^4); meant for small cutoffs.
/// The output is renormalized to unit trace like apply_atom.
inline DensityOperator recursion_oracle(const DensityOperator& rho_prev, const ModelParams& params,
                                        const AtomPrep& atom) {
    params.validate();
    atom.validate();
    const int dim = static_cast<int>(params.space.dim());
    const double tau = params.tau;
    const double half_det = params.half_detuning();
    const double chi = params.chi_over_lambda;
    const Complex i_unit(0.0, 1.0);

    // Coefficients with the common phase exp(i chi tau) removed.
    std::vector<Complex> alpha_gamma(dim), alpha_eps(dim), beta_gamma(dim), beta_eps(dim);
    for (int j = 0; j < dim; ++j) {
        const double n = j;
        const double cg = half_det + chi * (n + 1.0);
        const double gamma = std::sqrt(cg * cg + (n + 1.0) * (n + 2.0));
        const double ce = half_det + chi * (n - 1.0);
        const double eps_n = std::sqrt(ce * ce + n * (n - 1.0));
        if (j + 2 < dim) {
            alpha_gamma[j] = std::cos(gamma * tau) - i_unit * cg * detail::sin_over(gamma, tau);
            beta_gamma[j] = -i_unit * detail::sin_over(gamma, tau);
        } else {
            alpha_gamma[j] = std::polar(1.0, -tau * cg);
            beta_gamma[j] = 0.0;
        }
        alpha_eps[j] = std::cos(eps_n * tau) + i_unit * ce * detail::sin_over(eps_n, tau);
        beta_eps[j] = -i_unit * detail::sin_over(eps_n, tau);
    }
    auto raise = [](int j) { return std::sqrt((j + 1.0) * (j + 2.0)); };
    auto lower = [](int j) { return std::sqrt(j * (j - 1.0)); };

    std::vector<std::vector<Complex>> e(dim, std::vector<Complex>(dim));
    for (int j = 0; j < dim; ++j)
        for (int n = 0; n < dim; ++n)
            e[j][n] = params.eps == Complex{} ? Complex(j == n ? 1.0 : 0.0)
                                              : displacement_element(params.eps, j, n);

    using Grid = std::vector<std::vector<Complex>>;
    auto zero_grid = [dim] { return Grid(dim, std::vector<Complex>(dim)); };

    // rho~(j,j') = sum_{m,m'} e_{j,m} rho(m,m') e*_{j',m'}, done one index at a time.
    Grid half = zero_grid();
    for (int j = 0; j < dim; ++j)
        for (int mp = 0; mp < dim; ++mp) {
            Complex acc = 0.0;
            for (int m = 0; m < dim; ++m) acc += e[j][m] * rho_prev(m, mp);
            half[j][mp] = acc;
        }
    Grid displaced = zero_grid();
    for (int j = 0; j < dim; ++j)
        for (int jp = 0; jp < dim; ++jp) {
            Complex acc = 0.0;
            for (int mp = 0; mp < dim; ++mp) acc += half[j][mp] * std::conj(e[jp][mp]);
            displaced[j][jp] = acc;
        }

    const double a = atom.a;
    const double b = atom.b;
    const Complex ph = std::polar(1.0, atom.phi);
    Grid sigma = zero_grid();
    for (int j = 0; j < dim; ++j) {
        for (int jp = 0; jp < dim; ++jp) {
            const Complex r = displaced[j][jp];
            if (r == Complex{}) continue;
            // excited branch, no exchange
            sigma[j][jp] += a * a * alpha_gamma[j] * std::conj(alpha_gamma[jp]) * r;
            // ground branch, no exchange
            sigma[j][jp] += b * b * alpha_eps[j] * std::conj(alpha_eps[jp]) * r;
            // excited atom emits a photon pair
            if (j + 2 < dim && jp + 2 < dim)
                sigma[j + 2][jp + 2] += a * a * beta_gamma[j] * std::conj(beta_gamma[jp]) *
                                        raise(j) * raise(jp) * r;
            // ground atom absorbs a photon pair
            if (j >= 2 && jp >= 2)
                sigma[j - 2][jp - 2] += b * b * beta_eps[j] * std::conj(beta_eps[jp]) *
                                        lower(j) * lower(jp) * r;
            // coherences between the branches of one exit level
            if (jp >= 2)
                sigma[j][jp - 2] += a * b * ph * alpha_gamma[j] * std::conj(beta_eps[jp]) *
                                    lower(jp) * r;
            if (j >= 2)
                sigma[j - 2][jp] += a * b * std::conj(ph) * beta_eps[j] * lower(j) *
                                    std::conj(alpha_gamma[jp]) * r;
            if (j + 2 < dim)
                sigma[j + 2][jp] += a * b * ph * beta_gamma[j] * raise(j) *
                                    std::conj(alpha_eps[jp]) * r;
            if (jp + 2 < dim)
                sigma[j][jp + 2] += a * b * std::conj(ph) * alpha_eps[j] *
                                    std::conj(beta_gamma[jp]) * raise(jp) * r;
        }
    }

    // rho'(n,n') = sum_{j,j'} e*_{j,n} sigma(j,j') e_{j',n'}
    for (int j = 0; j < dim; ++j)
        for (int np = 0; np < dim; ++np) {
            Complex acc = 0.0;
            for (int jp = 0; jp < dim; ++jp) acc += sigma[j][jp] * e[jp][np];
            half[j][np] = acc;
        }
    ComplexMatrix out(dim, dim);
    for (int n = 0; n < dim; ++n)
        for (int np = 0; np < dim; ++np) {
            Complex acc = 0.0;
            for (int j = 0; j < dim; ++j) acc += std::conj(e[j][n]) * half[j][np];
            out(n, np) = acc;
        }
    out = 0.5 * (out + out.adjoint()).eval();
    out /= out.trace().real();
    return DensityOperator(params.space, std::move(out));
}

}  // namespace micromaser
