#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "micromaser/dynamics.hpp"
#include "micromaser/fock.hpp"

namespace mm = micromaser;
using mm::Complex;
using mm::ComplexMatrix;
using mm::FockSpace;

namespace {

mm::ModelParams params(double delta, double chi, Complex eps, double tau, std::size_t dim) {
    mm::ModelParams p;
    p.delta_over_lambda = delta;
    p.chi_over_lambda = chi;
    p.eps = eps;
    p.tau = tau;
    p.space = FockSpace{dim};
    return p;
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ComplexMatrix parity(Eigen::Index dim) {
    ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index n = 0; n < dim; ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
    return p;
}

// Random state with support on the lowest `support` levels.
mm::DensityOperator random_state(FockSpace space, Eigen::Index support, std::mt19937& rng) {
    std::normal_distribution<double> g;
    ComplexMatrix x = ComplexMatrix::Zero(space.dim(), space.dim());
    for (Eigen::Index r = 0; r < support; ++r)
        for (Eigen::Index c = 0; c < support; ++c) x(r, c) = Complex(g(rng), g(rng));
    ComplexMatrix rho = x * x.adjoint();
    rho /= rho.trace().real();
    return mm::DensityOperator(space, rho);
}

constexpr double kNoGuard = std::numeric_limits<double>::infinity();

}  // namespace

TEST(RabiFrequencies, ResonantVacuum) {
    const auto f = mm::rabi_frequencies(params(0.0, 0.0, 0.0, 0.0, 8));
    EXPECT_DOUBLE_EQ(f.gamma[0], std::sqrt(2.0));
    EXPECT_EQ(f.epsilon[0], 0.0);
}

TEST(RabiFrequencies, DetunedWithStarkShift) {
    const auto f = mm::rabi_frequencies(params(1.0, 1.0, 0.0, 0.0, 8));
    EXPECT_NEAR(f.gamma[0], std::sqrt(4.25), 1e-15);
    EXPECT_NEAR(f.gamma[0], 2.06155, 1e-5);
    EXPECT_NEAR(f.epsilon[2], std::sqrt(4.25), 1e-15);
}

TEST(RabiFrequencies, LowLevelsReduceToStarkTerm) {
    for (double chi : {-1.5, 0.0, 0.7}) {
        for (double delta : {-2.0, 0.3, 1.0}) {
            const auto f = mm::rabi_frequencies(params(delta, chi, 0.0, 0.0, 16));
            EXPECT_DOUBLE_EQ(f.epsilon[0], std::abs(delta / 2 - chi));
            EXPECT_DOUBLE_EQ(f.epsilon[1], std::abs(delta / 2));
            for (double g : f.gamma) EXPECT_GT(g, 0.0);
        }
    }
}

TEST(BlockUnitary, ZeroTimeIsIdentity) {
    const auto p = params(1.0, 1.0, 0.0, 0.0, 16);
    EXPECT_EQ(mm::block_unitary(p).matrix, ComplexMatrix::Identity(32, 32));
    EXPECT_LE(max_abs(mm::unitary_exponential_oracle(p).matrix - ComplexMatrix::Identity(32, 32)),
              1e-14);
}

TEST(BlockUnitary, ResonantPairEmissionFromVacuum) {
    const double tau = mm::kPi / (2.0 * std::sqrt(2.0));
    const auto u = mm::block_unitary(params(0.0, 0.0, 0.0, tau, 8));
    EXPECT_NEAR(std::abs(u.matrix(8 + 2, 0)), 1.0, 1e-15);  // <g,2|U|e,0>
    EXPECT_NEAR(std::abs(u.matrix(0, 0)), 0.0, 1e-15);
}

TEST(BlockUnitary, MatchesExponentialOracleOnRandomDraws) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> rate(-2.0, 2.0);
    std::uniform_real_distribution<double> time(0.0, 12.0);
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const auto p = params(rate(rng), rate(rng), 0.0, time(rng), 32);
        const double diff = max_abs(mm::block_unitary(p).matrix - mm::unitary_exponential_oracle(p).matrix);
        worst = std::max(worst, diff);
        EXPECT_LE(diff, 1e-10) << "delta=" << p.delta_over_lambda << " chi=" << p.chi_over_lambda
                               << " tau=" << p.tau;
    }
    RecordProperty("worst", std::to_string(worst));
}

TEST(BlockUnitary, ExactlyUnitary) {
    const auto u = mm::block_unitary(params(1.0, 1.0, 0.0, 8.9, 64));
    EXPECT_LE(u.unitarity_defect(64), 1e-13);
}

TEST(ExponentialOracle, UnitaryAndSelectionRule) {
    const auto u = mm::unitary_exponential_oracle(params(1.0, 1.0, 0.0, 8.9, 32));
    EXPECT_LE(u.unitarity_defect(32), 1e-11);
    const ComplexMatrix eg = u.eg();
    for (Eigen::Index n = 0; n < 32; ++n) {
        for (Eigen::Index m = 0; m < 32; ++m) {
            if (m != n + 2) {
                EXPECT_LE(std::abs(eg(n, m)), 1e-12) << n << "," << m;
            }
        }
    }
}

TEST(FullUnitary, NoDriveEqualsBlockUnitary) {
    const auto p = params(1.0, 1.0, 0.0, 3.3, 24);
    EXPECT_EQ(mm::full_unitary(p).matrix, mm::block_unitary(p).matrix);
}

TEST(FullUnitary, ZeroTimeIsIdentityInSafeRegion) {
    for (Complex eps : {Complex(1.0), Complex(-0.5, 1.5), Complex(2.0)}) {
        const auto p = params(1.0, 1.0, eps, 0.0, 64);
        const auto u = mm::full_unitary(p);
        const Eigen::Index safe = mm::truncation_safe_limit(eps, p.space);
        ASSERT_GT(safe, 0);
        double worst = 0.0;
        for (Eigen::Index a = 0; a < 2; ++a)
            for (Eigen::Index b = 0; b < 2; ++b) {
                const ComplexMatrix block = u.matrix.block(a * 64, b * 64, safe, safe);
                const ComplexMatrix want = a == b ? ComplexMatrix(ComplexMatrix::Identity(safe, safe))
                                                  : ComplexMatrix(ComplexMatrix::Zero(safe, safe));
                worst = std::max(worst, max_abs(block - want));
            }
        EXPECT_LE(worst, 1e-8) << eps;
    }
}

TEST(FullUnitary, LeakageConfinedToTopLevels) {
    const auto u = mm::full_unitary(params(1.0, 1.0, 1.0, 8.9, 64));
    EXPECT_LE(u.unitarity_defect(40), 1e-7);
}

TEST(KrausPair, ZeroTimeGivesScaledIdentities) {
    const mm::AtomPrep atom{std::sqrt(0.3), std::sqrt(0.7), 0.4};
    const auto k = mm::kraus_pair(params(1.0, 1.0, 0.8, 0.0, 32), atom);
    const Eigen::Index safe = mm::truncation_safe_limit(0.8, FockSpace{32});
    const ComplexMatrix id = ComplexMatrix::Identity(safe, safe);
    EXPECT_LE(max_abs(k.k_e.topLeftCorner(safe, safe) - atom.excited_amplitude() * id), 1e-10);
    EXPECT_LE(max_abs(k.k_g.topLeftCorner(safe, safe) - atom.ground_amplitude() * id), 1e-10);
}

TEST(KrausPair, CompletenessInSafeRegion) {
    const mm::AtomPrep mixed{std::sqrt(0.5), std::sqrt(0.5), mm::kPi / 2};
    for (Complex eps : {Complex(0.0), Complex(1.0), Complex(2.0, -1.0)}) {
        for (const auto& atom : {mm::AtomPrep::excited(), mm::AtomPrep::ground(), mixed}) {
            const auto p = params(1.0, 1.0, eps, 8.9, 64);
            const auto k = mm::kraus_pair(p, atom);
            EXPECT_LE(k.completeness_defect(mm::truncation_safe_limit(eps, p.space)), 1e-6) << eps;
        }
    }
}

TEST(KrausPair, ParityCovariance) {
    const auto pi = parity(48);
    const mm::AtomPrep atom{std::sqrt(0.5), std::sqrt(0.5), 0.3};
    const auto plus = mm::kraus_pair(params(1.0, 1.0, Complex(1.0, 0.5), 8.9, 48), atom);
    const auto minus = mm::kraus_pair(params(1.0, 1.0, Complex(-1.0, -0.5), 8.9, 48), atom);
    EXPECT_LE(max_abs(minus.k_e - pi * plus.k_e * pi), 1e-12);
    EXPECT_LE(max_abs(minus.k_g - pi * plus.k_g * pi), 1e-12);
}

TEST(KrausPair, RejectsUnnormalizedAtom) {
    EXPECT_THROW(mm::kraus_pair(params(1.0, 1.0, 0.0, 1.0, 8), mm::AtomPrep{0.5, 0.5, 0.0}),
                 std::invalid_argument);
}

TEST(ApplyAtom, ZeroTimeIsIdentityChannel) {
    std::mt19937 rng(3);
    const FockSpace space{24};
    const auto rho = random_state(space, 10, rng);
    const mm::AtomPrep atom{std::sqrt(0.5), std::sqrt(0.5), 1.0};
    const auto step = mm::apply_atom(rho, mm::kraus_pair(params(1.0, 1.0, 0.0, 0.0, 24), atom));
    EXPECT_LE(max_abs(step.state.matrix() - rho.matrix()), 1e-14);
    EXPECT_LE(step.leakage, 1e-14);
}

TEST(ApplyAtom, UndrivenExcitedAtomKeepsDiagonalStatesDiagonal) {
    const auto rho = mm::thermal_state(5.0, FockSpace{128});
    const auto out = mm::apply_atom(rho, mm::kraus_pair(params(1.0, 1.0, 0.0, 8.9, 128),
                                                        mm::AtomPrep::excited()));
    ComplexMatrix off = out.state.matrix();
    off.diagonal().setZero();
    EXPECT_LE(max_abs(off), 1e-12);
}

TEST(ApplyAtom, PaperParametersRenormalize) {
    const auto rho = mm::thermal_state(5.0, FockSpace{256});
    const auto step = mm::apply_atom(rho, mm::kraus_pair(params(1.0, 1.0, 1.0, 8.9, 256),
                                                         mm::AtomPrep::excited()));
    EXPECT_NEAR(step.state.trace(), 1.0, 1e-12);
    EXPECT_LE(step.leakage, 1e-6);
}

TEST(ApplyAtom, LeakageThrowsWhenCutoffTooSmall) {
    const auto rho = mm::thermal_state(1.0, FockSpace{12}, 1e-2);
    const auto k = mm::kraus_pair(params(1.0, 1.0, 2.0, 8.9, 12), mm::AtomPrep::excited());
    try {
        (void)mm::apply_atom(rho, k);
        FAIL() << "expected LeakageExceeded";
    } catch (const mm::LeakageExceeded& err) {
        EXPECT_GT(err.leakage(), mm::kLeakageTolerance);
    }
    EXPECT_NO_THROW((void)mm::apply_atom(rho, k, kNoGuard));
}

TEST(ApplyAtom, RejectsMismatchedSpaces) {
    const auto k = mm::kraus_pair(params(1.0, 1.0, 0.0, 1.0, 8), mm::AtomPrep::excited());
    EXPECT_THROW((void)mm::apply_atom(mm::DensityOperator::fock(FockSpace{9}, 0), k),
                 std::invalid_argument);
}

TEST(ApplyAtom, HermitianPositiveUnitTraceOnRandomDraws) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> eps_part(-1.5, 1.5);
    std::uniform_real_distribution<double> time(0.0, 12.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const FockSpace space{64};
    for (int draw = 0; draw < 20; ++draw) {
        const double a = std::sqrt(unit(rng));
        const mm::AtomPrep atom{a, std::sqrt(1.0 - a * a), 2.0 * mm::kPi * unit(rng)};
        const auto p = params(1.0, 1.0, Complex(eps_part(rng), eps_part(rng)), time(rng), 64);
        auto rho = random_state(space, 12, rng);
        const auto k = mm::kraus_pair(p, atom);
        for (int step = 0; step < 3; ++step) {
            const auto out = mm::apply_atom(rho, k);
            EXPECT_NEAR(out.state.trace(), 1.0, 1e-12);
            EXPECT_LE(out.state.hermiticity_defect(), 1e-12);
            EXPECT_GE(out.state.min_eigenvalue(), -1e-9);
            rho = out.state;
        }
    }
}

TEST(DarkStates, GroundAtomLeavesVacuumAndOnePhotonFixed) {
    const auto k = mm::kraus_pair(params(1.0, 1.0, 0.0, 8.9, 16), mm::AtomPrep::ground());
    for (std::size_t n : {0u, 1u}) {
        const auto rho = mm::DensityOperator::fock(FockSpace{16}, n);
        EXPECT_LE(max_abs(mm::apply_atom(rho, k).state.matrix() - rho.matrix()), 1e-15) << n;
    }
    // A two-photon state is not dark.
    const auto two = mm::DensityOperator::fock(FockSpace{16}, 2);
    EXPECT_GT(max_abs(mm::apply_atom(two, k).state.matrix() - two.matrix()), 1e-3);
}

class RecursionOracle : public ::testing::TestWithParam<std::tuple<double, double, double>> {};

TEST_P(RecursionOracle, AgreesWithKrausStep) {
    const auto [a, phi, eps] = GetParam();
    const mm::AtomPrep atom{a, std::sqrt(1.0 - a * a), phi};
    const FockSpace space{24};
    const auto p = params(1.0, 1.0, eps, 8.9, 24);
    const auto k = mm::kraus_pair(p, atom);
    // n_bar = 1 leaves a 2^-24 tail at D = 24.
    auto rho = mm::thermal_state(1.0, space, 1e-7);
    std::mt19937 rng(5);
    const auto mixed = random_state(space, 8, rng);
    for (const auto& input : {rho, mixed}) {
        const auto via_kraus = mm::apply_atom(input, k, kNoGuard).state;
        const auto via_sum = mm::recursion_oracle(input, p, atom);
        EXPECT_LE(max_abs(via_kraus.matrix() - via_sum.matrix()), 1e-9);
    }
}

INSTANTIATE_TEST_SUITE_P(
    AtomsAndDrives, RecursionOracle,
    ::testing::Combine(::testing::Values(1.0, std::sqrt(0.5)),
                       ::testing::Values(0.0, mm::kPi / 2), ::testing::Values(0.0, 0.5)));

TEST(RecursionOracle, UndrivenIsTheTwoPhotonMicromaserStep) {
    // Diagonal input, excited atom, no drive: p'(n) = |alpha_n|^2 p(n) + |beta_{n-2}|^2 n(n-1) p(n-2).
    const FockSpace space{24};
    const auto p = params(1.0, 1.0, 0.0, 2.0, 24);
    const auto rho = mm::thermal_state(1.0, space, 1e-7);
    const auto out = mm::recursion_oracle(rho, p, mm::AtomPrep::excited());
    const auto f = mm::rabi_frequencies(p);
    for (Eigen::Index n = 0; n + 2 < 24; ++n) {
        const double c = 0.5 + (n + 1.0);
        const double g = f.gamma[static_cast<std::size_t>(n)];
        double want = (std::pow(std::cos(g * 2.0), 2) + std::pow(c * std::sin(g * 2.0) / g, 2)) *
                      rho(n, n).real();
        if (n >= 2) {
            const double gm = f.gamma[static_cast<std::size_t>(n - 2)];
            want += std::pow(std::sin(gm * 2.0) / gm, 2) * n * (n - 1.0) * rho(n - 2, n - 2).real();
        }
        EXPECT_NEAR(out(n, n).real(), want, 1e-12) << n;
    }
}
