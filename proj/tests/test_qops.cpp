#include "wgmqed/qops.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <vector>

using namespace wgmqed;

namespace {

SystemParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SystemParams p;
    p.kappa_i = angular(2.0 + 10.0 * u(rng));
    p.kappa_f = angular(1.0 + 30.0 * u(rng));
    p.gamma = angular(1.0 + 5.0 * u(rng));
    p.g = angular(25.0 * u(rng));
    p.delta_al = angular(-10.0 + 20.0 * u(rng));
    p.delta_rl = angular(-10.0 + 20.0 * u(rng));
    p.drive = cplx(0.5 * u(rng), 0.5 * u(rng));
    return p;
}

// Simpson's rule, independent of the propagator's analytic integrals.
template <typename F>
Matrix simpson(F f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    Matrix acc = f(a) + f(b);
    for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return acc * (h / 3.0);
}

}  // namespace

TEST(SpaceDescriptor, RejectsTooSmallTruncation) {
    EXPECT_THROW(SpaceDescriptor(1), InvalidArgument);
    EXPECT_EQ(SpaceDescriptor(3).dim(), 8);
    EXPECT_EQ(SpaceDescriptor(3).index(2, true), 5);
}

TEST(Units, AngularFrequencyConversion) {
    EXPECT_DOUBLE_EQ(angular(1.0), 2.0 * std::numbers::pi);
    EXPECT_DOUBLE_EQ(to_mhz(angular(13.5)), 13.5);
    EXPECT_DOUBLE_EQ(ns_to_us(50.0), 0.05);
}

TEST(Operators, LadderAlgebraBelowCutoff) {
    const SpaceDescriptor space(4);
    const Operators ops = build_operators(space);
    const Matrix comm = ops.b * ops.b_dag - ops.b_dag * ops.b;
    // [b, b'] = 1 except on the top Fock level.
    for (int n = 0; n < 4; ++n)
        for (int a = 0; a < 2; ++a) EXPECT_NEAR(comm(space.index(n, a), space.index(n, a)).real(), 1.0, 1e-14);
    EXPECT_NEAR((ops.sigma_plus * ops.sigma_minus + ops.sigma_minus * ops.sigma_plus - Matrix::Identity(space.dim(), space.dim()))
                    .cwiseAbs()
                    .maxCoeff(),
                0.0, 1e-14);
}

TEST(Hamiltonian, HermitianForRandomParameters) {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 20; ++k) {
        const Matrix h = build_hamiltonian(random_params(rng), SpaceDescriptor(3));
        EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Hamiltonian, DriveMatrixElementMagnitude) {
    SystemParams p;
    p.drive = 0.3;
    const SpaceDescriptor space(3);
    const Matrix h = build_hamiltonian(p, space);
    EXPECT_NEAR(std::abs(h(space.index(0, false), space.index(1, false))), std::sqrt(2.0 * p.kappa_f) * 0.3, 1e-12);
}

TEST(Hamiltonian, VacuumRabiSplitting) {
    SystemParams p;
    p.g = angular(13.5);
    const SpaceDescriptor space(3);
    const Matrix h = build_hamiltonian(p, space);
    // Single-excitation block {|1,g>, |0,e>}.
    Eigen::Matrix2cd block;
    const int a = space.index(1, false), b = space.index(0, true);
    block << h(a, a), h(a, b), h(b, a), h(b, b);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
    EXPECT_NEAR(es.eigenvalues()(0), -p.g, 1e-9);
    EXPECT_NEAR(es.eigenvalues()(1), p.g, 1e-9);
}

TEST(Liouvillian, PreservesTrace) {
    std::mt19937_64 rng(2);
    const SpaceDescriptor space(3);
    const Eigen::RowVectorXcd tr = trace_row(Matrix::Identity(space.dim(), space.dim()));
    for (int k = 0; k < 10; ++k) {
        const SuperOperator l = build_liouvillian(random_params(rng), space);
        EXPECT_LT((tr * l.matrix).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Liouvillian, VectorizationIdentity) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    Matrix a(3, 3), x(3, 3), b(3, 3);
    for (Matrix* m : {&a, &x, &b})
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) (*m)(i, j) = cplx(n01(rng), n01(rng));
    const Matrix kron = Eigen::kroneckerProduct(Matrix(b.transpose()), a);
    EXPECT_LT((kron * vectorize(x) - vectorize(a * x * b)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SteadyState, PhysicalAndStationary) {
    std::mt19937_64 rng(4);
    const SpaceDescriptor space(3);
    for (int k = 0; k < 10; ++k) {
        const SuperOperator l = build_liouvillian(random_params(rng), space);
        const Matrix rho = steady_state(l);
        EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
        EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
        EXPECT_GT(es.eigenvalues()(0), -1e-10);
        EXPECT_LT(stationarity_residual(l, rho), 1e-9);
    }
}

TEST(SteadyState, UndrivenSystemRelaxesToVacuum) {
    SystemParams p;
    p.g = angular(10.0);
    const SpaceDescriptor space(3);
    const Matrix rho = steady_state(build_liouvillian(p, space));
    EXPECT_NEAR(rho(0, 0).real(), 1.0, 1e-12);
}

TEST(SteadyState, DegenerateWithoutDissipation) {
    SystemParams p;
    p.g = angular(10.0);
    const SpaceDescriptor space(3);
    const SuperOperator l = liouvillian_from(build_hamiltonian(p, space));
    EXPECT_THROW(steady_state(l), DegenerateSteadyState);
}

TEST(Propagation, CavityDecayMatchesExponential) {
    // <b'b>(t) = exp(-2 (kf + ki) t) for the empty resonator.
    SystemParams p;
    const SpaceDescriptor space(3);
    const Operators ops = build_operators(space);
    Matrix rho0 = Matrix::Zero(space.dim(), space.dim());
    rho0(space.index(1, false), space.index(1, false)) = 1.0;
    const SuperOperator l = build_liouvillian(p, space);
    const Propagator prop(l);
    for (double t : {0.0, 0.005, 0.02, 0.05}) {
        const double oracle = std::exp(-2.0 * p.kappa_total() * t);
        EXPECT_NEAR(expectation(ops.b_dag * ops.b, prop.evolve(rho0, t)).real(), oracle, 1e-10);
        EXPECT_NEAR(expectation(ops.b_dag * ops.b, propagate(l, rho0, t)).real(), oracle, 1e-10);
    }
}

TEST(Propagation, AtomDecayMatchesExponential) {
    SystemParams p;
    const SpaceDescriptor space(3);
    const Operators ops = build_operators(space);
    Matrix rho0 = Matrix::Zero(space.dim(), space.dim());
    rho0(space.index(0, true), space.index(0, true)) = 1.0;
    const Propagator prop(build_liouvillian(p, space));
    for (double t : {0.01, 0.05, 0.2}) {
        EXPECT_NEAR(expectation(ops.sigma_plus * ops.sigma_minus, prop.evolve(rho0, t)).real(),
                    std::exp(-2.0 * p.gamma * t), 1e-10);
    }
}

TEST(Propagation, IntegralMatchesSimpson) {
    std::mt19937_64 rng(5);
    const SpaceDescriptor space(3);
    const SystemParams p = random_params(rng);
    const Propagator prop(build_liouvillian(p, space));
    Matrix rho0 = Matrix::Zero(space.dim(), space.dim());
    rho0(2, 2) = 0.5;
    rho0(1, 1) = 0.5;
    rho0(1, 2) = rho0(2, 1) = 0.2;
    const Matrix analytic = unvectorize(prop.integrate(vectorize(rho0), 0.01, 0.05), space.dim());
    const Matrix numeric = simpson([&](double t) { return prop.evolve(rho0, t); }, 0.01, 0.05, 400);
    EXPECT_LT((analytic - numeric).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Propagation, NegativeDelayRejected) {
    const SpaceDescriptor space(2);
    const Propagator prop(build_liouvillian(SystemParams{}, space));
    EXPECT_THROW(prop.evolve(Matrix(Matrix::Identity(space.dim(), space.dim())), -1.0), InvalidArgument);
}

TEST(Correlator, CoherentDriveHasFlatG2) {
    SystemParams p;
    p.drive = 3.0;
    const SpaceDescriptor space(10);
    const Operators ops = build_operators(space);
    const SuperOperator l = build_liouvillian(p, space);
    const Matrix rho = steady_state(l);
    const double n = expectation(ops.b_dag * ops.b, rho).real();
    const std::vector<double> taus{0.0, 0.01, 0.1};
    const std::vector<cplx> g2 = two_time_correlator(l, rho, ops.b, ops.b, taus);
    for (const cplx& v : g2) EXPECT_NEAR(v.real() / (n * n), 1.0, 1e-6);
}

TEST(Correlator, RejectsNonStationaryState) {
    SystemParams p;
    p.drive = 0.05;
    const SpaceDescriptor space(3);
    const SuperOperator l = build_liouvillian(p, space);
    Matrix rho = Matrix::Zero(space.dim(), space.dim());
    rho(2, 2) = 1.0;
    const Operators ops = build_operators(space);
    const std::vector<double> taus{0.0};
    EXPECT_THROW(two_time_correlator(l, rho, ops.b, ops.b, taus), NonSteadyState);
}

TEST(Correlator, AtomAntibunchesResonanceFluorescence) {
    // A driven atom cannot emit two photons at once: <s+ s+ s- s-> = 0 at tau = 0.
    SystemParams p;
    p.g = angular(15.0);
    p.drive = 0.5;
    const SpaceDescriptor space(3);
    const Operators ops = build_operators(space);
    const SuperOperator l = build_liouvillian(p, space);
    const Matrix rho = steady_state(l);
    const std::vector<double> taus{0.0};
    const std::vector<cplx> g2 = two_time_correlator(l, rho, ops.sigma_minus, ops.sigma_minus, taus);
    EXPECT_NEAR(std::abs(g2[0]), 0.0, 1e-14);
}

TEST(Params, InconsistentDetuningsRejected) {
    SystemParams p;
    p.delta_al = angular(2.0);
    p.delta_rl = angular(1.0);
    p.delta_ar = angular(3.0);
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.delta_ar = angular(1.0);
    EXPECT_NO_THROW(p.validate());
}

TEST(Truncation, ConvergedAtWorkingPoint) {
    SystemParams p;
    p.kappa_f = 2.8 * p.kappa_i;
    p.g = angular(13.5);
    p.drive = 0.1;
    const TruncationCheck t = check_truncation(p, 3);
    EXPECT_TRUE(t.converged);
    EXPECT_LT(t.relative_change, 1e-4);
}
