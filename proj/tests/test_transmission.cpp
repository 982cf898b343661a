#include "wgmqed/transmission.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

using namespace wgmqed;

namespace {

SystemParams sweep_reference_params() {
    SystemParams p;
    p.g_mean = angular(13.5);
    p.g_sigma = angular(4.0);
    p.g = p.g_mean;
    p.delta_al = angular(2.2);
    p.delta_ar = angular(2.2);
    return p;
}

// Mean of N(mu, sigma) truncated to [0, inf).
double truncated_normal_mean(double mu, double sigma) {
    const double a = -mu / sigma;
    const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
    const double tail = 0.5 * std::erfc(a / std::sqrt(2.0));
    return mu + sigma * pdf / tail;
}

}  // namespace

TEST(EffectiveLossRate, EmptyResonatorIsIntrinsicLoss) {
    EXPECT_EQ(effective_loss_rate(0.0, angular(3.0), 0.0, angular(8.4)), cplx(angular(8.4), 0.0));
}

TEST(EffectiveLossRate, ResonantAtomWorkingValue) {
    const cplx k = effective_loss_rate(angular(13.5), angular(3.0), 0.0, angular(8.4));
    EXPECT_NEAR(to_mhz(k.real()), 69.15, 1e-9);
    EXPECT_NEAR(k.imag(), 0.0, 1e-12);
}

TEST(EffectiveLossRate, FarDetunedAtomDecouples) {
    const cplx k = effective_loss_rate(angular(13.5), angular(3.0), angular(1e7), angular(8.4));
    EXPECT_NEAR(std::abs(k - cplx(angular(8.4), 0.0)), 0.0, 1e-3);
}

TEST(EffectiveLossRate, RealPartBoundedBelowByIntrinsicLoss) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const cplx kl = effective_loss_rate(angular(20.0 * std::abs(u(rng))), angular(1.0 + std::abs(u(rng))),
                                            angular(10.0 * u(rng)), angular(8.4));
        EXPECT_GE(kl.real(), angular(8.4) - 1e-12);
    }
}

TEST(EffectiveLossRate, LosslessResonantAtomIsSingular) {
    EXPECT_THROW(effective_loss_rate(angular(13.5), 0.0, 0.0, angular(8.4)), SingularityError);
}

TEST(AmplitudeTransmission, Examples) {
    EXPECT_NEAR(std::abs(amplitude_transmission(cplx(5.0, 0.0), 5.0, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(amplitude_transmission(cplx(5.0, 0.0), 0.0, 0.0) - 1.0), 0.0, 1e-15);
    const cplx t = empty_transmission(2.8 * angular(8.4), angular(8.4), 0.0);
    EXPECT_NEAR(t.real(), -0.47368, 1e-5);
    EXPECT_NEAR(std::norm(t), 0.224, 5e-4);
}

TEST(AmplitudeTransmission, ZeroDenominatorIsSingular) {
    EXPECT_THROW(amplitude_transmission(cplx(-5.0, 0.0), 5.0, 0.0), SingularityError);
}

TEST(AmplitudeTransmission, BoundedByOneForLossyResonator) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const cplx kl(50.0 * u(rng), 50.0 * (u(rng) - 0.5));
        EXPECT_LE(std::abs(amplitude_transmission(kl, 100.0 * u(rng), 50.0 * (u(rng) - 0.5))), 1.0 + 1e-12);
    }
}

TEST(AmplitudeTransmission, OvercoupledPhaseApproachesPi) {
    const cplx t = empty_transmission(angular(1e4), angular(8.4), 0.0);
    EXPECT_NEAR(std::abs(std::arg(t)), std::numbers::pi, 1e-12);
    EXPECT_NEAR(std::abs(t), 1.0, 1e-2);
}

TEST(BalanceInput, EmptyResonatorOutputIsM) {
    for (double ratio : {0.5, 1.5, 2.8, 6.0}) {
        const double ki = angular(8.4);
        const JonesVector in = balance_input(ratio * ki, ki, angular(1.0));
        EXPECT_NEAR(in.norm2(), 1.0, 1e-12);
        SystemParams p;
        p.kappa_f = ratio * ki;
        p.delta_rl = angular(1.0);
        p.delta_al = angular(1.0);
        const TransmissionResult r = transmit(in, p, false);
        EXPECT_NEAR(std::norm(project(Pol::P, r.jones_out)), 0.0, 1e-12);
        const JonesVector out = r.jones_out.normalized();
        EXPECT_NEAR(std::norm(project(Pol::M, out)), 1.0, 1e-10);
    }
}

TEST(BalanceInput, AmplitudeRatioAtWorkingPoint) {
    const double ki = angular(8.4);
    const JonesVector in = balance_input(2.8 * ki, ki, 0.0);
    EXPECT_NEAR(std::abs(in.h / in.v), 3.8 / 1.8, 1e-9);
    EXPECT_NEAR(std::abs(in.h / in.v), 2.1111, 1e-4);
}

TEST(BalanceInput, StrongOvercouplingGivesP) {
    const double ki = angular(8.4);
    const JonesVector in = balance_input(1e6 * ki, ki, 0.0);
    EXPECT_NEAR(std::norm(project(Pol::P, in)), 1.0, 1e-5);
}

TEST(BalanceInput, CriticalCouplingIsUnbalanceable) {
    EXPECT_THROW(balance_input(angular(8.4), angular(8.4), 0.0), Unbalanceable);
}

TEST(Transmit, VerticalAlwaysUnity) {
    SystemParams p = sweep_reference_params();
    for (bool atom : {false, true}) EXPECT_EQ(transmit(JonesVector{0.6, 0.8}, p, atom).t_v, cplx(1.0, 0.0));
}

TEST(Transmit, EmptyLimitMatchesNoAtom) {
    SystemParams p = sweep_reference_params();
    p.g = 0.0;
    const JonesVector in = balance_input(p);
    const TransmissionResult a = transmit(in, p, true);
    const TransmissionResult b = transmit(in, p, false);
    EXPECT_EQ(a.t_h, b.t_h);
    EXPECT_EQ(a.p_overlap, b.p_overlap);
    EXPECT_NEAR(a.p_overlap, 0.0, 1e-12);
}

TEST(Transmit, StrongCouplingOvercoupledOutputIsP) {
    SystemParams p;
    p.kappa_f = 1e4 * p.kappa_i;
    p.g = angular(1e5);
    const TransmissionResult r = transmit(balance_input(p), p, true);
    EXPECT_GT(r.p_overlap, 0.999);
}

TEST(Transmit, SurvivalBounded) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        SystemParams p;
        p.kappa_f = (0.1 + 6.0 * u(rng)) * p.kappa_i;
        p.g = angular(30.0 * u(rng));
        p.delta_al = angular(20.0 * (u(rng) - 0.5));
        p.delta_rl = angular(20.0 * (u(rng) - 0.5));
        const TransmissionResult r = transmit(JonesVector{cplx(u(rng), u(rng)), cplx(u(rng), 0.1)}, p, true);
        EXPECT_LE(r.survival, 1.0 + 1e-12);
        EXPECT_GE(r.survival, 0.0);
        EXPECT_GE(r.p_overlap, 0.0);
        EXPECT_LE(r.p_overlap, 1.0 + 1e-12);
    }
}

TEST(AverageOverG, ZeroWidthIsPointEvaluation) {
    SystemParams p = sweep_reference_params();
    p.g_sigma = 0.0;
    const JonesVector in = balance_input(p);
    const double avg = average_over_g(p, [&](double g) { return transmit(in, p.with_coupling(g), true).p_overlap; });
    EXPECT_NEAR(avg, transmit(in, p, true).p_overlap, 1e-15);
}

TEST(AverageOverG, LinearObservableGivesTruncatedMean) {
    for (double mu : {13.5, 4.0, 0.0}) {
        SystemParams p;
        p.g_mean = angular(mu);
        p.g_sigma = angular(4.0);
        const double avg = average_over_g(p, [](double g) { return g; });
        EXPECT_NEAR(avg, truncated_normal_mean(p.g_mean, p.g_sigma), 1e-6 * p.g_sigma);
    }
}

TEST(AverageOverG, QuadratureConverged) {
    SystemParams p = sweep_reference_params();
    p.kappa_f = angular(17.0);
    const JonesVector in = balance_input(p);
    auto f = [&](double g) { return transmit(in, p.with_coupling(g), true).p_overlap; };
    EXPECT_LT(std::abs(average_over_g(p, f, 64) - average_over_g(p, f, 128)), 1e-6);
}

TEST(Sweep, EmptyRowsCarryNoPLight) {
    const std::vector<double> grid = linear_grid(0.5, 6.0, 40);
    const SweepTable t = sweep_coupling(sweep_reference_params(), grid);
    ASSERT_EQ(t.empty.size(), grid.size());
    for (const SweepRow& r : t.empty) EXPECT_NEAR(r.t2_p, 0.0, 1e-12);
}

TEST(Sweep, LargeCouplingSplitsPowerEqually) {
    const std::vector<double> grid{1e4};
    const SweepTable t = sweep_coupling(sweep_reference_params(), grid);
    EXPECT_NEAR(t.empty[0].t2_h, 0.5, 1e-3);
    EXPECT_NEAR(t.empty[0].t2_v, 0.5, 1e-3);
}

TEST(Sweep, InteriorMaximumOfPOverlap) {
    const std::vector<double> grid = linear_grid(0.5, 6.0, 200);
    const SweepTable t = sweep_coupling(sweep_reference_params(), grid);
    std::size_t peak = 0;
    for (std::size_t k = 1; k < t.atom.size(); ++k)
        if (t.atom[k].p_overlap > t.atom[peak].p_overlap) peak = k;
    EXPECT_GT(peak, 0u);
    EXPECT_LT(peak, grid.size() - 1);
    // Near kappa_f = 2 kappa_i.
    EXPECT_NEAR(grid[peak], 2.0, 0.5);
}

TEST(Sweep, EmptyResonatorSurvivalIncreasesAboveCriticalCoupling) {
    const std::vector<double> grid = linear_grid(1.05, 6.0, 100);
    const SweepTable t = sweep_coupling(sweep_reference_params(), grid);
    for (std::size_t k = 1; k < t.empty.size(); ++k) EXPECT_GT(t.empty[k].survival, t.empty[k - 1].survival);
}

TEST(Sweep, RejectsEmptyOrUnsortedGrid) {
    EXPECT_THROW(sweep_coupling(sweep_reference_params(), std::vector<double>{}), InvalidArgument);
    EXPECT_THROW(sweep_coupling(sweep_reference_params(), std::vector<double>{2.0, 1.5}), InvalidArgument);
}

TEST(Sweep, CsvHeader) {
    std::ostringstream os;
    write_sweep_csv(os, sweep_coupling(sweep_reference_params(), std::vector<double>{2.0}).atom);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "kappa_f_over_kappa_i,p_overlap,survival,t2_H,t2_V,t2_P,t2_M");
}

TEST(CouplingFit, RecoversGeneratingDistribution) {
    const SystemParams truth = sweep_reference_params();
    const std::vector<double> grid = linear_grid(0.5, 6.0, 30);
    const SweepTable data = sweep_coupling(truth, grid);
    std::vector<double> p_overlap, survival;
    for (const SweepRow& r : data.atom) {
        p_overlap.push_back(r.p_overlap);
        survival.push_back(r.survival);
    }
    SystemParams start = truth;
    start.g_mean = angular(11.0);
    start.g_sigma = angular(6.0);
    const CouplingFit fit = fit_coupling_distribution(start, grid, p_overlap, survival);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.g_mean / truth.g_mean, 1.0, 0.02);
    EXPECT_NEAR(fit.g_sigma / truth.g_sigma, 1.0, 0.02);
}
