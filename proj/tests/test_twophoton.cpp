#include "wgmqed/metrics.hpp"
#include "wgmqed/tomography.hpp"
#include "wgmqed/twophoton.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

using namespace wgmqed;

namespace {

SystemParams working_point() {
    SystemParams p;
    p.kappa_f = 2.8 * p.kappa_i;
    p.g_mean = angular(13.5);
    p.g_sigma = angular(4.0);
    p.g = p.g_mean;
    return p;
}

SystemParams empty_resonator() {
    SystemParams p = working_point();
    p.g = p.g_mean = p.g_sigma = 0.0;
    return p;
}

TwoPhotonOptions fixed_coupling() {
    TwoPhotonOptions o;
    o.average_coupling = false;
    return o;
}

}  // namespace

TEST(IdealStates, NormalizedWithQuarterOverlap) {
    const IdealStates s = ideal_states();
    EXPECT_NEAR(s.initial.squaredNorm(), 1.0, 1e-15);
    EXPECT_NEAR(s.final.squaredNorm(), 1.0, 1e-15);
    EXPECT_NEAR(std::norm(s.initial.dot(s.final)), 0.25, 1e-15);
}

TEST(IdealStates, FinalStateInProductBasis) {
    const Vector4 v = to_product_basis(ideal_states().final);
    const Vector4 expected(-0.5, 0.5, 0.5, 0.5);
    EXPECT_LT((v - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SymmetricSubspace, AntisymmetricWeightVanishes) {
    std::mt19937_64 rng(10);
    const Vector4 anti(0.0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0);
    for (int k = 0; k < 20; ++k) {
        const Matrix4 e = random_state(rng).embed();
        EXPECT_LT(std::abs(cplx(anti.adjoint() * e * anti)), 1e-12);
    }
}

TEST(DetectorSettings, CanonicalSetHasNineteenEntries) {
    const auto s = canonical_settings();
    EXPECT_EQ(s.size(), 19u);
    std::set<std::string> names;
    for (const auto& d : s) names.insert(d.name());
    EXPECT_EQ(names.size(), 19u);
    EXPECT_EQ(names.count("RR"), 0u);
    EXPECT_EQ(names.count("VV"), 0u);
    EXPECT_EQ(DetectorSetting::parse("L/R"), DetectorSetting(Pol::R, Pol::L));
}

TEST(DetectorSettings, InformationallyComplete) {
    const MeasurementModel m = build_measurement_model(canonical_settings(), SettingWeights::coincidence);
    EXPECT_EQ(probability_map_rank(m.projectors), 9);
}

TEST(OutputField, VerticalIsScalar) {
    const SystemParams p = working_point();
    const JonesVector in = balanced_drive(p);
    const OutputField f = output_field(Pol::V, p, in);
    EXPECT_TRUE(f.is_scalar());
    EXPECT_EQ(f.offset, in.v);
}

TEST(OutputField, HorizontalWithoutFiberCouplingIsScalar) {
    SystemParams p = working_point();
    p.kappa_f = 0.0;
    const OutputField f = output_field(Pol::H, p, JonesVector{0.3, 0.1});
    EXPECT_TRUE(f.is_scalar());
    EXPECT_EQ(f.offset, cplx(0.3, 0.0));
}

TEST(OutputField, DiagonalIsLinearCombination) {
    const SystemParams p = working_point();
    const JonesVector in = balanced_drive(p);
    const SpaceDescriptor space(3);
    const Matrix ap = output_field(Pol::P, p, in).matrix(space);
    const Matrix ah = output_field(Pol::H, p, in).matrix(space);
    const Matrix av = output_field(Pol::V, p, in).matrix(space);
    EXPECT_LT((ap - (ah + av) / std::sqrt(2.0)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DelayGrid, SymmetricAboutZero) {
    const std::vector<double> g = symmetric_delay_grid(3.0, 1.0);
    EXPECT_EQ(g, (std::vector<double>{-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0}));
    EXPECT_THROW(symmetric_delay_grid(3.0, 0.0), InvalidArgument);
}

TEST(Coincidences, EmptyResonatorIsUncorrelated) {
    const SystemParams p = empty_resonator();
    // The balanced input leaves no P light, so P settings have no normalization.
    const JonesVector balanced = balanced_drive(p);
    const JonesVector unbalanced = JonesVector{0.6, cplx(0.0, 0.8)}.scaled(default_input_amplitude);
    int defined = 0;
    for (const JonesVector& in : {balanced, unbalanced}) {
        for (const DetectorSetting& s : canonical_settings()) {
            for (double tau : {-10.0, 0.0, 3.0, 25.0}) {
                try {
                    EXPECT_NEAR(normalized_correlation_at(p, in, s, tau, fixed_coupling()), 1.0, 1e-6) << s.name();
                    ++defined;
                } catch (const UndefinedCorrelation&) {
                    EXPECT_TRUE(s.first() == Pol::P || s.second() == Pol::P);
                }
            }
        }
    }
    EXPECT_EQ(defined, 4 * (13 + 19));
}

TEST(Coincidences, WorkingPointBunchingAndAntibunching) {
    const SystemParams p = working_point();
    const JonesVector in = balanced_drive(p);
    // Signs from the full simulation: R/L and R/P antibunch, M/M and H/M bunch.
    const double rl = normalized_correlation_at(p, in, DetectorSetting::parse("RL"), 0.0);
    const double rp = normalized_correlation_at(p, in, DetectorSetting::parse("RP"), 0.0);
    const double mm = normalized_correlation_at(p, in, DetectorSetting::parse("MM"), 0.0);
    const double hm = normalized_correlation_at(p, in, DetectorSetting::parse("HM"), 0.0);
    EXPECT_LT(rl, 0.8);
    EXPECT_LT(rp, 0.8);
    EXPECT_GT(mm, 1.2);
    EXPECT_GT(hm, 1.2);
}

TEST(Coincidences, FactorizeAtLongDelay) {
    const SystemParams p = working_point();
    const JonesVector in = balanced_drive(p);
    for (const char* s : {"RL", "HM", "VH", "PP"})
        for (double tau : {-2000.0, 2000.0})
            EXPECT_NEAR(normalized_correlation_at(p, in, DetectorSetting::parse(s), tau, fixed_coupling()), 1.0, 1e-4) << s;
}

TEST(Coincidences, SwappingLabelsFlipsDelay) {
    // A strong drive makes G_HP and G_PH differ at the 1e-4 level, enough to tell them apart.
    const SystemParams p = working_point().with_coupling(angular(13.5));
    const JonesVector in = balanced_drive(p, 1.0);
    const DrivenSystem sys(p, in);
    const std::vector<double> taus{0.0, 0.002, 0.01};
    const auto hp = sys.coincidence(Pol::H, Pol::P, taus);
    const auto ph = sys.coincidence(Pol::P, Pol::H, taus);
    ASSERT_GT(std::abs(hp[1] - ph[1]) / hp[1], 1e-4);
    // Narrow bins around -tau in the table of setting HP read G_PH(tau).
    const std::vector<double> delays{-10.0, -2.0, 2.0, 10.0};
    const CoincidenceTable t = coincidence_rates(p, in, {DetectorSetting::parse("HP")}, delays, 1e-4, fixed_coupling());
    EXPECT_NEAR(t.values[0][0] / ph[2], 1.0, 1e-5);
    EXPECT_NEAR(t.values[0][1] / ph[1], 1.0, 1e-5);
    EXPECT_NEAR(t.values[0][2] / hp[1], 1.0, 1e-5);
    EXPECT_NEAR(t.values[0][3] / hp[2], 1.0, 1e-5);
}

TEST(Coincidences, RatesNonnegativeOnSharedGrid) {
    const SystemParams p = working_point();
    const JonesVector in = balanced_drive(p);
    TwoPhotonOptions o;
    o.coupling_nodes = 4;
    const CoincidenceTable t = coincidence_rates(p, in, canonical_settings(), symmetric_delay_grid(20.0, 1.0), 1.0, o);
    EXPECT_EQ(t.values.size(), 19u);
    for (const auto& row : t.values) {
        EXPECT_EQ(row.size(), 41u);
        for (double v : row) EXPECT_GE(v, 0.0);
    }
    const NormalizedTable n = normalized_correlations(t);
    EXPECT_EQ(n.table.settings.size() + n.undefined.size(), 19u);
}

TEST(Coincidences, ThreadCountDoesNotChangeResults) {
    const SystemParams p = working_point();
    const JonesVector in = balanced_drive(p);
    TwoPhotonOptions one;
    one.coupling_nodes = 6;
    TwoPhotonOptions three = one;
    three.threads = 3;
    const std::vector<double> delays{-1.0, 0.0, 1.0};
    const auto a = coincidence_rates(p, in, {DetectorSetting::parse("RL")}, delays, 1.0, one);
    const auto b = coincidence_rates(p, in, {DetectorSetting::parse("RL")}, delays, 1.0, three);
    EXPECT_EQ(a.values, b.values);
}

TEST(WindowedState, EmptyResonatorGivesOutputProductState) {
    // Without nonlinearity the reconstructed pair is the product of the output
    // polarization with itself; the balanced input makes that M x M.
    const SystemParams p = empty_resonator();
    const WindowedState w = windowed_state(p, balanced_drive(p), 3.0, 0.0, fixed_coupling());
    const Vector3 mm = twin_photon_state(unit_vector(Pol::M));
    EXPECT_GT(fidelity(w.state, mm), 0.999);
    EXPECT_NEAR(overlap_ideal(w.state), 0.25, 1e-3);
}

TEST(WindowedState, EntanglementVanishesAtLongDelay) {
    const SystemParams p = working_point();
    const WindowedState w = windowed_state(p, balanced_drive(p), 3.0, 50.0);
    EXPECT_LT(concurrence(w.state), 0.02);
}

TEST(WindowedState, ZeroDelayIsEntangled) {
    const SystemParams p = working_point();
    const WindowedState w = windowed_state(p, balanced_drive(p), 3.0, 0.0);
    const MetricsReport m = evaluate_metrics(w.state);
    EXPECT_GT(m.overlap, 0.5);
    EXPECT_GT(m.concurrence, 0.2);
    ASSERT_TRUE(m.phase.has_value());
    EXPECT_NEAR(phase_display_units(*m.phase), 1.0, 0.15);
}

TEST(WindowedState, MatchedIdealLimitReachesFinalState) {
    // Lossless resonator, narrow atom, g matched to kappa_f, short window.
    SystemParams p;
    p.kappa_i = angular(0.1);
    p.kappa_f = angular(20.0);
    p.gamma = angular(0.3);
    p.g = angular(20.0);
    TwoPhotonOptions o = fixed_coupling();
    o.n_max = 4;
    const WindowedState w = windowed_state(p, balanced_drive(p, 0.01), 0.2, 0.0, o);
    EXPECT_GT(overlap_ideal(w.state), 0.999);
}

TEST(WindowedState, RejectsEmptyWindow) {
    const SystemParams p = working_point();
    EXPECT_THROW(windowed_state(p, balanced_drive(p), 0.0, 0.0), InvalidArgument);
}

TEST(WindowSums, OnlyCompleteBinsCount) {
    CoincidenceTable t;
    t.settings = {DetectorSetting::parse("HH")};
    t.bin_width_ns = 1.0;
    t.delays_ns = {-2.0, -1.0, 0.0, 1.0, 2.0};
    t.values = {{1.0, 2.0, 4.0, 8.0, 16.0}};
    t.mode = TableMode::count;
    EXPECT_EQ(window_sums(t, 0.0, 3.0)[0], 14.0);
    EXPECT_EQ(window_sums(t, 0.0, 2.5)[0], 4.0);
    EXPECT_EQ(window_sums(t, 0.5, 2.0)[0], 12.0);
    EXPECT_THROW(window_sums(t, 0.0, 0.5), InvalidArgument);
}

TEST(CoincidenceTableInvariants, RejectsNegativeAndFractionalCounts) {
    CoincidenceTable t;
    t.settings = {DetectorSetting::parse("HV")};
    t.delays_ns = {0.0};
    t.values = {{-1.0}};
    EXPECT_THROW(t.validate(), InvalidArgument);
    t.values = {{1.5}};
    t.mode = TableMode::count;
    EXPECT_THROW(t.validate(), InvalidArgument);
    t.mode = TableMode::rate;
    EXPECT_NO_THROW(t.validate());
}

TEST(SampleClicks, ZeroRatesGiveZeroCounts) {
    CoincidenceTable t;
    t.settings = {DetectorSetting::parse("HV")};
    t.delays_ns = {0.0, 1.0};
    t.values = {{0.0, 0.0}};
    const CoincidenceTable c = sample_clicks(t, 1e6, 3);
    EXPECT_EQ(c.values[0], (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(c.mode, TableMode::count);
}

TEST(SampleClicks, DeterministicUnderSeed) {
    CoincidenceTable t;
    t.settings = {DetectorSetting::parse("HV"), DetectorSetting::parse("PM")};
    t.delays_ns = {0.0, 1.0, 2.0};
    t.values = {{1.0, 2.0, 3.0}, {0.5, 0.5, 0.5}};
    EXPECT_EQ(sample_clicks(t, 1e4, 11).values, sample_clicks(t, 1e4, 11).values);
    EXPECT_NE(sample_clicks(t, 1e4, 11).values, sample_clicks(t, 1e4, 12).values);
}

TEST(SampleClicks, PoissonStatisticsOnUniformRates) {
    CoincidenceTable t;
    t.settings = {DetectorSetting::parse("HV")};
    t.delays_ns = {0.0, 1.0, 2.0, 3.0};
    t.values = {{1.0, 1.0, 1.0, 1.0}};
    const double n = 1e6;
    const CoincidenceTable c = sample_clicks(t, n, 2024);
    const double mean = n / 4.0;
    double total = 0.0;
    for (double v : c.values[0]) {
        EXPECT_LT(std::abs(v - mean), 3.0 * std::sqrt(mean));
        EXPECT_LT(std::abs(v - mean) / mean, 0.01);
        total += v;
    }
    EXPECT_LT(std::abs(total - n), 5.0 * std::sqrt(n));
}
