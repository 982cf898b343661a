#ifndef WGMQED_TWOPHOTON_HPP
#define WGMQED_TWOPHOTON_HPP

// Two-photon output statistics of the driven atom-resonator system.
//
// Output fields: A_u = u_H* (alpha_H - sqrt(2 kf) b) + u_V* alpha_V.
// Coincidences of an ordered detector pair (i clicks at 0, j at tau >= 0):
//     G_ij(tau) = Tr[A_j'A_j exp(L tau)(A_i rho_ss A_i')].
// A table row for the unordered setting {i, j} (i <= j in label order) uses
// signed delays tau = t_j - t_i, so negative delays read G_ji(|tau|).
// Rates are averaged over the atom-resonator coupling distribution.

#include "wgmqed/errors.hpp"
#include "wgmqed/parallel.hpp"
#include "wgmqed/polarization.hpp"
#include "wgmqed/qops.hpp"
#include "wgmqed/quadrature.hpp"
#include "wgmqed/states.hpp"
#include "wgmqed/tomography.hpp"
#include "wgmqed/transmission.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wgmqed {

/// Input amplitude (sqrt(photons/us)) used unless configured; deep in the weak-drive regime.
inline constexpr double default_input_amplitude = 0.1;
inline constexpr int default_two_photon_coupling_nodes = 16;

/// Balanced input polarization with total amplitude `amplitude`.
inline JonesVector balanced_drive(const SystemParams& params, double amplitude = default_input_amplitude) {
    return balance_input(params).scaled(amplitude);
}

/// Output field operator A = offset * 1 + cavity * b.
struct OutputField {
    cplx offset{0.0, 0.0};
    cplx cavity{0.0, 0.0};

    bool is_scalar() const noexcept { return cavity == cplx{0.0, 0.0}; }

    Matrix matrix(const SpaceDescriptor& space) const {
        const Operators ops = build_operators(space);
        return offset * Matrix::Identity(space.dim(), space.dim()) + cavity * ops.b;
    }
};

inline OutputField output_field(Pol label, const SystemParams& params, const JonesVector& input) {
    const JonesVector u = unit_vector(label);
    OutputField f;
    f.offset = std::conj(u.h) * input.h + std::conj(u.v) * input.v;
    f.cavity = -std::conj(u.h) * std::sqrt(2.0 * params.kappa_f);
    return f;
}

struct TwoPhotonOptions {
    int n_max = default_n_max;
    /// Average over the truncated normal (g_mean, g_sigma); otherwise use params.g.
    bool average_coupling = true;
    int coupling_nodes = default_two_photon_coupling_nodes;
    int threads = 1;
};

/// Coupling values and weights the two-photon rates are averaged over.
inline QuadratureRule two_photon_couplings(const SystemParams& params, const TwoPhotonOptions& opt) {
    if (!opt.average_coupling) return {{params.g}, {1.0}};
    return truncated_normal_rule(params.g_mean, params.g_sigma, opt.coupling_nodes);
}

/// Steady state and propagator of the system at one coupling value, with all output fields.
class DrivenSystem {
public:
    DrivenSystem(const SystemParams& params, const JonesVector& input, int n_max = default_n_max)
        : space_(n_max), params_(params.with_drive(input.h)), input_(input) {
        params_.validate();
        SuperOperator l = build_liouvillian(params_, space_);
        rho_ = wgmqed::steady_state(l);
        prop_.emplace(std::move(l));
        for (Pol p : all_pols) fields_[static_cast<int>(p)] = output_field(p, params_, input_).matrix(space_);
    }

    const SpaceDescriptor& space() const noexcept { return space_; }
    const SystemParams& params() const noexcept { return params_; }
    const Matrix& steady_state() const noexcept { return rho_; }
    const Propagator& propagator() const noexcept { return *prop_; }
    const Matrix& field(Pol p) const { return fields_[static_cast<int>(p)]; }

    /// <A_p' A_p>, photons/us.
    double singles_rate(Pol p) const { return expectation(field(p).adjoint() * field(p), rho_).real(); }

    /// G_ij(tau) at each tau >= 0 (us).
    std::vector<double> coincidence(Pol first, Pol second, std::span<const double> taus_us) const {
        const Vector x = vectorize(field(first) * rho_ * field(first).adjoint());
        const Eigen::RowVectorXcd row = trace_row(field(second).adjoint() * field(second));
        std::vector<double> out;
        for (const cplx& v : prop_->expectation_values(row, x, taus_us)) out.push_back(v.real());
        return out;
    }

    /// int G_ij over each [a, b] subset of [0, inf) (us).
    std::vector<double> coincidence_integrals(Pol first, Pol second,
                                              std::span<const std::pair<double, double>> intervals_us) const {
        const Vector x = vectorize(field(first) * rho_ * field(first).adjoint());
        const Eigen::RowVectorXcd row = trace_row(field(second).adjoint() * field(second));
        std::vector<double> out;
        for (const cplx& v : prop_->expectation_integrals(row, x, intervals_us)) out.push_back(v.real());
        return out;
    }

    /// Integral of the signed-delay rate of setting {first, second} over [lo, hi] (us).
    std::vector<double> signed_integrals(const DetectorSetting& s,
                                         std::span<const std::pair<double, double>> intervals_us) const {
        std::vector<std::pair<double, double>> forward;
        std::vector<std::pair<double, double>> backward;
        for (const auto& [lo, hi] : intervals_us) {
            forward.emplace_back(std::max(lo, 0.0), std::max(hi, 0.0));
            backward.emplace_back(std::max(-hi, 0.0), std::max(-lo, 0.0));
        }
        std::vector<double> out = coincidence_integrals(s.first(), s.second(), forward);
        const std::vector<double> rev = coincidence_integrals(s.second(), s.first(), backward);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += rev[k];
        return out;
    }

private:
    SpaceDescriptor space_;
    SystemParams params_;
    JonesVector input_;
    Matrix rho_;
    std::optional<Propagator> prop_;
    std::array<Matrix, 6> fields_;
};

enum class TableMode { rate, count };

/// Delay-binned coincidence data for a list of detector settings.
/// Rate mode: mean coincidence rate over each bin (photons^2/us^2) or a
/// normalized correlation. Count mode: integer counts per bin.
struct CoincidenceTable {
    std::vector<DetectorSetting> settings;
    double bin_width_ns = 1.0;
    std::vector<double> delays_ns;             // bin centers, shared by every setting
    std::vector<std::vector<double>> values;   // [setting][bin]
    TableMode mode = TableMode::rate;
    /// Per-setting product of singles rates (rate mode from simulation; may be empty).
    std::vector<double> singles_product;
    std::optional<std::uint64_t> seed;
    double total_pairs = 0.0;

    std::size_t bins() const noexcept { return delays_ns.size(); }

    std::size_t index_of(const DetectorSetting& s) const {
        for (std::size_t k = 0; k < settings.size(); ++k)
            if (settings[k] == s) return k;
        throw InvalidArgument("setting " + s.name() + " not in coincidence table");
    }

    void validate() const {
        if (!(bin_width_ns > 0.0)) throw InvalidArgument("bin width must be > 0");
        if (values.size() != settings.size()) throw InvalidArgument("coincidence table: one value row per setting required");
        for (const auto& row : values) {
            if (row.size() != delays_ns.size()) throw InvalidArgument("coincidence table: bin grid differs between settings");
            for (double v : row) {
                if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("coincidence table values must be >= 0");
                if (mode == TableMode::count && v != std::floor(v)) throw InvalidArgument("counts must be integers");
            }
        }
        for (std::size_t k = 1; k < delays_ns.size(); ++k)
            if (!(delays_ns[k] > delays_ns[k - 1])) throw InvalidArgument("delay bins must be strictly ascending");
    }
};

/// Bin centers k * width for k = -K..K with K = round(half_range / width).
inline std::vector<double> symmetric_delay_grid(double half_range_ns, double bin_width_ns) {
    if (!(bin_width_ns > 0.0) || !(half_range_ns >= 0.0)) throw InvalidArgument("invalid delay grid");
    const long k_max = std::lround(half_range_ns / bin_width_ns);
    std::vector<double> out;
    for (long k = -k_max; k <= k_max; ++k) out.push_back(static_cast<double>(k) * bin_width_ns);
    return out;
}

namespace detail {

struct AveragedIntegrals {
    std::vector<std::vector<double>> values;  // [setting][interval], integrals over signed delay (us)
    std::vector<double> singles_product;      // [setting]
};

inline AveragedIntegrals averaged_integrals(const SystemParams& params, const JonesVector& input,
                                            const std::vector<DetectorSetting>& settings,
                                            const std::vector<std::pair<double, double>>& intervals_us,
                                            const TwoPhotonOptions& opt) {
    const QuadratureRule rule = two_photon_couplings(params, opt);
    std::vector<AveragedIntegrals> per_node(rule.size());
    parallel_for(rule.size(), opt.threads, [&](std::size_t k) {
        const DrivenSystem sys(params.with_coupling(rule.nodes[k]), input, opt.n_max);
        AveragedIntegrals& out = per_node[k];
        for (const DetectorSetting& s : settings) {
            out.values.push_back(sys.signed_integrals(s, intervals_us));
            out.singles_product.push_back(sys.singles_rate(s.first()) * sys.singles_rate(s.second()));
        }
    });
    AveragedIntegrals total;
    total.values.assign(settings.size(), std::vector<double>(intervals_us.size(), 0.0));
    total.singles_product.assign(settings.size(), 0.0);
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double w = rule.weights[k];
        for (std::size_t s = 0; s < settings.size(); ++s) {
            total.singles_product[s] += w * per_node[k].singles_product[s];
            for (std::size_t b = 0; b < intervals_us.size(); ++b) total.values[s][b] += w * per_node[k].values[s][b];
        }
    }
    double scale = 0.0;
    for (const auto& row : total.values)
        for (double v : row) scale = std::max(scale, std::abs(v));
    for (auto& row : total.values) {
        for (double& v : row) {
            if (v < -1e-10 * std::max(scale, 1e-300)) throw NumericalFailure("negative coincidence rate");
            v = std::max(v, 0.0);
        }
    }
    return total;
}

}  // namespace detail

/// Bin-averaged coincidence rates for each setting on the bins centered at delays_ns.
inline CoincidenceTable coincidence_rates(const SystemParams& params, const JonesVector& input,
                                          const std::vector<DetectorSetting>& settings,
                                          const std::vector<double>& delays_ns, double bin_width_ns,
                                          const TwoPhotonOptions& opt = {}) {
    if (settings.empty()) throw InvalidArgument("no detector settings requested");
    if (delays_ns.empty()) throw InvalidArgument("empty delay grid");
    if (!(bin_width_ns > 0.0)) throw InvalidArgument("bin width must be > 0");
    std::vector<std::pair<double, double>> intervals;
    for (double c : delays_ns) intervals.emplace_back(ns_to_us(c - 0.5 * bin_width_ns), ns_to_us(c + 0.5 * bin_width_ns));
    const detail::AveragedIntegrals avg = detail::averaged_integrals(params, input, settings, intervals, opt);

    CoincidenceTable table;
    table.settings = settings;
    table.bin_width_ns = bin_width_ns;
    table.delays_ns = delays_ns;
    table.mode = TableMode::rate;
    table.singles_product = avg.singles_product;
    const double width_us = ns_to_us(bin_width_ns);
    for (const auto& row : avg.values) {
        std::vector<double> r;
        for (double v : row) r.push_back(v / width_us);
        table.values.push_back(std::move(r));
    }
    table.validate();
    return table;
}

/// Singles products below this fraction of the largest one are treated as zero.
inline constexpr double vanishing_singles_fraction = 1e-12;

struct NormalizedTable {
    CoincidenceTable table;                  // settings with a defined normalization
    std::vector<DetectorSetting> undefined;  // settings whose singles product vanishes
};

/// Coincidence rate divided by the product of singles rates (1 for uncorrelated photons).
inline NormalizedTable normalized_correlations(const CoincidenceTable& rates) {
    if (rates.mode != TableMode::rate || rates.singles_product.size() != rates.settings.size()) {
        throw InvalidArgument("normalization needs a simulated rate table with singles products");
    }
    double largest = 0.0;
    for (double d : rates.singles_product) largest = std::max(largest, d);
    NormalizedTable out;
    out.table = rates;
    out.table.settings.clear();
    out.table.values.clear();
    out.table.singles_product.clear();
    for (std::size_t s = 0; s < rates.settings.size(); ++s) {
        const double denom = rates.singles_product[s];
        if (!(denom > vanishing_singles_fraction * largest)) {
            out.undefined.push_back(rates.settings[s]);
            continue;
        }
        std::vector<double> row = rates.values[s];
        for (double& v : row) v /= denom;
        out.table.settings.push_back(rates.settings[s]);
        out.table.values.push_back(std::move(row));
        out.table.singles_product.push_back(1.0);
    }
    return out;
}

/// Normalized correlation of setting {first, second} at a signed delay (ns), coupling-averaged.
inline double normalized_correlation_at(const SystemParams& params, const JonesVector& input, const DetectorSetting& s,
                                        double delay_ns, const TwoPhotonOptions& opt = {}) {
    const QuadratureRule rule = two_photon_couplings(params, opt);
    std::vector<double> g2(rule.size()), singles(rule.size());
    parallel_for(rule.size(), opt.threads, [&](std::size_t k) {
        const DrivenSystem sys(params.with_coupling(rule.nodes[k]), input, opt.n_max);
        const double tau = ns_to_us(std::abs(delay_ns));
        const std::array<double, 1> taus{tau};
        g2[k] = delay_ns >= 0.0 ? sys.coincidence(s.first(), s.second(), taus)[0]
                                : sys.coincidence(s.second(), s.first(), taus)[0];
        singles[k] = sys.singles_rate(s.first()) * sys.singles_rate(s.second());
    });
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        num += rule.weights[k] * g2[k];
        den += rule.weights[k] * singles[k];
    }
    const double power = input.norm2();
    if (!(den > vanishing_singles_fraction * power * power)) {
        throw UndefinedCorrelation("singles rate vanishes for setting " + s.name());
    }
    return num / den;
}

/// Sums a table over the bins lying entirely inside [mean - width/2, mean + width/2].
/// Rate tables are integrated (value * bin width); count tables are summed.
inline std::vector<double> window_sums(const CoincidenceTable& table, double mean_delay_ns, double window_ns) {
    table.validate();
    if (!(window_ns > 0.0)) throw InvalidArgument("coincidence window must be > 0");
    const double half = 0.5 * window_ns;
    const double eps = 1e-9 * std::max(1.0, window_ns);
    std::vector<std::size_t> bins;
    for (std::size_t b = 0; b < table.bins(); ++b) {
        const double c = table.delays_ns[b];
        if (c - 0.5 * table.bin_width_ns >= mean_delay_ns - half - eps &&
            c + 0.5 * table.bin_width_ns <= mean_delay_ns + half + eps) {
            bins.push_back(b);
        }
    }
    if (bins.empty()) throw InvalidArgument("coincidence window contains no complete bin");
    const double scale = table.mode == TableMode::rate ? table.bin_width_ns : 1.0;
    std::vector<double> out(table.settings.size(), 0.0);
    for (std::size_t s = 0; s < table.settings.size(); ++s)
        for (std::size_t b : bins) out[s] += scale * table.values[s][b];
    return out;
}

/// Predicted coincidences per setting integrated over a delay window (ns), coupling-averaged.
inline std::vector<double> window_integrals(const SystemParams& params, const JonesVector& input,
                                            const std::vector<DetectorSetting>& settings, double mean_delay_ns,
                                            double window_ns, const TwoPhotonOptions& opt = {}) {
    if (!(window_ns > 0.0)) throw InvalidArgument("coincidence window must be > 0");
    const std::vector<std::pair<double, double>> intervals{
        {ns_to_us(mean_delay_ns - 0.5 * window_ns), ns_to_us(mean_delay_ns + 0.5 * window_ns)}};
    const detail::AveragedIntegrals avg = detail::averaged_integrals(params, input, settings, intervals, opt);
    std::vector<double> out;
    for (const auto& row : avg.values) out.push_back(row[0]);
    return out;
}

inline constexpr double default_pseudo_count_total = 1e6;

/// Rescales expected (real-valued) coincidences to a fixed total; the estimator
/// only sees ratios, the scale keeps its stopping rules in their usual range.
inline std::vector<double> pseudo_counts(std::span<const double> values, double total = default_pseudo_count_total) {
    double sum = 0.0;
    for (double v : values) sum += v;
    if (!(sum > 0.0)) throw InvalidArgument("coincidence window holds no events");
    std::vector<double> out;
    for (double v : values) out.push_back(total * v / sum);
    return out;
}

struct WindowedState {
    TwoPhotonState state;
    MleResult fit;
    std::vector<double> window_values;  // integrated coincidences per canonical setting
};

/// Two-photon state seen in a delay window: predicted coincidences over the window are
/// reconstructed with the same maximum-likelihood procedure as measured data.
inline WindowedState windowed_state(const SystemParams& params, const JonesVector& input, double window_ns,
                                    double mean_delay_ns, const TwoPhotonOptions& opt = {},
                                    const MleOptions& mle = {}) {
    const std::vector<DetectorSetting> settings = canonical_settings();
    const MeasurementModel model = build_measurement_model(settings, SettingWeights::coincidence);
    WindowedState out;
    out.window_values = window_integrals(params, input, settings, mean_delay_ns, window_ns, opt);
    out.fit = mle_reconstruct(pseudo_counts(out.window_values), model, mle);
    out.state = out.fit.rho;
    return out;
}

/// Poisson counts per bin with mean total_pairs * value / sum(values).
inline CoincidenceTable sample_clicks(const CoincidenceTable& rates, double total_pairs, std::uint64_t seed) {
    rates.validate();
    if (!(total_pairs > 0.0)) throw InvalidArgument("total_pairs must be > 0");
    double sum = 0.0;
    for (const auto& row : rates.values)
        for (double v : row) sum += v;
    CoincidenceTable out = rates;
    out.mode = TableMode::count;
    out.seed = seed;
    out.total_pairs = total_pairs;
    out.singles_product.clear();
    std::mt19937_64 rng(seed);
    for (auto& row : out.values) {
        for (double& v : row) {
            const double mean = sum > 0.0 ? total_pairs * v / sum : 0.0;
            if (mean > 0.0) {
                std::poisson_distribution<std::int64_t> pd(mean);
                v = static_cast<double>(pd(rng));
            } else {
                v = 0.0;
            }
        }
    }
    return out;
}

}  // namespace wgmqed

#endif
