#ifndef WGMQED_BOOTSTRAP_HPP
#define WGMQED_BOOTSTRAP_HPP

#include "wgmqed/errors.hpp"
#include "wgmqed/metrics.hpp"
#include "wgmqed/parallel.hpp"
#include "wgmqed/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace wgmqed {

inline constexpr int default_bootstrap_replicates = 100;
inline constexpr double bootstrap_failure_limit = 0.1;

/// Generator for replicate `index` of a run seeded with `seed`.
inline std::mt19937_64 replicate_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

/// Replaces every count n by a Poisson(n) draw.
template <typename Rng>
std::vector<double> resample(std::span<const double> counts, Rng& rng) {
    std::vector<double> out;
    out.reserve(counts.size());
    for (double n : counts) {
        if (!(n >= 0.0) || n != std::floor(n)) throw InvalidArgument("resampling needs nonnegative integer counts");
        if (n == 0.0) {
            out.push_back(0.0);
            continue;
        }
        std::poisson_distribution<std::int64_t> pd(n);
        out.push_back(static_cast<double>(pd(rng)));
    }
    return out;
}

inline std::vector<double> resample(std::span<const double> counts, std::uint64_t seed) {
    std::mt19937_64 rng = replicate_rng(seed, 0);
    return resample(counts, rng);
}

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation; circular for phases
    int samples = 0;
};

/// Arithmetic mean and sample standard deviation (0 for a single value).
inline MetricSummary linear_summary(std::span<const double> x) {
    MetricSummary s;
    s.samples = static_cast<int>(x.size());
    if (x.empty()) return s;
    for (double v : x) s.mean += v;
    s.mean /= static_cast<double>(x.size());
    if (x.size() < 2) return s;
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(x.size() - 1));
    return s;
}

/// Mean direction in (-pi, pi] and circular standard deviation sqrt(-2 ln R).
inline MetricSummary circular_summary(std::span<const double> phases) {
    MetricSummary s;
    s.samples = static_cast<int>(phases.size());
    if (phases.empty()) return s;
    std::complex<double> acc{0.0, 0.0};
    for (double p : phases) acc += std::polar(1.0, p);
    acc /= static_cast<double>(phases.size());
    s.mean = wrap_phase(std::arg(acc));
    if (phases.size() < 2) return s;
    const double r = std::min(1.0, std::abs(acc));
    s.stddev = r > 0.0 ? std::sqrt(-2.0 * std::log(r)) : std::numeric_limits<double>::infinity();
    return s;
}

struct BootstrapReport {
    MetricSummary overlap;
    MetricSummary concurrence;
    MetricSummary phase;  // radians; fewer samples when the phase was undefined in some replicates
    int replicates = 0;   // requested
    int failed = 0;       // replicates whose reconstruction threw
    std::uint64_t seed = 0;
    bool unreliable = false;  // more than 10% of replicates failed
    bool degenerate = false;  // a single replicate; standard deviations are 0 by convention
};

struct BootstrapOptions {
    int replicates = default_bootstrap_replicates;
    std::uint64_t seed = 1;
    int threads = 1;
    MleOptions mle{};
};

/// resample -> mle_reconstruct -> metrics, repeated; replicate k uses seeds derived from (seed, k).
inline BootstrapReport bootstrap_metrics(std::span<const double> counts, const MeasurementModel& model,
                                         const BootstrapOptions& opt = {}) {
    if (opt.replicates < 1) throw InvalidArgument("bootstrap needs at least one replicate");
    const std::size_t n = static_cast<std::size_t>(opt.replicates);
    std::vector<std::optional<MetricsReport>> results(n);
    parallel_for(n, opt.threads, [&](std::size_t k) {
        std::mt19937_64 rng = replicate_rng(opt.seed, k);
        const std::vector<double> sample = resample(counts, rng);
        MleOptions mle = opt.mle;
        mle.seed = rng();
        try {
            results[k] = evaluate_metrics(mle_reconstruct(sample, model, mle).rho);
        } catch (const Error&) {
            results[k].reset();
        }
    });

    std::vector<double> overlap, conc, phase;
    BootstrapReport rep;
    rep.replicates = opt.replicates;
    rep.seed = opt.seed;
    for (const auto& r : results) {
        if (!r) {
            ++rep.failed;
            continue;
        }
        overlap.push_back(r->overlap);
        conc.push_back(r->concurrence);
        if (r->phase) phase.push_back(*r->phase);
    }
    rep.overlap = linear_summary(overlap);
    rep.concurrence = linear_summary(conc);
    rep.phase = circular_summary(phase);
    rep.unreliable = static_cast<double>(rep.failed) > bootstrap_failure_limit * static_cast<double>(n);
    rep.degenerate = opt.replicates == 1;
    return rep;
}

}  // namespace wgmqed

#endif
