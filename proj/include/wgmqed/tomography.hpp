#ifndef WGMQED_TOMOGRAPHY_HPP
#define WGMQED_TOMOGRAPHY_HPP

// Maximum-likelihood reconstruction of the symmetric-subspace two-photon
// density matrix from coincidence counts of analyzer-output pairs.
//
// rho = T'T / Tr(T'T) with T lower triangular (real diagonal), 9 real
// parameters. Counts are independent Poisson variables with a common flux
// scale; profiling the scale out leaves
//     l(T) = sum_s n_s log q_s - N log sum_s q_s,   q_s = eta_s Tr[Pi_s T'T].

#include "wgmqed/errors.hpp"
#include "wgmqed/polarization.hpp"
#include "wgmqed/states.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wgmqed {

/// How coincidence counts weigh each setting's symmetric projector.
enum class SettingWeights {
    /// eta_s = 1 for every setting.
    unit,
    /// eta_s = |P_sym |ij>|^2, i.e. (1 + |<i|j>|^2)/2 for distinct labels and 1
    /// for equal labels; the weight under which coincidence rates of the
    /// ordered detector pair (i then j) follow Tr[eta_s Pi_s rho].
    coincidence,
};

struct MeasurementModel {
    std::vector<DetectorSetting> settings;
    std::vector<Matrix3> projectors;
    std::vector<double> efficiency;

    std::size_t size() const noexcept { return settings.size(); }

    /// sum_s eta_s Pi_s.
    Matrix3 total_operator() const {
        Matrix3 acc = Matrix3::Zero();
        for (std::size_t s = 0; s < size(); ++s) acc += efficiency[s] * projectors[s];
        return acc;
    }

    std::size_t index_of(const DetectorSetting& s) const {
        for (std::size_t k = 0; k < settings.size(); ++k)
            if (settings[k] == s) return k;
        throw InvalidArgument("setting " + s.name() + " is not part of the measurement model");
    }
};

/// Hermitian basis of 3x3 matrices (9 elements, trace-orthogonal).
inline std::vector<Matrix3> hermitian_basis3() {
    std::vector<Matrix3> basis;
    for (int i = 0; i < 3; ++i) {
        Matrix3 m = Matrix3::Zero();
        m(i, i) = 1.0;
        basis.push_back(m);
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            Matrix3 re = Matrix3::Zero();
            re(i, j) = re(j, i) = 1.0;
            Matrix3 im = Matrix3::Zero();
            im(i, j) = {0.0, -1.0};
            im(j, i) = {0.0, 1.0};
            basis.push_back(re);
            basis.push_back(im);
        }
    }
    return basis;
}

/// Rank of the real-linear map rho -> (Tr[Pi_s rho])_s over Hermitian 3x3 matrices.
inline int probability_map_rank(const std::vector<Matrix3>& projectors) {
    const auto basis = hermitian_basis3();
    Eigen::MatrixXd map(static_cast<Eigen::Index>(projectors.size()), 9);
    for (std::size_t s = 0; s < projectors.size(); ++s)
        for (int k = 0; k < 9; ++k) map(static_cast<Eigen::Index>(s), k) = (projectors[s] * basis[k]).trace().real();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(map);
    svd.setThreshold(1e-10);
    return static_cast<int>(svd.rank());
}

/// Projector onto the normalized symmetrized product state of each setting.
inline MeasurementModel build_measurement_model(const std::vector<DetectorSetting>& settings,
                                                SettingWeights weights = SettingWeights::unit) {
    if (settings.empty()) throw InvalidArgument("measurement model needs at least one setting");
    MeasurementModel model;
    model.settings = settings;
    for (const DetectorSetting& s : settings) {
        const Vector3 v = symmetric_product(unit_vector(s.first()), unit_vector(s.second()));
        const double n2 = v.squaredNorm();
        model.projectors.push_back(v * v.adjoint() / n2);
        model.efficiency.push_back(weights == SettingWeights::coincidence ? n2 : 1.0);
    }
    const int rank = probability_map_rank(model.projectors);
    if (rank < 9) {
        throw RankDeficient("measurement settings are informationally incomplete (rank " + std::to_string(rank) +
                            " < 9)");
    }
    return model;
}

/// p_s = eta_s Tr[Pi_s rho] / sum_t eta_t Tr[Pi_t rho].
inline std::vector<double> predicted_probabilities(const TwoPhotonState& rho, const MeasurementModel& model) {
    std::vector<double> p(model.size());
    double total = 0.0;
    for (std::size_t s = 0; s < model.size(); ++s) {
        p[s] = std::max(0.0, model.efficiency[s] * (model.projectors[s] * rho.matrix()).trace().real());
        total += p[s];
    }
    if (!(total > 0.0)) throw NumericalFailure("state has zero probability in every setting");
    for (double& x : p) x /= total;
    return p;
}

inline constexpr int cholesky_parameter_count = 9;
using CholeskyParams = Eigen::Matrix<double, cholesky_parameter_count, 1>;

/// Lower-triangular T: diag (t0, t1, t2); T10 = t3 + i t4, T20 = t5 + i t6, T21 = t7 + i t8.
inline Matrix3 cholesky_factor(const CholeskyParams& t) {
    Matrix3 m = Matrix3::Zero();
    m(0, 0) = t(0);
    m(1, 1) = t(1);
    m(2, 2) = t(2);
    m(1, 0) = {t(3), t(4)};
    m(2, 0) = {t(5), t(6)};
    m(2, 1) = {t(7), t(8)};
    return m;
}

inline Matrix3 density_from_cholesky(const CholeskyParams& t) {
    const Matrix3 f = cholesky_factor(t);
    Matrix3 rho = f.adjoint() * f;
    const double tr = rho.trace().real();
    if (!(tr > 0.0)) throw NumericalFailure("Cholesky factor is zero");
    rho /= tr;
    return (0.5 * (rho + rho.adjoint())).eval();
}

/// Parameters whose factor reproduces rho (rho must be positive semidefinite).
inline CholeskyParams cholesky_from_density(const Matrix3& rho) {
    // rho = T'T with T lower triangular: reverse the index order and use an
    // upper Cholesky factor of the permuted matrix.
    Matrix3 perm = Matrix3::Zero();
    perm(0, 2) = perm(1, 1) = perm(2, 0) = 1.0;
    Matrix3 reg = rho + 1e-14 * Matrix3::Identity();
    const Matrix3 flipped = perm * reg * perm;
    Eigen::LLT<Matrix3> llt(flipped);
    if (llt.info() != Eigen::Success) throw NumericalFailure("density matrix is not positive definite");
    const Matrix3 u = llt.matrixU();  // flipped = U'U
    const Matrix3 t = perm * u * perm;  // rho = T'T, T lower triangular
    CholeskyParams out;
    // The factor's diagonal is real and positive by construction.
    out << t(0, 0).real(), t(1, 1).real(), t(2, 2).real(), t(1, 0).real(), t(1, 0).imag(), t(2, 0).real(),
        t(2, 0).imag(), t(2, 1).real(), t(2, 1).imag();
    return out;
}

/// Profiled Poisson log-likelihood and its gradient in the Cholesky parameters.
class LogLikelihood {
public:
    LogLikelihood(const MeasurementModel& model, std::span<const double> counts) : model_(model) {
        if (counts.size() != model.size()) {
            throw InvalidArgument("expected " + std::to_string(model.size()) + " counts, got " +
                                  std::to_string(counts.size()));
        }
        for (double n : counts) {
            if (!(n >= 0.0) || !std::isfinite(n)) throw InvalidArgument("counts must be finite and nonnegative");
        }
        counts_.assign(counts.begin(), counts.end());
        total_ = 0.0;
        for (double n : counts_) total_ += n;
        weighted_.reserve(model.size());
        for (std::size_t s = 0; s < model.size(); ++s) weighted_.push_back(model.efficiency[s] * model.projectors[s]);
        total_operator_ = model.total_operator();
    }

    double total_counts() const noexcept { return total_; }

    double value(const CholeskyParams& t) const {
        const Matrix3 f = cholesky_factor(t);
        const Matrix3 gram = f.adjoint() * f;
        const double q_total = (total_operator_ * gram).trace().real();
        if (!(q_total > 0.0)) return -std::numeric_limits<double>::infinity();
        double l = -total_ * std::log(q_total);
        for (std::size_t s = 0; s < counts_.size(); ++s) {
            if (counts_[s] == 0.0) continue;
            const double q = (weighted_[s] * gram).trace().real();
            if (!(q > 0.0)) return -std::numeric_limits<double>::infinity();
            l += counts_[s] * std::log(q);
        }
        return l;
    }

    CholeskyParams gradient(const CholeskyParams& t) const {
        const Matrix3 f = cholesky_factor(t);
        const Matrix3 gram = f.adjoint() * f;
        const double q_total = (total_operator_ * gram).trace().real();
        // dl/dT entries come from sum_s c_s d q_s with q_s = Tr[T E_s T'].
        Matrix3 weight = -(total_ / q_total) * total_operator_;
        for (std::size_t s = 0; s < counts_.size(); ++s) {
            if (counts_[s] == 0.0) continue;
            const double q = (weighted_[s] * gram).trace().real();
            weight += (counts_[s] / q) * weighted_[s];
        }
        const Matrix3 z = f * weight;
        CholeskyParams g;
        g << 2.0 * z(0, 0).real(), 2.0 * z(1, 1).real(), 2.0 * z(2, 2).real(), 2.0 * z(1, 0).real(),
            2.0 * z(1, 0).imag(), 2.0 * z(2, 0).real(), 2.0 * z(2, 0).imag(), 2.0 * z(2, 1).real(),
            2.0 * z(2, 1).imag();
        return g;
    }

private:
    const MeasurementModel& model_;
    std::vector<double> counts_;
    std::vector<Matrix3> weighted_;
    Matrix3 total_operator_;
    double total_ = 0.0;
};

struct MleOptions {
    int restarts = 5;
    int max_iterations = 100000;
    std::uint64_t seed = 20140721;
    double relative_tolerance = 1e-10;
    double step_tolerance = 1e-8;
    bool record_trace = false;
};

struct MleResult {
    TwoPhotonState rho;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;  // final gradient norm of l / N
    /// Largest element difference between the best state and any other converged restart.
    double restart_spread = 0.0;
    /// Log-likelihood of every accepted iterate of the best restart (record_trace only).
    std::vector<double> trace;
};

namespace detail {

struct BfgsRun {
    CholeskyParams x;
    double value = 0.0;  // log-likelihood
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;
    std::vector<double> trace;
};

// Maximizes l by minimizing f = -l / N with BFGS and Armijo backtracking.
inline BfgsRun maximize_likelihood(const LogLikelihood& ll, CholeskyParams x, const MleOptions& opt) {
    const double scale = ll.total_counts() > 0.0 ? 1.0 / ll.total_counts() : 1.0;
    auto f = [&](const CholeskyParams& p) { return -scale * ll.value(p); };
    auto grad = [&](const CholeskyParams& p) { return CholeskyParams(-scale * ll.gradient(p)); };

    x /= x.norm();
    double fx = f(x);
    CholeskyParams gx = grad(x);
    Eigen::Matrix<double, 9, 9> h = Eigen::Matrix<double, 9, 9>::Identity();
    BfgsRun run;
    if (opt.record_trace) run.trace.push_back(-fx / scale);

    for (int it = 0; it < opt.max_iterations; ++it) {
        run.iterations = it + 1;
        CholeskyParams dir = -h * gx;
        double slope = gx.dot(dir);
        if (!(slope < 0.0)) {
            h.setIdentity();
            dir = -gx;
            slope = gx.dot(dir);
        }
        double step = 1.0;
        CholeskyParams xn;
        double fn = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            xn = x + step * dir;
            fn = f(xn);
            if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No descent left at double precision.
            run.converged = gx.norm() < 1e-6;
            break;
        }
        const CholeskyParams gn = grad(xn);
        const CholeskyParams s = xn - x;
        const CholeskyParams y = gn - gx;
        const double rel_change = std::abs(fn - fx) / std::max(std::abs(fx), 1e-300);
        const double step_norm = s.norm() / std::max(1.0, xn.norm());

        x = xn;
        fx = fn;
        gx = gn;
        if (opt.record_trace) run.trace.push_back(-fx / scale);

        const double sy = s.dot(y);
        if (sy > 1e-16 * s.norm() * y.norm()) {
            const double rho_k = 1.0 / sy;
            const Eigen::Matrix<double, 9, 9> id = Eigen::Matrix<double, 9, 9>::Identity();
            h = (id - rho_k * s * y.transpose()) * h * (id - rho_k * y * s.transpose()) + rho_k * s * s.transpose();
        }
        // l is scale invariant in T; keep |T| near 1 to avoid drift.
        const double n = x.norm();
        if (n > 10.0 || n < 0.1) {
            x /= n;
            fx = f(x);
            gx = grad(x);
            h.setIdentity();
        }
        if ((rel_change < opt.relative_tolerance && step_norm < opt.step_tolerance) || gx.norm() < 1e-14) {
            run.converged = true;
            break;
        }
    }
    run.x = x;
    run.value = -fx / scale;
    run.grad_norm = gx.norm();
    return run;
}

}  // namespace detail

/// Maximum-likelihood state for per-setting counts (any nonnegative reals).
/// Runs opt.restarts BFGS maximizations from random starting factors and keeps the best.
inline MleResult mle_reconstruct(std::span<const double> counts, const MeasurementModel& model,
                                 const MleOptions& opt = {}) {
    const LogLikelihood ll(model, counts);
    int nonzero = 0;
    for (double n : counts) nonzero += n > 0.0 ? 1 : 0;
    if (nonzero < 9) {
        throw InvalidArgument("need nonzero counts in at least 9 settings, got " + std::to_string(nonzero));
    }
    if (opt.restarts < 1) throw InvalidArgument("need at least one optimizer start");

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<detail::BfgsRun> runs;
    for (int r = 0; r < opt.restarts; ++r) {
        CholeskyParams x0;
        for (int k = 0; k < 9; ++k) x0(k) = n01(rng);
        // Positive diagonal keeps the start full rank.
        for (int k = 0; k < 3; ++k) x0(k) = std::abs(x0(k)) + 0.1;
        runs.push_back(detail::maximize_likelihood(ll, x0, opt));
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].value > runs[best].value) best = r;

    MleResult out;
    const Matrix3 rho_best = density_from_cholesky(runs[best].x);
    out.rho = TwoPhotonState(rho_best);
    out.log_likelihood = runs[best].value;
    out.converged = runs[best].converged;
    out.residual = runs[best].grad_norm;
    int iterations = 0;
    for (const auto& run : runs) {
        iterations += run.iterations;
        if (!run.converged) continue;
        out.restart_spread = std::max(out.restart_spread, (density_from_cholesky(run.x) - rho_best).cwiseAbs().maxCoeff());
    }
    out.iterations = iterations;
    out.trace = std::move(runs[best].trace);
    return out;
}

/// Expected counts N * p_s for a given state.
inline std::vector<double> expected_counts(const TwoPhotonState& rho, const MeasurementModel& model, double total) {
    std::vector<double> p = predicted_probabilities(rho, model);
    for (double& x : p) x *= total;
    return p;
}

/// Multinomial draw of `total` coincidences over the model's settings.
template <typename Rng>
std::vector<double> sample_counts(const TwoPhotonState& rho, const MeasurementModel& model, std::uint64_t total,
                                  Rng& rng) {
    const std::vector<double> p = predicted_probabilities(rho, model);
    std::vector<double> out(p.size(), 0.0);
    double remaining_p = 1.0;
    std::uint64_t remaining = total;
    for (std::size_t s = 0; s + 1 < p.size() && remaining > 0; ++s) {
        const double q = remaining_p > 0.0 ? std::clamp(p[s] / remaining_p, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::uint64_t> bin(remaining, q);
        const std::uint64_t k = bin(rng);
        out[s] = static_cast<double>(k);
        remaining -= k;
        remaining_p -= p[s];
    }
    out.back() += static_cast<double>(remaining);
    return out;
}

}  // namespace wgmqed

#endif
