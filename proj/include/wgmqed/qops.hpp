#ifndef WGMQED_QOPS_HPP
#define WGMQED_QOPS_HPP

// Operator algebra for a two-level atom coupled to one resonator mode that is
// driven through a fiber: truncated Fock space, Hamiltonian, Liouvillian on
// column-vectorized density operators, steady state, propagation and
// two-time correlators via the quantum regression theorem.
//
// Units: angular frequencies in rad/us (omega = 2*pi*nu with nu in MHz),
// times in microseconds.

#include "wgmqed/errors.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wgmqed {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx I_unit{0.0, 1.0};

/// nu in MHz -> omega in rad/us.
constexpr double angular(double nu_mhz) { return two_pi * nu_mhz; }
/// omega in rad/us -> nu in MHz.
constexpr double to_mhz(double omega) { return omega / two_pi; }
constexpr double ns_to_us(double ns) { return 1e-3 * ns; }
constexpr double us_to_ns(double us) { return 1e3 * us; }

/// Rubidium D2 dipole (amplitude) decay rate used when none is configured.
inline constexpr double default_gamma = angular(3.0);
inline constexpr int default_n_max = 3;

/// Fock space {0..n_max} of the resonator tensored with the atom {g, e}.
/// Basis index of |n, atom> is 2*n + atom, atom = 0 (g) or 1 (e).
class SpaceDescriptor {
public:
    explicit SpaceDescriptor(int n_max = default_n_max) : n_max_(n_max) {
        if (n_max < 2) {
            throw InvalidArgument("photon-number truncation n_max must be >= 2, got " +
                                  std::to_string(n_max));
        }
    }

    int n_max() const noexcept { return n_max_; }
    int dim() const noexcept { return 2 * (n_max_ + 1); }
    int index(int photons, bool excited) const noexcept { return 2 * photons + (excited ? 1 : 0); }

private:
    int n_max_;
};

/// Physical rates of the atom-resonator-fiber system, all in rad/us.
/// Detunings follow Delta_x = omega_x - omega_light, so Delta_ar = Delta_al - Delta_rl.
struct SystemParams {
    double g = 0.0;
    double kappa_i = angular(8.4);
    double kappa_f = angular(17.0);
    double gamma = default_gamma;
    double delta_al = 0.0;
    double delta_rl = 0.0;
    std::optional<double> delta_ar;  // consistency check only
    cplx drive{0.0, 0.0};             // <a_H,in>, sqrt(photons/us)
    double g_mean = 0.0;
    double g_sigma = 0.0;

    double kappa_total() const noexcept { return kappa_i + kappa_f; }

    SystemParams with_coupling(double coupling) const {
        SystemParams p = *this;
        p.g = coupling;
        return p;
    }

    SystemParams with_drive(cplx amplitude) const {
        SystemParams p = *this;
        p.drive = amplitude;
        return p;
    }

    void validate() const {
        auto finite = [](double x) { return std::isfinite(x); };
        if (!(finite(g) && finite(kappa_i) && finite(kappa_f) && finite(gamma) && finite(delta_al) &&
              finite(delta_rl) && finite(g_mean) && finite(g_sigma) && std::isfinite(drive.real()) &&
              std::isfinite(drive.imag()))) {
            throw InvalidArgument("system parameters must be finite");
        }
        if (!(kappa_i > 0.0)) throw InvalidArgument("kappa_i must be > 0");
        if (kappa_f < 0.0) throw InvalidArgument("kappa_f must be >= 0");
        if (!(gamma > 0.0)) throw InvalidArgument("gamma must be > 0");
        if (g < 0.0) throw InvalidArgument("g must be >= 0");
        if (g_sigma < 0.0) throw InvalidArgument("g_sigma must be >= 0");
        if (delta_ar) {
            const double mismatch = *delta_ar - (delta_al - delta_rl);
            if (std::abs(mismatch) > 1e-9 * std::max(1.0, std::abs(*delta_ar))) {
                throw InvalidArgument("inconsistent detunings: delta_ar != delta_al - delta_rl");
            }
        }
    }
};

struct Operators {
    Matrix b;
    Matrix b_dag;
    Matrix sigma_minus;
    Matrix sigma_plus;
};

inline Operators build_operators(const SpaceDescriptor& space) {
    const int levels = space.n_max() + 1;
    Matrix ladder = Matrix::Zero(levels, levels);
    for (int n = 1; n < levels; ++n) ladder(n - 1, n) = std::sqrt(static_cast<double>(n));

    Matrix lower = Matrix::Zero(2, 2);
    lower(0, 1) = 1.0;  // |g><e|

    Operators ops;
    ops.b = Eigen::kroneckerProduct(ladder, Matrix::Identity(2, 2)).eval();
    ops.sigma_minus = Eigen::kroneckerProduct(Matrix::Identity(levels, levels), lower).eval();
    ops.b_dag = ops.b.adjoint();
    ops.sigma_plus = ops.sigma_minus.adjoint();
    return ops;
}

/// H = D_rl b'b + D_al s+s- + g (b' s- + b s+) + i sqrt(2 kf) (a_in b' - a_in* b).
///
/// The drive carries the factor i so that a_out = a_in - sqrt(2 kf) b reproduces
/// the single-photon transmission (kL - kf + i D_rl) / (kL + kf + i D_rl).
inline Matrix build_hamiltonian(const SystemParams& params, const SpaceDescriptor& space) {
    params.validate();
    const Operators ops = build_operators(space);
    const double feed = std::sqrt(2.0 * params.kappa_f);
    Matrix h = params.delta_rl * (ops.b_dag * ops.b) + params.delta_al * (ops.sigma_plus * ops.sigma_minus) +
               params.g * (ops.b_dag * ops.sigma_minus + ops.b * ops.sigma_plus) +
               I_unit * feed * (params.drive * ops.b_dag - std::conj(params.drive) * ops.b);
    return h;
}

/// Column-major vectorization vec(X).
inline Vector vectorize(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvectorize(const Vector& v, int dim) {
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

/// Tr[O X] expressed as a row vector acting on vec(X).
inline Eigen::RowVectorXcd trace_row(const Matrix& observable) {
    Matrix t = observable.transpose();
    return Eigen::Map<const Eigen::RowVectorXcd>(t.data(), t.size());
}

/// Generator of d vec(rho)/dt = L vec(rho).
struct SuperOperator {
    Matrix matrix;
    int dim = 0;

    Matrix apply(const Matrix& rho) const { return unvectorize(matrix * vectorize(rho), dim); }
};

/// Adds rate * (2 c rho c' - c'c rho - rho c'c) to a vectorized generator.
inline void add_dissipator(Matrix& generator, double rate, const Matrix& c) {
    const int d = static_cast<int>(c.rows());
    const Matrix id = Matrix::Identity(d, d);
    const Matrix cdc = c.adjoint() * c;
    generator += rate * (2.0 * Eigen::kroneckerProduct(c.conjugate(), c).eval() -
                         Eigen::kroneckerProduct(id, cdc).eval() -
                         Eigen::kroneckerProduct(cdc.transpose(), id).eval());
}

inline SuperOperator liouvillian_from(const Matrix& hamiltonian) {
    const int d = static_cast<int>(hamiltonian.rows());
    const Matrix id = Matrix::Identity(d, d);
    SuperOperator l;
    l.dim = d;
    l.matrix = -I_unit * (Eigen::kroneckerProduct(id, hamiltonian).eval() -
                          Eigen::kroneckerProduct(hamiltonian.transpose(), id).eval());
    return l;
}

inline SuperOperator build_liouvillian(const SystemParams& params, const SpaceDescriptor& space) {
    const Operators ops = build_operators(space);
    SuperOperator l = liouvillian_from(build_hamiltonian(params, space));
    add_dissipator(l.matrix, params.kappa_total(), ops.b);
    add_dissipator(l.matrix, params.gamma, ops.sigma_minus);
    return l;
}

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Largest entry of L(rho); zero for an exact stationary state.
inline double stationarity_residual(const SuperOperator& l, const Matrix& rho) {
    return max_abs(l.matrix * vectorize(rho));
}

inline constexpr double steady_state_tolerance = 1e-10;

/// Unique stationary state, from L with one row replaced by the trace constraint.
inline Matrix steady_state(const SuperOperator& l) {
    const int d = l.dim;
    const int n = d * d;
    if (l.matrix.rows() != n || l.matrix.cols() != n) {
        throw InvalidArgument("superoperator dimension does not match its density-operator space");
    }
    Matrix system = l.matrix;
    system.row(0).setZero();
    for (int k = 0; k < d; ++k) system(0, k * d + k) = 1.0;

    Eigen::FullPivLU<Matrix> lu(system);
    lu.setThreshold(1e-12);
    if (lu.rank() < n) {
        throw DegenerateSteadyState("Liouvillian has " + std::to_string(n - lu.rank() + 1) +
                                    " independent stationary states");
    }
    Vector rhs = Vector::Zero(n);
    rhs(0) = 1.0;
    Matrix rho = unvectorize(lu.solve(rhs), d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();

    const double residual = stationarity_residual(l, rho);
    const double scale = std::max(1.0, max_abs(l.matrix)) * 1e-12;
    if (!(residual < std::max(steady_state_tolerance, scale))) {
        throw NumericalFailure("steady-state residual " + std::to_string(residual) + " above tolerance");
    }
    return rho;
}

/// exp(L tau) on vectorized operators. Uses a cached eigendecomposition when
/// L is numerically diagonalizable, otherwise the dense matrix exponential.
class Propagator {
public:
    explicit Propagator(SuperOperator l) : l_(std::move(l)) {
        Eigen::ComplexEigenSolver<Matrix> solver(l_.matrix, true);
        if (solver.info() != Eigen::Success) return;
        eigenvalues_ = solver.eigenvalues();
        modes_ = solver.eigenvectors();
        Eigen::PartialPivLU<Matrix> lu(modes_);
        inverse_modes_ = lu.inverse();
        const Matrix rebuilt = modes_ * eigenvalues_.asDiagonal() * inverse_modes_;
        const double err = max_abs(rebuilt - l_.matrix) / std::max(1.0, max_abs(l_.matrix));
        const double inv_err = max_abs(inverse_modes_ * modes_ - Matrix::Identity(modes_.rows(), modes_.cols()));
        diagonalized_ = err < 1e-10 && inv_err < 1e-8;
    }

    const SuperOperator& generator() const noexcept { return l_; }
    int dim() const noexcept { return l_.dim; }
    bool diagonalized() const noexcept { return diagonalized_; }
    const Vector& eigenvalues() const noexcept { return eigenvalues_; }

    /// Slowest nonzero decay rate -max Re(lambda) over non-stationary modes.
    double slowest_rate() const {
        Vector ev = eigenvalues_;
        if (ev.size() == 0) ev = Eigen::ComplexEigenSolver<Matrix>(l_.matrix, false).eigenvalues();
        double slowest = std::numeric_limits<double>::infinity();
        const double floor = 1e-9 * std::max(1.0, max_abs(l_.matrix));
        for (const cplx& lam : ev) {
            if (std::abs(lam) > floor) slowest = std::min(slowest, -lam.real());
        }
        return slowest;
    }

    Vector evolve(const Vector& x, double tau) const {
        check_tau(tau);
        if (tau == 0.0) return x;
        if (diagonalized_) {
            Vector c = inverse_modes_ * x;
            for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(eigenvalues_(k) * tau);
            return modes_ * c;
        }
        return (l_.matrix * tau).exp() * x;
    }

    Matrix evolve(const Matrix& rho, double tau) const {
        return unvectorize(evolve(vectorize(rho), tau), l_.dim);
    }

    /// Integral of exp(L tau) x over tau in [t0, t1], 0 <= t0 <= t1.
    Vector integrate(const Vector& x, double t0, double t1) const {
        check_tau(t0);
        if (t1 < t0) throw InvalidArgument("integration interval must satisfy t0 <= t1");
        if (diagonalized_) {
            Vector c = inverse_modes_ * x;
            for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= mode_integral(eigenvalues_(k), t0, t1);
            return modes_ * c;
        }
        // exp([[L, 1], [0, 0]] t) carries int_0^t exp(L s) ds in its upper-right block.
        const Eigen::Index n = l_.matrix.rows();
        Matrix aug = Matrix::Zero(2 * n, 2 * n);
        aug.topLeftCorner(n, n) = l_.matrix;
        aug.topRightCorner(n, n) = Matrix::Identity(n, n);
        const Matrix e1 = (aug * (t1 - t0)).exp();
        return e1.topRightCorner(n, n) * evolve(x, t0);
    }

    /// Many evaluations of the same input, sharing the modal projection.
    std::vector<Vector> evolve_many(const Vector& x, std::span<const double> taus) const {
        std::vector<Vector> out;
        out.reserve(taus.size());
        if (!diagonalized_) {
            for (double t : taus) out.push_back(evolve(x, t));
            return out;
        }
        const Vector c = inverse_modes_ * x;
        for (double t : taus) {
            check_tau(t);
            Vector ct = c;
            for (Eigen::Index k = 0; k < ct.size(); ++k) ct(k) *= std::exp(eigenvalues_(k) * t);
            out.push_back(modes_ * ct);
        }
        return out;
    }

    /// row * exp(L tau) x for each tau.
    std::vector<cplx> expectation_values(const Eigen::RowVectorXcd& row, const Vector& x,
                                         std::span<const double> taus) const {
        std::vector<cplx> out;
        out.reserve(taus.size());
        if (!diagonalized_) {
            for (double t : taus) out.push_back((row * evolve(x, t))(0));
            return out;
        }
        const Vector c = inverse_modes_ * x;
        const Eigen::RowVectorXcd r = row * modes_;
        for (double t : taus) {
            check_tau(t);
            cplx acc{0.0, 0.0};
            for (Eigen::Index k = 0; k < c.size(); ++k) acc += r(k) * c(k) * std::exp(eigenvalues_(k) * t);
            out.push_back(acc);
        }
        return out;
    }

    /// row * int_a^b exp(L s) x ds for each interval (a, b), 0 <= a <= b.
    std::vector<cplx> expectation_integrals(const Eigen::RowVectorXcd& row, const Vector& x,
                                            std::span<const std::pair<double, double>> intervals) const {
        std::vector<cplx> out;
        out.reserve(intervals.size());
        if (!diagonalized_) {
            for (const auto& [a, b] : intervals) out.push_back((row * integrate(x, a, b))(0));
            return out;
        }
        const Vector c = inverse_modes_ * x;
        const Eigen::RowVectorXcd r = row * modes_;
        for (const auto& [a, b] : intervals) {
            check_tau(a);
            if (b < a) throw InvalidArgument("integration interval must satisfy t0 <= t1");
            cplx acc{0.0, 0.0};
            for (Eigen::Index k = 0; k < c.size(); ++k) acc += r(k) * c(k) * mode_integral(eigenvalues_(k), a, b);
            out.push_back(acc);
        }
        return out;
    }

    /// (int_{t0}^{t1} exp(lambda s) ds), stable for small |lambda (t1 - t0)|.
    static cplx mode_integral(cplx lambda, double t0, double t1) {
        const double width = t1 - t0;
        const cplx z = lambda * width;
        cplx phi1;
        if (std::abs(z) < 1e-4) {
            phi1 = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
        } else {
            phi1 = (std::exp(z) - 1.0) / z;
        }
        return std::exp(lambda * t0) * width * phi1;
    }

private:
    static void check_tau(double tau) {
        if (!(tau >= 0.0) || !std::isfinite(tau)) {
            throw InvalidArgument("propagation time must be finite and >= 0");
        }
    }

    SuperOperator l_;
    Vector eigenvalues_;
    Matrix modes_;
    Matrix inverse_modes_;
    bool diagonalized_ = false;
};

inline Matrix propagate(const SuperOperator& l, const Matrix& rho0, double tau) {
    if (!(tau >= 0.0)) throw InvalidArgument("propagation time must be >= 0");
    if (tau == 0.0) return rho0;
    return unvectorize((l.matrix * tau).exp() * vectorize(rho0), l.dim);
}

inline constexpr double correlator_stationarity_tolerance = 1e-8;

/// G(tau) = Tr[B'B exp(L tau)(A rho A')] for each tau (quantum regression).
inline std::vector<cplx> two_time_correlator(const Propagator& prop, const Matrix& rho_ss, const Matrix& a,
                                             const Matrix& b, std::span<const double> taus) {
    const double residual = stationarity_residual(prop.generator(), rho_ss);
    if (residual > correlator_stationarity_tolerance) {
        throw NonSteadyState("density operator is not stationary (residual " + std::to_string(residual) + ")");
    }
    const Vector start = vectorize(a * rho_ss * a.adjoint());
    const Eigen::RowVectorXcd row = trace_row(b.adjoint() * b);
    std::vector<cplx> out;
    out.reserve(taus.size());
    for (const Vector& v : prop.evolve_many(start, taus)) out.push_back((row * v)(0));
    return out;
}

inline std::vector<cplx> two_time_correlator(const SuperOperator& l, const Matrix& rho_ss, const Matrix& a,
                                             const Matrix& b, std::span<const double> taus) {
    return two_time_correlator(Propagator(l), rho_ss, a, b, taus);
}

/// Tr[O rho].
inline cplx expectation(const Matrix& observable, const Matrix& rho) {
    return (observable * rho).trace();
}

struct TruncationCheck {
    double photons_low = 0.0;   // <b'b> at n_max
    double photons_high = 0.0;  // <b'b> at n_max + 2
    double relative_change = 0.0;
    bool converged = false;
};

/// Compares steady-state photon number at n_max and n_max + 2.
inline TruncationCheck check_truncation(const SystemParams& params, int n_max = default_n_max,
                                        double rel_tol = 1e-4) {
    auto photons = [&](int n) {
        const SpaceDescriptor space(n);
        const Operators ops = build_operators(space);
        const Matrix rho = steady_state(build_liouvillian(params, space));
        return expectation(ops.b_dag * ops.b, rho).real();
    };
    TruncationCheck out;
    out.photons_low = photons(n_max);
    out.photons_high = photons(n_max + 2);
    const double ref = std::max(std::abs(out.photons_high), std::numeric_limits<double>::min());
    out.relative_change = std::abs(out.photons_low - out.photons_high) / ref;
    out.converged = out.relative_change < rel_tol;
    return out;
}

}  // namespace wgmqed

#endif
