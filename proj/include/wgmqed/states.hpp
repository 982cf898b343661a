#ifndef WGMQED_STATES_HPP
#define WGMQED_STATES_HPP

// Two-photon polarization states on the symmetric subspace
// {|HH>, |S> = (|HV> + |VH>)/sqrt2, |VV>} and their two-qubit embedding
// in the product basis (|HH>, |HV>, |VH>, |VV>).

#include "wgmqed/errors.hpp"
#include "wgmqed/polarization.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

namespace wgmqed {

using Matrix3 = Eigen::Matrix3cd;
using Vector3 = Eigen::Vector3cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector4 = Eigen::Vector4cd;

inline constexpr double state_trace_tolerance = 1e-10;
inline constexpr double state_positivity_tolerance = 1e-9;

/// Columns map symmetric-basis coordinates to product-basis coordinates.
inline Eigen::Matrix<std::complex<double>, 4, 3> symmetric_embedding() {
    constexpr double r = std::numbers::sqrt2 / 2.0;
    Eigen::Matrix<std::complex<double>, 4, 3> e = Eigen::Matrix<std::complex<double>, 4, 3>::Zero();
    e(0, 0) = 1.0;
    e(1, 1) = r;
    e(2, 1) = r;
    e(3, 2) = 1.0;
    return e;
}

/// Density matrix of two indistinguishable photons on the symmetric subspace.
class TwoPhotonState {
public:
    TwoPhotonState() : rho_(Matrix3::Zero()) { rho_(0, 0) = 1.0; }

    /// Validates Hermiticity, unit trace and positivity.
    explicit TwoPhotonState(const Matrix3& rho) : rho_(rho) {
        if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
            throw InvalidArgument("two-photon density matrix is not Hermitian");
        }
        rho_ = (0.5 * (rho_ + rho_.adjoint())).eval();
        if (std::abs(rho_.trace().real() - 1.0) > state_trace_tolerance) {
            throw InvalidArgument("two-photon density matrix trace is not 1");
        }
        if (min_eigenvalue() < -state_positivity_tolerance) {
            throw InvalidArgument("two-photon density matrix is not positive semidefinite");
        }
    }

    static TwoPhotonState pure(const Vector3& psi) {
        const double n = psi.squaredNorm();
        if (!(n > 0.0)) throw InvalidArgument("zero state vector");
        return TwoPhotonState(psi * psi.adjoint() / n);
    }

    const Matrix3& matrix() const noexcept { return rho_; }
    std::complex<double> operator()(int i, int j) const { return rho_(i, j); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix3> es(rho_, Eigen::EigenvaluesOnly);
        return es.eigenvalues()(0);
    }

    /// 4x4 product-basis embedding; the antisymmetric component is exactly zero.
    Matrix4 embed() const {
        const auto e = symmetric_embedding();
        return e * rho_ * e.adjoint();
    }

private:
    Matrix3 rho_;
};

inline Matrix4 embed_4x4(const TwoPhotonState& state) { return state.embed(); }

struct IdealStates {
    Vector3 initial;  // both photons P-polarized
    Vector3 final;    // extra pi phase on |HH>
};

inline IdealStates ideal_states() {
    const double s2 = std::numbers::sqrt2;
    IdealStates out;
    out.initial = Vector3(0.5, s2 / 2.0, 0.5);
    out.final = Vector3(-0.5, s2 / 2.0, 0.5);
    return out;
}

/// Symmetric-basis coordinates of the two-photon product state |a>|b> projected
/// onto the symmetric subspace, i.e. P_sym|ab> (not normalized).
inline Vector3 symmetric_product(const JonesVector& a, const JonesVector& b) {
    constexpr double r = std::numbers::sqrt2 / 2.0;
    return Vector3(a.h * b.h, r * (a.h * b.v + a.v * b.h), a.v * b.v);
}

/// Symmetric-basis state of two photons sharing polarization `j` (normalized).
inline Vector3 twin_photon_state(const JonesVector& j) {
    const JonesVector u = j.normalized();
    return symmetric_product(u, u);
}

/// Product-basis 4-vector of a symmetric-basis 3-vector.
inline Vector4 to_product_basis(const Vector3& psi) { return symmetric_embedding() * psi; }

inline Matrix3 hermitian_sqrt(const Matrix3& m) {
    Eigen::SelfAdjointEigenSolver<Matrix3> es(m);
    Eigen::Vector3d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
inline double fidelity(const TwoPhotonState& a, const TwoPhotonState& b) {
    const Matrix3 sa = hermitian_sqrt(a.matrix());
    const Matrix3 inner = sa * b.matrix() * sa;
    Eigen::SelfAdjointEigenSolver<Matrix3> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
    double tr = 0.0;
    for (int k = 0; k < 3; ++k) tr += std::sqrt(std::max(0.0, es.eigenvalues()(k)));
    return tr * tr;
}

inline double fidelity(const TwoPhotonState& rho, const Vector3& psi) {
    return (psi.adjoint() * rho.matrix() * psi)(0).real() / psi.squaredNorm();
}

/// Ginibre-distributed random mixed state (full rank with probability 1).
template <typename Rng>
TwoPhotonState random_state(Rng& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    Matrix3 g;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g(i, j) = {n01(rng), n01(rng)};
    Matrix3 rho = g * g.adjoint();
    rho /= rho.trace().real();
    return TwoPhotonState(rho);
}

}  // namespace wgmqed

#endif
