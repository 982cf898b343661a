#ifndef WGMQED_METRICS_HPP
#define WGMQED_METRICS_HPP

#include "wgmqed/errors.hpp"
#include "wgmqed/states.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

namespace wgmqed {

inline constexpr double default_phase_threshold = 1e-4;

/// Wootters concurrence of a two-qubit density matrix in the product basis.
/// With rho = A A', the square roots of the eigenvalues of rho rho~ are the
/// singular values of A^T (sigma_y x sigma_y) A. This avoids square roots of
/// round-off eigenvalues, so pure states come out exact to machine precision.
inline double concurrence(const Matrix4& rho) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9) throw InvalidArgument("concurrence: input is not Hermitian");
    const Matrix4 h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix4> es(h);
    if (es.eigenvalues()(0) < -state_positivity_tolerance) {
        throw InvalidArgument("concurrence: input has a negative eigenvalue");
    }
    if (std::abs(h.trace().real() - 1.0) > 1e-8) throw InvalidArgument("concurrence: trace is not 1");
    const Eigen::Vector4d sqrt_ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix4 a = es.eigenvectors() * sqrt_ev.asDiagonal();

    Matrix4 yy = Matrix4::Zero();  // sigma_y (x) sigma_y
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const Matrix4 tau = a.transpose() * yy * a;
    Eigen::JacobiSVD<Matrix4> svd(tau);
    const Eigen::Vector4d lam = svd.singularValues();  // descending
    return std::clamp(lam(0) - lam(1) - lam(2) - lam(3), 0.0, 1.0);
}

inline double concurrence(const TwoPhotonState& state) { return concurrence(state.embed()); }

/// Wraps an angle to (-pi, pi].
inline double wrap_phase(double phi) {
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(phi, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

/// arg(rho_{HH,S}) - arg(rho_{S,VV}) in (-pi, pi].
inline double nonlinear_phase(const TwoPhotonState& state, double threshold = default_phase_threshold) {
    const std::complex<double> hs = state(0, 1);
    const std::complex<double> sv = state(1, 2);
    if (std::abs(hs) < threshold || std::abs(sv) < threshold) {
        throw UndefinedPhase("off-diagonal elements too small to define the nonlinear phase");
    }
    return wrap_phase(std::arg(hs) - std::arg(sv));
}

/// Not the standard estimator: magnitude-weighted circular mean of the three
/// off-diagonal routes to phi_HH - 2 phi_S,
///   arg r01 - arg r12,  arg r02 - 2 arg r12,  2 arg r01 - arg r02.
inline double nonlinear_phase_all_elements(const TwoPhotonState& state, double threshold = default_phase_threshold) {
    const std::complex<double> a = state(0, 1);
    const std::complex<double> b = state(1, 2);
    const std::complex<double> c = state(0, 2);
    std::complex<double> acc{0.0, 0.0};
    if (std::abs(a) >= threshold && std::abs(b) >= threshold) acc += std::abs(a * b) * std::polar(1.0, std::arg(a) - std::arg(b));
    if (std::abs(c) >= threshold && std::abs(b) >= threshold) acc += std::abs(c * b) * std::polar(1.0, std::arg(c) - 2.0 * std::arg(b));
    if (std::abs(a) >= threshold && std::abs(c) >= threshold) acc += std::abs(a * c) * std::polar(1.0, 2.0 * std::arg(a) - std::arg(c));
    if (std::abs(acc) == 0.0) throw UndefinedPhase("no off-diagonal pair above threshold");
    return wrap_phase(std::arg(acc));
}

/// Phase in units of pi on (-0.5, 1.5]: values just past pi stay unwrapped.
inline double phase_display_units(double phi) {
    double x = wrap_phase(phi) / std::numbers::pi;
    if (x <= -0.5) x += 2.0;
    return x;
}

/// <psi_final| rho |psi_final>.
inline double overlap_ideal(const TwoPhotonState& state) {
    return std::clamp(fidelity(state, ideal_states().final), 0.0, 1.0);
}

struct MetricsReport {
    double overlap = 0.0;
    double concurrence = 0.0;
    std::optional<double> phase;  // radians in (-pi, pi]; empty when undefined
    double mean_delay_ns = 0.0;
    double window_ns = 0.0;
};

inline MetricsReport evaluate_metrics(const TwoPhotonState& state, double mean_delay_ns = 0.0, double window_ns = 0.0,
                                      double threshold = default_phase_threshold) {
    MetricsReport r;
    r.overlap = overlap_ideal(state);
    r.concurrence = concurrence(state);
    try {
        r.phase = nonlinear_phase(state, threshold);
    } catch (const UndefinedPhase&) {
        r.phase.reset();
    }
    r.mean_delay_ns = mean_delay_ns;
    r.window_ns = window_ns;
    return r;
}

/// Photon-photon sign-flip protocol with a stored first photon, tracked as an
/// explicit state vector over (photon 2 pol) x (photon 1 slot) x (atom).
///
/// Input and output are product-basis amplitudes ordered (H2H1, H2V1, V2H1, V2V1).
/// Steps: (1) an H photon 1 enters the resonator and is stored by switching
/// the atom to the uncoupled ground state; (2) photon 2's H component picks up
/// the empty-resonator pi phase only when the atom is uncoupled; (3) the stored
/// photon is released, returning the atom to the coupled state.
inline Vector4 sign_flip_gate(const Vector4& input) {
    if (std::abs(input.squaredNorm() - 1.0) > 1e-12) throw InvalidArgument("sign-flip gate input must be normalized");
    // index = ((p2 * 3) + slot1) * 2 + atom; p2 in {H, V}; slot1 in {H, V, stored}; atom in {coupl, uncoupl}.
    constexpr int H = 0, V = 1, stored = 2, coupl = 0, uncoupl = 1;
    auto idx = [](int p2, int slot1, int atom) { return (p2 * 3 + slot1) * 2 + atom; };
    Eigen::Matrix<std::complex<double>, 12, 1> psi = Eigen::Matrix<std::complex<double>, 12, 1>::Zero();
    psi(idx(H, H, coupl)) = input(0);
    psi(idx(H, V, coupl)) = input(1);
    psi(idx(V, H, coupl)) = input(2);
    psi(idx(V, V, coupl)) = input(3);

    // (1) conditional storage: |H1>|g_coupl> -> |0>|g_uncoupl>.
    for (int p2 : {H, V}) {
        std::swap(psi(idx(p2, H, coupl)), psi(idx(p2, stored, uncoupl)));
    }
    // (2) photon 2: pi phase on H when the resonator is empty of an active atom.
    for (int slot : {H, V, stored}) psi(idx(H, slot, uncoupl)) *= -1.0;
    // (3) retrieval: |0>|g_uncoupl> -> |H1>|g_coupl>.
    for (int p2 : {H, V}) {
        std::swap(psi(idx(p2, stored, uncoupl)), psi(idx(p2, H, coupl)));
    }

    for (int p2 : {H, V})
        for (int slot : {H, V, stored}) {
            if (std::abs(psi(idx(p2, slot, uncoupl))) > 1e-15) throw NumericalFailure("atom left entangled with photons");
        }
    if (std::abs(psi(idx(H, stored, coupl))) > 1e-15 || std::abs(psi(idx(V, stored, coupl))) > 1e-15) {
        throw NumericalFailure("photon left stored after retrieval");
    }
    return Vector4(psi(idx(H, H, coupl)), psi(idx(H, V, coupl)), psi(idx(V, H, coupl)), psi(idx(V, V, coupl)));
}

}  // namespace wgmqed

#endif
