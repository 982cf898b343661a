#ifndef WGMQED_TRANSMISSION_HPP
#define WGMQED_TRANSMISSION_HPP

// Single-photon input-output model of the fiber-coupled resonator: effective
// loss rate with an atom, amplitude transmission of H light (V passes with
// unit transmission), balanced input polarization, Gaussian averaging over
// the atom-resonator coupling and the coupling-rate sweep.

#include "wgmqed/errors.hpp"
#include "wgmqed/polarization.hpp"
#include "wgmqed/quadrature.hpp"
#include "wgmqed/qops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

namespace wgmqed {

inline constexpr int default_coupling_nodes = 64;

/// kL = g^2 / (gamma + i D_al) + kappa_i.
inline cplx effective_loss_rate(double g, double gamma, double delta_al, double kappa_i) {
    const cplx denom{gamma, delta_al};
    if (denom == cplx{0.0, 0.0}) throw SingularityError("effective loss rate: gamma = 0 and delta_al = 0");
    return g * g / denom + kappa_i;
}

/// t_H = (kL - kf + i D_rl) / (kL + kf + i D_rl).
inline cplx amplitude_transmission(cplx kappa_l, double kappa_f, double delta_rl) {
    const cplx denom = kappa_l + kappa_f + I_unit * delta_rl;
    if (std::abs(denom) == 0.0) throw SingularityError("amplitude transmission: zero denominator");
    return (kappa_l - kappa_f + I_unit * delta_rl) / denom;
}

inline cplx empty_transmission(double kappa_f, double kappa_i, double delta_rl) {
    return amplitude_transmission(cplx{kappa_i, 0.0}, kappa_f, delta_rl);
}

/// Transmission of H light with an atom of coupling g.
inline cplx atom_transmission(const SystemParams& p, double g) {
    return amplitude_transmission(effective_loss_rate(g, p.gamma, p.delta_al, p.kappa_i), p.kappa_f, p.delta_rl);
}

/// Unit-power input (alpha_H real > 0) whose empty-resonator output is M-polarized.
inline JonesVector balance_input(double kappa_f, double kappa_i, double delta_rl) {
    const cplx t0 = empty_transmission(kappa_f, kappa_i, delta_rl);
    if (std::abs(t0) < 1e-12) throw Unbalanceable("empty resonator is critically coupled (t_H,0 = 0)");
    const double alpha_h = 1.0 / std::sqrt(1.0 + std::norm(t0));
    return {cplx{alpha_h, 0.0}, -t0 * alpha_h};
}

inline JonesVector balance_input(const SystemParams& p) { return balance_input(p.kappa_f, p.kappa_i, p.delta_rl); }

struct TransmissionResult {
    cplx t_h;
    cplx t_v{1.0, 0.0};
    JonesVector jones_out;
    double p_overlap = 0.0;  // |<P|out>|^2 / |out|^2
    double survival = 0.0;   // |out|^2 / |in|^2
};

inline TransmissionResult transmit_with(const JonesVector& jones_in, cplx t_h) {
    const double in_power = jones_in.norm2();
    if (!(in_power > 0.0)) throw InvalidArgument("input Jones vector must be nonzero");
    TransmissionResult r;
    r.t_h = t_h;
    r.jones_out = {t_h * jones_in.h, jones_in.v};
    const double out_power = r.jones_out.norm2();
    r.survival = out_power / in_power;
    r.p_overlap = out_power > 0.0 ? std::norm(project(Pol::P, r.jones_out)) / out_power : 0.0;
    return r;
}

/// Pushes jones_in through the resonator, with the atom at coupling params.g or without atom.
inline TransmissionResult transmit(const JonesVector& jones_in, const SystemParams& params, bool atom_present) {
    params.validate();
    const cplx t = atom_present ? atom_transmission(params, params.g)
                                : empty_transmission(params.kappa_f, params.kappa_i, params.delta_rl);
    return transmit_with(jones_in, t);
}

inline QuadratureRule coupling_rule(const SystemParams& p, int nodes = default_coupling_nodes) {
    return truncated_normal_rule(p.g_mean, p.g_sigma, nodes);
}

/// E[f(g)] over the truncated normal coupling distribution of params.
inline double average_over_g(const SystemParams& params, const std::function<double(double)>& observable,
                             int nodes = default_coupling_nodes) {
    const QuadratureRule rule = coupling_rule(params, nodes);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) acc += rule.weights[k] * observable(rule.nodes[k]);
    return acc;
}

/// One row of the coupling sweep. Powers t2_* are normalized to the input power I0.
struct SweepRow {
    double kf_over_ki = 0.0;
    double p_overlap = 0.0;
    double survival = 0.0;
    double t2_h = 0.0;
    double t2_v = 0.0;
    double t2_p = 0.0;
    double t2_m = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> atom;   // Gaussian-averaged over g
    std::vector<SweepRow> empty;  // no atom
};

namespace detail {

inline SweepRow sweep_row(double kf_over_ki, const JonesVector& in, cplx t_h) {
    const TransmissionResult r = transmit_with(in, t_h);
    SweepRow row;
    row.kf_over_ki = kf_over_ki;
    row.p_overlap = r.p_overlap;
    row.survival = r.survival;
    row.t2_h = std::norm(r.jones_out.h);
    row.t2_v = std::norm(r.jones_out.v);
    row.t2_p = std::norm(project(Pol::P, r.jones_out));
    row.t2_m = std::norm(project(Pol::M, r.jones_out));
    return row;
}

}  // namespace detail

/// Sweeps kappa_f over kf_grid (values in units of kappa_i, ascending) with the balanced input.
inline SweepTable sweep_coupling(const SystemParams& params, std::span<const double> kf_grid,
                                 int nodes = default_coupling_nodes) {
    params.validate();
    if (kf_grid.empty()) throw InvalidArgument("coupling grid is empty");
    for (std::size_t k = 1; k < kf_grid.size(); ++k) {
        if (!(kf_grid[k] > kf_grid[k - 1])) throw InvalidArgument("coupling grid must be strictly ascending");
    }
    const QuadratureRule rule = coupling_rule(params, nodes);
    SweepTable table;
    for (double ratio : kf_grid) {
        if (!(ratio >= 0.0)) throw InvalidArgument("coupling grid values must be >= 0");
        SystemParams p = params;
        p.kappa_f = ratio * params.kappa_i;
        const JonesVector in = balance_input(p);
        table.empty.push_back(detail::sweep_row(ratio, in, empty_transmission(p.kappa_f, p.kappa_i, p.delta_rl)));

        SweepRow avg;
        avg.kf_over_ki = ratio;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const SweepRow r = detail::sweep_row(ratio, in, atom_transmission(p, rule.nodes[k]));
            const double w = rule.weights[k];
            avg.p_overlap += w * r.p_overlap;
            avg.survival += w * r.survival;
            avg.t2_h += w * r.t2_h;
            avg.t2_v += w * r.t2_v;
            avg.t2_p += w * r.t2_p;
            avg.t2_m += w * r.t2_m;
        }
        table.atom.push_back(avg);
    }
    return table;
}

inline std::vector<double> linear_grid(double first, double last, int count) {
    if (count < 1) throw InvalidArgument("grid needs at least one point");
    std::vector<double> out(count);
    for (int k = 0; k < count; ++k) out[k] = count == 1 ? first : first + (last - first) * k / (count - 1);
    return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "kappa_f_over_kappa_i,p_overlap,survival,t2_H,t2_V,t2_P,t2_M\n";
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(12);
    for (const SweepRow& r : rows) {
        os << r.kf_over_ki << ',' << r.p_overlap << ',' << r.survival << ',' << r.t2_h << ',' << r.t2_v << ','
           << r.t2_p << ',' << r.t2_m << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

struct CouplingFit {
    double g_mean = 0.0;
    double g_sigma = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Unweighted least-squares fit of (g_mean, g_sigma) to atom-coupled p_overlap and
/// survival curves over kf_grid (Levenberg-Marquardt, forward-difference Jacobian).
/// All other parameters of `params` are held fixed; params.g_mean / g_sigma seed the fit.
inline CouplingFit fit_coupling_distribution(const SystemParams& params, std::span<const double> kf_grid,
                                             std::span<const double> p_overlap, std::span<const double> survival,
                                             int nodes = default_coupling_nodes, int max_iterations = 200) {
    if (p_overlap.size() != kf_grid.size() || survival.size() != kf_grid.size()) {
        throw InvalidArgument("fit data must match the coupling grid");
    }
    const std::size_t m = 2 * kf_grid.size();
    // Work in MHz so both unknowns are O(1-10).
    auto residuals = [&](const Eigen::Vector2d& x) {
        SystemParams p = params;
        p.g_mean = angular(x(0));
        p.g_sigma = angular(std::abs(x(1)));
        const SweepTable t = sweep_coupling(p, kf_grid, nodes);
        Eigen::VectorXd r(m);
        for (std::size_t k = 0; k < kf_grid.size(); ++k) {
            r(2 * k) = t.atom[k].p_overlap - p_overlap[k];
            r(2 * k + 1) = t.atom[k].survival - survival[k];
        }
        return r;
    };

    Eigen::Vector2d x(to_mhz(params.g_mean), to_mhz(params.g_sigma));
    Eigen::VectorXd r = residuals(x);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    CouplingFit fit;
    for (int it = 0; it < max_iterations; ++it) {
        fit.iterations = it + 1;
        Eigen::MatrixXd jac(m, 2);
        for (int c = 0; c < 2; ++c) {
            Eigen::Vector2d xs = x;
            const double h = 1e-6 * std::max(1.0, std::abs(x(c)));
            xs(c) += h;
            jac.col(c) = (residuals(xs) - r) / h;
        }
        const Eigen::Matrix2d jtj = jac.transpose() * jac;
        const Eigen::Vector2d jtr = jac.transpose() * r;
        bool accepted = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            Eigen::Matrix2d a = jtj;
            a.diagonal() *= (1.0 + lambda);
            const Eigen::Vector2d step = a.ldlt().solve(-jtr);
            const Eigen::Vector2d xn = x + step;
            const Eigen::VectorXd rn = residuals(xn);
            const double cn = rn.squaredNorm();
            if (std::isfinite(cn) && cn < cost) {
                const bool small = step.norm() < 1e-10 * (1.0 + x.norm()) || (cost - cn) < 1e-16 * (1.0 + cost);
                x = xn;
                r = rn;
                cost = cn;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (small) fit.converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted || fit.converged || jtr.norm() < 1e-14) {
            fit.converged = true;
            break;
        }
    }
    fit.g_mean = angular(x(0));
    fit.g_sigma = angular(std::abs(x(1)));
    fit.residual_norm = std::sqrt(cost);
    return fit;
}

}  // namespace wgmqed

#endif
