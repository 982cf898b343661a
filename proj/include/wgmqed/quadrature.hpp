#ifndef WGMQED_QUADRATURE_HPP
#define WGMQED_QUADRATURE_HPP

#include "wgmqed/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace wgmqed {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
inline QuadratureRule gauss_legendre(int order) {
    if (order < 1) throw InvalidArgument("quadrature order must be >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k - 1, k) = beta;
        jacobi(k, k - 1) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int k = 0; k < order; ++k) {
        rule.nodes[k] = solver.eigenvalues()(k);
        const double v0 = solver.eigenvectors()(0, k);
        rule.weights[k] = 2.0 * v0 * v0;
    }
    return rule;
}

/// Normal(mean, sigma) truncated to [0, inf) and renormalized, integrated by
/// Gauss-Legendre over [max(0, mean - 8 sigma), mean + 8 sigma].
/// sigma == 0 gives a single node at the mean.
inline QuadratureRule truncated_normal_rule(double mean, double sigma, int order) {
    if (sigma < 0.0) throw InvalidArgument("standard deviation must be >= 0");
    if (sigma == 0.0) {
        if (mean < 0.0) throw InvalidArgument("point distribution must sit at g >= 0");
        return {{mean}, {1.0}};
    }
    const double lo = std::max(0.0, mean - 8.0 * sigma);
    const double hi = mean + 8.0 * sigma;
    if (!(hi > lo)) throw InvalidArgument("coupling distribution has no mass at g >= 0");
    const QuadratureRule base = gauss_legendre(order);
    QuadratureRule rule;
    double total = 0.0;
    for (std::size_t k = 0; k < base.size(); ++k) {
        const double x = 0.5 * (hi - lo) * base.nodes[k] + 0.5 * (hi + lo);
        const double z = (x - mean) / sigma;
        const double w = 0.5 * (hi - lo) * base.weights[k] * std::exp(-0.5 * z * z);
        rule.nodes.push_back(x);
        rule.weights.push_back(w);
        total += w;
    }
    if (!(total > 0.0)) throw NumericalFailure("coupling distribution quadrature has zero weight");
    for (double& w : rule.weights) w /= total;
    return rule;
}

}  // namespace wgmqed

#endif
