#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mesh.hpp"

namespace dfs {

struct QuadRule1D {
    std::vector<double> nodes;   // in [-1, 1]
    std::vector<double> weights;
    std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

// Legendre P_n(t) and P_n'(t) by the three-term recurrence.
inline void legendre_with_derivative(int n, double t, double& p, double& dp)
{
    double p0 = 1.0, p1 = t;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * t * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (t * p1 - p0) / (t * t - 1.0);
}

inline double legendre(int n, double t)
{
    double p0 = 1.0, p1 = t;
    if (n == 0) return 1.0;
    for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * t * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

} // namespace detail

/// Gauss-Legendre rule with n points, exact for degree 2n-1. Nodes ascending.
inline QuadRule1D gauss_legendre(int n)
{
    if (n < 1 || n > 32) throw std::invalid_argument("gauss_legendre: n must be in [1, 32], got " + std::to_string(n));
    QuadRule1D rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Chebyshev guess for the (i+1)-th largest root, then Newton.
        double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double p = 0.0, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            detail::legendre_with_derivative(n, t, p, dp);
            const double dt = p / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        detail::legendre_with_derivative(n, t, p, dp);
        const auto idx = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[idx] = t;
        rule.weights[idx] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

/// Gauss-Lobatto points: the endpoints plus the roots of P'_{n-1}. Ascending, n >= 2.
inline std::vector<double> gauss_lobatto_points(int n)
{
    if (n < 2 || n > 32) throw std::invalid_argument("gauss_lobatto_points: n must be in [2, 32]");
    const int m = n - 1;
    std::vector<double> pts(static_cast<std::size_t>(n));
    pts.front() = -1.0;
    pts.back() = 1.0;
    for (int i = 1; i < m; ++i) {
        double t = -std::cos(std::numbers::pi * i / m);
        for (int it = 0; it < 100; ++it) {
            // q = P'_m, q' = P''_m from the Legendre ODE: (1-t^2)P'' = 2tP' - m(m+1)P
            double p = 0.0, dp = 0.0;
            detail::legendre_with_derivative(m, t, p, dp);
            const double d2p = (2.0 * t * dp - m * (m + 1.0) * p) / (1.0 - t * t);
            const double dt = dp / d2p;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        pts[static_cast<std::size_t>(i)] = t;
    }
    if (n % 2 == 1) pts[static_cast<std::size_t>(n / 2)] = 0.0;
    return pts;
}

/// Tensor Gauss rule with n points per direction on a physical cell.
template <class F>
double integrate_on_cell(const CellGeometry& geom, F&& f, int n)
{
    const QuadRule1D rule = gauss_legendre(n);
    double s = 0.0;
    for (std::size_t b = 0; b < rule.size(); ++b)
        for (std::size_t a = 0; a < rule.size(); ++a) {
            const auto [x, y] = geom.map(rule.nodes[a], rule.nodes[b]);
            s += rule.weights[a] * rule.weights[b] * f(x, y);
        }
    return s * geom.jacobian();
}

/// Module-wide default: k + 6 points per direction.
constexpr int default_quadrature_points(int k) { return k + 6; }

} // namespace dfs
