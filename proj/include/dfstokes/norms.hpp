#pragma once

// Error norms against exact fields, divergence norms and log2 convergence rates.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "assembly.hpp"
#include "fespace.hpp"
#include "solvers.hpp"

namespace dfs {

/// Full-length (boundary included) coefficient vectors of both velocity components.
struct VelocityField {
    std::vector<double> c1, c2;
};

inline VelocityField expand_velocity(const VelocitySpace& V, const Vector& reduced)
{
    const auto n1 = static_cast<std::size_t>(V[0].dofs.num_free());
    const std::span<const double> all(reduced.data(), static_cast<std::size_t>(reduced.size()));
    return {V[0].dofs.expand(all.subspan(0, n1)), V[1].dofs.expand(all.subspan(n1))};
}

inline Vector reduce_velocity(const VelocitySpace& V, const VelocityField& f)
{
    const auto r1 = V[0].dofs.restrict_to_free(f.c1);
    const auto r2 = V[1].dofs.restrict_to_free(f.c2);
    Vector out(static_cast<Eigen::Index>(r1.size() + r2.size()));
    for (std::size_t i = 0; i < r1.size(); ++i) out[static_cast<Eigen::Index>(i)] = r1[i];
    for (std::size_t i = 0; i < r2.size(); ++i) out[static_cast<Eigen::Index>(r1.size() + i)] = r2[i];
    return out;
}

/// Value and gradient of an exact scalar field.
struct ExactScalar {
    std::function<double(double, double)> value;
    std::function<double(double, double)> dx;
    std::function<double(double, double)> dy;

    static ExactScalar from_poly(const BivariatePoly& p)
    {
        return {p, differentiate(p, Var::x), differentiate(p, Var::y)};
    }
    static ExactScalar zero()
    {
        auto z = [](double, double) { return 0.0; };
        return {z, z, z};
    }
};

namespace detail {

// sum over cells of int (alpha (u_h-u)^2 + beta |grad(u_h-u)|^2)
inline double scalar_error_sq(const ScalarSpace& S, const Mesh& mesh, std::span<const double> coeffs,
                              const ExactScalar& exact, double alpha, double beta, int nq)
{
    const Tabulation tab = tabulate(S.element, nq);
    double total = 0.0;
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const CellGeometry geom = mesh.cell(i, j);
            const auto dofs = S.dofs.cell_dofs(mesh.cell_index(i, j));
            for (int q = 0; q < tab.nq; ++q) {
                double v = 0.0, gx = 0.0, gy = 0.0;
                for (int a = 0; a < tab.nb; ++a) {
                    const double c = coeffs[static_cast<std::size_t>(dofs[static_cast<std::size_t>(a)])];
                    v += c * tab.value(q, a);
                    gx += c * tab.grad_xi(q, a);
                    gy += c * tab.grad_eta(q, a);
                }
                const auto [x, y] = geom.map(tab.xi[static_cast<std::size_t>(q)], tab.eta[static_cast<std::size_t>(q)]);
                const double w = tab.weight[static_cast<std::size_t>(q)] * geom.jacobian();
                if (alpha != 0.0) {
                    const double e = v - exact.value(x, y);
                    total += alpha * w * e * e;
                }
                if (beta != 0.0) {
                    const double ex = gx * geom.dxi_dx() - exact.dx(x, y);
                    const double ey = gy * geom.deta_dy() - exact.dy(x, y);
                    total += beta * w * (ex * ex + ey * ey);
                }
            }
        }
    return total;
}

} // namespace detail

/// ||u_h - u||_{L^2} for a scalar discrete field given by all-DOF coefficients.
inline double error_l2(const ScalarSpace& S, const Mesh& mesh, std::span<const double> coeffs,
                       const std::function<double(double, double)>& exact, int nq)
{
    const ExactScalar e{exact, {}, {}};
    return std::sqrt(detail::scalar_error_sq(S, mesh, coeffs, e, 1.0, 0.0, nq));
}

/// |u_h - u|_{H^1} (seminorm) for a scalar discrete field.
inline double error_h1_semi(const ScalarSpace& S, const Mesh& mesh, std::span<const double> coeffs,
                            const std::function<double(double, double)>& exact_dx,
                            const std::function<double(double, double)>& exact_dy, int nq)
{
    const ExactScalar e{{}, exact_dx, exact_dy};
    return std::sqrt(detail::scalar_error_sq(S, mesh, coeffs, e, 0.0, 1.0, nq));
}

/// Vector versions: sqrt of the sum over the two velocity components.
inline double velocity_error_l2(const VelocitySpace& V, const VelocityField& uh, const ExactScalar& u1,
                                const ExactScalar& u2, int nq = 0)
{
    if (nq <= 0) nq = default_quadrature_points(V.k);
    return std::sqrt(detail::scalar_error_sq(V[0], V.mesh, uh.c1, u1, 1.0, 0.0, nq) +
                     detail::scalar_error_sq(V[1], V.mesh, uh.c2, u2, 1.0, 0.0, nq));
}

inline double velocity_error_h1_semi(const VelocitySpace& V, const VelocityField& uh, const ExactScalar& u1,
                                     const ExactScalar& u2, int nq = 0)
{
    if (nq <= 0) nq = default_quadrature_points(V.k);
    return std::sqrt(detail::scalar_error_sq(V[0], V.mesh, uh.c1, u1, 0.0, 1.0, nq) +
                     detail::scalar_error_sq(V[1], V.mesh, uh.c2, u2, 0.0, 1.0, nq));
}

/// ||div v_h||_{L^2} through the assembled operator: sqrt(v^T D v) for the div-div form,
/// ||G v|| for a divergence sampler.
inline double div_norm(const LinearOperator& d, const Vector& v) { return std::sqrt(std::max(0.0, d.energy(v))); }
inline double div_norm_sampled(const LinearOperator& g, const Vector& v) { return (g.matrix * v).norm(); }

/// ||div v_h||_{L^2} by direct quadrature of the divergence.
inline double div_norm_quadrature(const VelocitySpace& V, const VelocityField& v, int nq = 0)
{
    if (nq <= 0) nq = default_quadrature_points(V.k);
    const Mesh& mesh = V.mesh;
    const Tabulation t1 = tabulate(V[0].element, nq);
    const Tabulation t2 = tabulate(V[1].element, nq);
    double total = 0.0;
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const CellGeometry geom = mesh.cell(i, j);
            const int cell = mesh.cell_index(i, j);
            const auto d1 = V[0].dofs.cell_dofs(cell);
            const auto d2 = V[1].dofs.cell_dofs(cell);
            for (int q = 0; q < t1.nq; ++q) {
                double dv = 0.0;
                for (int a = 0; a < t1.nb; ++a)
                    dv += v.c1[static_cast<std::size_t>(d1[static_cast<std::size_t>(a)])] * t1.grad_xi(q, a) * geom.dxi_dx();
                for (int a = 0; a < t2.nb; ++a)
                    dv += v.c2[static_cast<std::size_t>(d2[static_cast<std::size_t>(a)])] * t2.grad_eta(q, a) * geom.deta_dy();
                total += t1.weight[static_cast<std::size_t>(q)] * geom.jacobian() * dv * dv;
            }
        }
    return std::sqrt(total);
}

/// Convergence rate between two levels with halved h; empty when either error is saturated.
inline std::optional<double> rate(double coarse, double fine, double floor = 1e-14)
{
    if (!(coarse > floor) || !(fine > floor)) return std::nullopt;
    return std::log2(coarse / fine);
}

/// n_l = log2(e_{l-1} / e_l) for l >= 1; entry 0 is always empty.
inline std::vector<std::optional<double>> rates(std::span<const double> errors)
{
    std::vector<std::optional<double>> out(errors.size());
    for (std::size_t l = 1; l < errors.size(); ++l) out[l] = rate(errors[l - 1], errors[l]);
    return out;
}

} // namespace dfs
