#pragma once

// Global assembly of
//   a(u, v)   = int grad u : grad v
//   d(u, v)   = int div u div v              (penalty / divergence form)
//   b(v, q)   = -int div v q                 (Bernardi-Raugel coupling)
//   (f, v)    = int f . v
// on the Dirichlet-reduced velocity DOFs. Accumulation goes through triplets.

#include <Eigen/SparseCore>

#include <cmath>
#include <functional>
#include <vector>

#include "fespace.hpp"
#include "poly2d.hpp"

namespace dfs {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct LinearOperator {
    SparseMatrix matrix;
    bool symmetric = false;

    Eigen::Index rows() const { return matrix.rows(); }
    Eigen::Index cols() const { return matrix.cols(); }
    Vector apply(const Vector& x) const { return matrix * x; }
    double energy(const Vector& x) const { return x.dot(matrix * x); }
};

namespace detail {

// Cell-local shape data for one velocity component at physical scale.
struct CellShapes {
    const Tabulation* tab = nullptr;
    double sx = 1.0, sy = 1.0; // reference-to-physical derivative factors
    double gx(int q, int i) const { return tab->grad_xi(q, i) * sx; }
    double gy(int q, int i) const { return tab->grad_eta(q, i) * sy; }
};

// Row index of a velocity DOF in the reduced numbering, or -1 when eliminated.
inline int reduced_index(const VelocitySpace& V, int c, int g)
{
    const int f = V[c].dofs.free_index(g);
    return f < 0 ? -1 : V.offset(c) + f;
}

inline SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const std::vector<Eigen::Triplet<double>>& t)
{
    SparseMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

} // namespace detail

/// Vector Laplacian a(u, v); block diagonal over the two components.
inline LinearOperator assemble_stiffness(const VelocitySpace& V, int nq = 0)
{
    if (nq <= 0) nq = default_quadrature_points(V.k);
    const Mesh& mesh = V.mesh;
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < 2; ++c) {
        const Tabulation tab = tabulate(V[c].element, nq);
        const int nb = tab.nb;
        std::vector<double> local(static_cast<std::size_t>(nb * nb));
        for (int j = 0; j < mesh.ny(); ++j)
            for (int i = 0; i < mesh.nx(); ++i) {
                const CellGeometry geom = mesh.cell(i, j);
                const detail::CellShapes sh{&tab, geom.dxi_dx(), geom.deta_dy()};
                std::fill(local.begin(), local.end(), 0.0);
                for (int q = 0; q < tab.nq; ++q) {
                    const double w = tab.weight[static_cast<std::size_t>(q)] * geom.jacobian();
                    for (int a = 0; a < nb; ++a)
                        for (int b = 0; b < nb; ++b)
                            local[static_cast<std::size_t>(a * nb + b)] +=
                                w * (sh.gx(q, a) * sh.gx(q, b) + sh.gy(q, a) * sh.gy(q, b));
                }
                const auto dofs = V[c].dofs.cell_dofs(mesh.cell_index(i, j));
                for (int a = 0; a < nb; ++a) {
                    const int r = detail::reduced_index(V, c, dofs[static_cast<std::size_t>(a)]);
                    if (r < 0) continue;
                    for (int b = 0; b < nb; ++b) {
                        const int s = detail::reduced_index(V, c, dofs[static_cast<std::size_t>(b)]);
                        if (s >= 0) trip.emplace_back(r, s, local[static_cast<std::size_t>(a * nb + b)]);
                    }
                }
            }
    }
    return {detail::from_triplets(V.num_free(), V.num_free(), trip), true};
}

/// Scalar operator  alpha * int u v + beta * int grad u . grad v  on a single space.
/// With `reduced` the Dirichlet DOFs are eliminated, otherwise all DOFs are kept.
inline LinearOperator assemble_scalar_form(const ScalarSpace& S, const Mesh& mesh, double mass_coeff,
                                           double stiff_coeff, bool reduced, int nq)
{
    const Tabulation tab = tabulate(S.element, nq);
    const int nb = tab.nb;
    const int n = reduced ? S.dofs.num_free() : S.dofs.total_dofs();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_cells() * nb * nb));
    std::vector<double> local(static_cast<std::size_t>(nb * nb));
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const CellGeometry geom = mesh.cell(i, j);
            const detail::CellShapes sh{&tab, geom.dxi_dx(), geom.deta_dy()};
            std::fill(local.begin(), local.end(), 0.0);
            for (int q = 0; q < tab.nq; ++q) {
                const double w = tab.weight[static_cast<std::size_t>(q)] * geom.jacobian();
                for (int a = 0; a < nb; ++a)
                    for (int b = 0; b < nb; ++b)
                        local[static_cast<std::size_t>(a * nb + b)] +=
                            w * (mass_coeff * tab.value(q, a) * tab.value(q, b) +
                                 stiff_coeff * (sh.gx(q, a) * sh.gx(q, b) + sh.gy(q, a) * sh.gy(q, b)));
            }
            const auto dofs = S.dofs.cell_dofs(mesh.cell_index(i, j));
            for (int a = 0; a < nb; ++a) {
                const int ga = dofs[static_cast<std::size_t>(a)];
                const int r = reduced ? S.dofs.free_index(ga) : ga;
                if (r < 0) continue;
                for (int b = 0; b < nb; ++b) {
                    const int gb = dofs[static_cast<std::size_t>(b)];
                    const int s = reduced ? S.dofs.free_index(gb) : gb;
                    if (s >= 0) trip.emplace_back(r, s, local[static_cast<std::size_t>(a * nb + b)]);
                }
            }
        }
    return {detail::from_triplets(n, n, trip), true};
}

inline LinearOperator assemble_mass(const ScalarSpace& S, const Mesh& mesh, int nq, bool reduced = true)
{
    return assemble_scalar_form(S, mesh, 1.0, 0.0, reduced, nq);
}

/// Full H^1 inner product (L^2 + seminorm) on the Dirichlet-reduced space.
inline LinearOperator assemble_h1_gram(const ScalarSpace& S, const Mesh& mesh, int nq)
{
    return assemble_scalar_form(S, mesh, 1.0, 1.0, true, nq);
}

/// D with v^T D v = ||div v_h||^2; couples both velocity components.
inline LinearOperator assemble_div_div(const VelocitySpace& V, int nq = 0)
{
    if (nq <= 0) nq = default_quadrature_points(V.k);
    const Mesh& mesh = V.mesh;
    const Tabulation t1 = tabulate(V[0].element, nq);
    const Tabulation t2 = tabulate(V[1].element, nq);
    const int n1 = t1.nb, n2 = t2.nb, n = n1 + n2;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_cells() * n * n));
    std::vector<double> divs(static_cast<std::size_t>(n));
    std::vector<double> local(static_cast<std::size_t>(n * n));
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const CellGeometry geom = mesh.cell(i, j);
            const int cell = mesh.cell_index(i, j);
            std::fill(local.begin(), local.end(), 0.0);
            for (int q = 0; q < t1.nq; ++q) {
                const double w = t1.weight[static_cast<std::size_t>(q)] * geom.jacobian();
                for (int a = 0; a < n1; ++a) divs[static_cast<std::size_t>(a)] = t1.grad_xi(q, a) * geom.dxi_dx();
                for (int a = 0; a < n2; ++a)
                    divs[static_cast<std::size_t>(n1 + a)] = t2.grad_eta(q, a) * geom.deta_dy();
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        local[static_cast<std::size_t>(a * n + b)] +=
                            w * divs[static_cast<std::size_t>(a)] * divs[static_cast<std::size_t>(b)];
            }
            const auto d1 = V[0].dofs.cell_dofs(cell);
            const auto d2 = V[1].dofs.cell_dofs(cell);
            for (int a = 0; a < n1; ++a) rows[static_cast<std::size_t>(a)] = detail::reduced_index(V, 0, d1[static_cast<std::size_t>(a)]);
            for (int a = 0; a < n2; ++a)
                rows[static_cast<std::size_t>(n1 + a)] = detail::reduced_index(V, 1, d2[static_cast<std::size_t>(a)]);
            for (int a = 0; a < n; ++a) {
                const int r = rows[static_cast<std::size_t>(a)];
                if (r < 0) continue;
                for (int b = 0; b < n; ++b) {
                    const int s = rows[static_cast<std::size_t>(b)];
                    if (s >= 0) trip.emplace_back(r, s, local[static_cast<std::size_t>(a * n + b)]);
                }
            }
        }
    return {detail::from_triplets(V.num_free(), V.num_free(), trip), true};
}

/// G with (G v)_q = sqrt(w_q |J|) div v_h(x_q) at every cell quadrature point, so that
/// ||G v||_2 = ||div v_h||_{L^2} and G^T G = D. Evaluating the norm through G avoids the
/// cancellation floor (~1e-8) of sqrt(v^T D v).
inline LinearOperator assemble_div_sampler(const VelocitySpace& V, int nq = 0)
{
    if (nq <= 0) nq = default_quadrature_points(V.k);
    const Mesh& mesh = V.mesh;
    const Tabulation t1 = tabulate(V[0].element, nq);
    const Tabulation t2 = tabulate(V[1].element, nq);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_cells() * t1.nq * (t1.nb + t2.nb)));
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const CellGeometry geom = mesh.cell(i, j);
            const int cell = mesh.cell_index(i, j);
            const auto d1 = V[0].dofs.cell_dofs(cell);
            const auto d2 = V[1].dofs.cell_dofs(cell);
            for (int q = 0; q < t1.nq; ++q) {
                const int row = cell * t1.nq + q;
                const double s = std::sqrt(t1.weight[static_cast<std::size_t>(q)] * geom.jacobian());
                for (int a = 0; a < t1.nb; ++a) {
                    const int c = detail::reduced_index(V, 0, d1[static_cast<std::size_t>(a)]);
                    if (c >= 0) trip.emplace_back(row, c, s * t1.grad_xi(q, a) * geom.dxi_dx());
                }
                for (int a = 0; a < t2.nb; ++a) {
                    const int c = detail::reduced_index(V, 1, d2[static_cast<std::size_t>(a)]);
                    if (c >= 0) trip.emplace_back(row, c, s * t2.grad_eta(q, a) * geom.deta_dy());
                }
            }
        }
    return {detail::from_triplets(mesh.num_cells() * t1.nq, V.num_free(), trip), false};
}

/// B with (B v)_q = b(v, q-th pressure basis) = -int div v_h q. Rows: all pressure DOFs.
inline LinearOperator assemble_div_pressure(const VelocitySpace& V, const ScalarSpace& P, int nq = 0)
{
    if (P.element.continuity() != Continuity::discontinuous)
        throw std::invalid_argument("assemble_div_pressure: pressure space must be discontinuous");
    if (nq <= 0) nq = default_quadrature_points(V.k);
    const Mesh& mesh = V.mesh;
    const Tabulation t1 = tabulate(V[0].element, nq);
    const Tabulation t2 = tabulate(V[1].element, nq);
    const Tabulation tp = tabulate(P.element, nq);
    const int n1 = t1.nb, n2 = t2.nb, np = tp.nb;
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> local(static_cast<std::size_t>(np * (n1 + n2)));
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const CellGeometry geom = mesh.cell(i, j);
            const int cell = mesh.cell_index(i, j);
            std::fill(local.begin(), local.end(), 0.0);
            for (int q = 0; q < t1.nq; ++q) {
                const double w = tp.weight[static_cast<std::size_t>(q)] * geom.jacobian();
                for (int a = 0; a < np; ++a) {
                    const double pq = -w * tp.value(q, a);
                    for (int b = 0; b < n1; ++b)
                        local[static_cast<std::size_t>(a * (n1 + n2) + b)] += pq * t1.grad_xi(q, b) * geom.dxi_dx();
                    for (int b = 0; b < n2; ++b)
                        local[static_cast<std::size_t>(a * (n1 + n2) + n1 + b)] +=
                            pq * t2.grad_eta(q, b) * geom.deta_dy();
                }
            }
            const auto dp = P.dofs.cell_dofs(cell);
            const auto d1 = V[0].dofs.cell_dofs(cell);
            const auto d2 = V[1].dofs.cell_dofs(cell);
            for (int a = 0; a < np; ++a) {
                const int r = dp[static_cast<std::size_t>(a)];
                for (int b = 0; b < n1 + n2; ++b) {
                    const int s = b < n1 ? detail::reduced_index(V, 0, d1[static_cast<std::size_t>(b)])
                                         : detail::reduced_index(V, 1, d2[static_cast<std::size_t>(b - n1)]);
                    if (s >= 0) trip.emplace_back(r, s, local[static_cast<std::size_t>(a * (n1 + n2) + b)]);
                }
            }
        }
    return {detail::from_triplets(P.dofs.total_dofs(), V.num_free(), trip), false};
}

/// (f, v) for every reduced velocity DOF.
template <class F1, class F2>
Vector assemble_load_fn(F1&& f1, F2&& f2, const VelocitySpace& V, int nq = 0)
{
    if (nq <= 0) nq = default_quadrature_points(V.k);
    const Mesh& mesh = V.mesh;
    Vector load = Vector::Zero(V.num_free());
    for (int c = 0; c < 2; ++c) {
        const Tabulation tab = tabulate(V[c].element, nq);
        for (int j = 0; j < mesh.ny(); ++j)
            for (int i = 0; i < mesh.nx(); ++i) {
                const CellGeometry geom = mesh.cell(i, j);
                const auto dofs = V[c].dofs.cell_dofs(mesh.cell_index(i, j));
                for (int q = 0; q < tab.nq; ++q) {
                    const auto [x, y] = geom.map(tab.xi[static_cast<std::size_t>(q)], tab.eta[static_cast<std::size_t>(q)]);
                    const double fq = (c == 0 ? f1(x, y) : f2(x, y)) * tab.weight[static_cast<std::size_t>(q)] * geom.jacobian();
                    for (int a = 0; a < tab.nb; ++a) {
                        const int r = detail::reduced_index(V, c, dofs[static_cast<std::size_t>(a)]);
                        if (r >= 0) load[r] += fq * tab.value(q, a);
                    }
                }
            }
    }
    return load;
}

inline Vector assemble_load(const BivariatePoly& f1, const BivariatePoly& f2, const VelocitySpace& V, int nq = 0)
{
    return assemble_load_fn(f1, f2, V, nq);
}

} // namespace dfs
