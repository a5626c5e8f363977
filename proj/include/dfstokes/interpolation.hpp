#pragma once

// Interpolation into the velocity and pressure spaces:
//  - nodal Lagrange interpolation at the element lattice,
//  - the moment interpolant (vertex values, Legendre edge moments, Legendre interior
//    moments), used for the superconvergence estimates,
//  - the Riesz-represented dual norm of  psi -> int (u - u_I)_a psi_b.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "fespace.hpp"
#include "norms.hpp"
#include "quadrature.hpp"
#include "solvers.hpp"

namespace dfs {

using Field2D = std::function<double(double, double)>;

/// Coefficients = field values at every lattice node of the space (all DOFs).
inline std::vector<double> nodal_interpolate(const ScalarSpace& S, const Field2D& f)
{
    std::vector<double> out(static_cast<std::size_t>(S.dofs.total_dofs()));
    for (int g = 0; g < S.dofs.total_dofs(); ++g) {
        const auto [x, y] = S.dofs.point(g);
        out[static_cast<std::size_t>(g)] = f(x, y);
    }
    return out;
}

inline VelocityField lagrange_interpolate(const Field2D& u1, const Field2D& u2, const VelocitySpace& V)
{
    return {nodal_interpolate(V[0], u1), nodal_interpolate(V[1], u2)};
}

/// Mean of a discrete scalar field over the mesh.
inline double field_mean(const ScalarSpace& S, const Mesh& mesh, std::span<const double> coeffs, int nq)
{
    const Tabulation tab = tabulate(S.element, nq);
    double integral = 0.0, area = 0.0;
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const CellGeometry geom = mesh.cell(i, j);
            const auto dofs = S.dofs.cell_dofs(mesh.cell_index(i, j));
            for (int q = 0; q < tab.nq; ++q) {
                double v = 0.0;
                for (int a = 0; a < tab.nb; ++a)
                    v += coeffs[static_cast<std::size_t>(dofs[static_cast<std::size_t>(a)])] * tab.value(q, a);
                integral += tab.weight[static_cast<std::size_t>(q)] * geom.jacobian() * v;
            }
            area += geom.hx * geom.hy;
        }
    return integral / area;
}

/// Per-cell nodal interpolation into a discontinuous space, shifted to zero mean.
inline std::vector<double> interpolate_pressure(const Field2D& p, const ScalarSpace& P, const Mesh& mesh, int nq)
{
    std::vector<double> c = nodal_interpolate(P, p);
    const double mean = field_mean(P, mesh, c, nq);
    for (double& v : c) v -= mean;
    return c;
}

/// Local unisolvent system of the moment interpolant for Q_{deg_x,deg_y} (deg >= 1).
/// Conditions in order: 4 vertex values; on the bottom and top edges, moments against
/// Legendre polynomials of degree < deg_x - 1; on the left and right edges, degree < deg_y - 1;
/// interior moments against L_a(xi) L_b(eta), a < deg_x - 1, b < deg_y - 1.
class MomentInterpolationSystem {
public:
    explicit MomentInterpolationSystem(const ScalarElement& elem, int nq = 0) : elem_(elem)
    {
        const int mx = elem.deg_x() - 1, my = elem.deg_y() - 1; // moment counts per edge
        if (mx < 0 || my < 0) throw std::invalid_argument("MomentInterpolationSystem: degrees must be >= 1");
        nq_ = nq > 0 ? nq : std::max(elem.deg_x(), elem.deg_y()) + 2;
        rule_ = gauss_legendre(nq_);
        const int n = elem.num_nodes();
        if (num_conditions() != n)
            throw std::logic_error("MomentInterpolationSystem: condition count does not match dimension");
        Eigen::MatrixXd m(n, n);
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int col = 0; col < n; ++col) {
            auto phi = [&](double xi, double eta) {
                elem.eval(xi, eta, v, {}, {});
                return v[static_cast<std::size_t>(col)];
            };
            const std::vector<double> row = apply(phi);
            for (int r = 0; r < n; ++r) m(r, col) = row[static_cast<std::size_t>(r)];
        }
        matrix_ = m;
        lu_ = m.fullPivLu();
        if (!lu_.isInvertible()) throw SolverError("MomentInterpolationSystem: singular local system");
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        const auto& s = svd.singularValues();
        condition_ = s(0) / s(s.size() - 1);
    }

    int num_conditions() const
    {
        const int mx = elem_.deg_x() - 1, my = elem_.deg_y() - 1;
        return 4 + 2 * mx + 2 * my + mx * my;
    }
    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
    double condition_number() const noexcept { return condition_; }
    double determinant() const { return lu_.determinant(); }

    /// Evaluate all conditions on a function of reference coordinates.
    template <class F>
    std::vector<double> apply(F&& f) const
    {
        const int mx = elem_.deg_x() - 1, my = elem_.deg_y() - 1;
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(num_conditions()));
        out.push_back(f(-1.0, -1.0));
        out.push_back(f(1.0, -1.0));
        out.push_back(f(-1.0, 1.0));
        out.push_back(f(1.0, 1.0));
        const auto& t = rule_.nodes;
        const auto& w = rule_.weights;
        for (double eta : {-1.0, 1.0})
            for (int m = 0; m < mx; ++m) {
                double s = 0.0;
                for (std::size_t q = 0; q < t.size(); ++q) s += w[q] * f(t[q], eta) * detail::legendre(m, t[q]);
                out.push_back(s);
            }
        for (double xi : {-1.0, 1.0})
            for (int m = 0; m < my; ++m) {
                double s = 0.0;
                for (std::size_t q = 0; q < t.size(); ++q) s += w[q] * f(xi, t[q]) * detail::legendre(m, t[q]);
                out.push_back(s);
            }
        for (int b = 0; b < my; ++b)
            for (int a = 0; a < mx; ++a) {
                double s = 0.0;
                for (std::size_t q = 0; q < t.size(); ++q)
                    for (std::size_t p = 0; p < t.size(); ++p)
                        s += w[p] * w[q] * f(t[p], t[q]) * detail::legendre(a, t[p]) * detail::legendre(b, t[q]);
                out.push_back(s);
            }
        return out;
    }

    /// Local nodal coefficients of the interpolant of f (reference coordinates).
    template <class F>
    Eigen::VectorXd solve(F&& f) const
    {
        const std::vector<double> rhs = apply(std::forward<F>(f));
        return lu_.solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size())));
    }

private:
    ScalarElement elem_;
    int nq_ = 0;
    QuadRule1D rule_;
    Eigen::MatrixXd matrix_;
    Eigen::FullPivLU<Eigen::MatrixXd> lu_;
    double condition_ = 0.0;
};

/// Discrete field stored cell by cell: coeffs[cell * nloc + local].
struct CellwiseField {
    int nloc = 0;
    std::vector<double> coeffs;

    std::span<const double> cell(int c) const
    {
        return {coeffs.data() + static_cast<std::size_t>(c * nloc), static_cast<std::size_t>(nloc)};
    }
};

/// Moment interpolant of u into the continuous space S (one velocity component).
/// Moments use `nq` Gauss points per direction (default: k + 6 with k = min degree).
inline CellwiseField moment_interpolate(const Field2D& u, const ScalarSpace& S, const Mesh& mesh, int nq = 0)
{
    if (S.element.continuity() != Continuity::continuous)
        throw std::invalid_argument("moment_interpolate: space must be continuous");
    if (nq <= 0) nq = default_quadrature_points(std::min(S.element.deg_x(), S.element.deg_y()));
    const MomentInterpolationSystem sys(S.element, nq);
    CellwiseField out{S.element.num_nodes(), {}};
    out.coeffs.resize(static_cast<std::size_t>(mesh.num_cells() * out.nloc));
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const CellGeometry geom = mesh.cell(i, j);
            const Eigen::VectorXd local = sys.solve([&](double xi, double eta) {
                const auto [x, y] = geom.map(xi, eta);
                return u(x, y);
            });
            const int c = mesh.cell_index(i, j);
            for (int l = 0; l < out.nloc; ++l) out.coeffs[static_cast<std::size_t>(c * out.nloc + l)] = local[l];
        }
    return out;
}

/// Global (all-DOF) coefficients from a cellwise continuous field; shared nodes are averaged.
inline std::vector<double> to_global(const CellwiseField& f, const ScalarSpace& S, const Mesh& mesh)
{
    std::vector<double> sum(static_cast<std::size_t>(S.dofs.total_dofs()), 0.0);
    std::vector<int> count(sum.size(), 0);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto dofs = S.dofs.cell_dofs(c);
        const auto local = f.cell(c);
        for (int l = 0; l < f.nloc; ++l) {
            sum[static_cast<std::size_t>(dofs[static_cast<std::size_t>(l)])] += local[static_cast<std::size_t>(l)];
            ++count[static_cast<std::size_t>(dofs[static_cast<std::size_t>(l)])];
        }
    }
    for (std::size_t g = 0; g < sum.size(); ++g) sum[g] /= count[g];
    return sum;
}

inline CellwiseField to_cellwise(const ScalarSpace& S, const Mesh& mesh, std::span<const double> global)
{
    CellwiseField out{S.element.num_nodes(), {}};
    out.coeffs.resize(static_cast<std::size_t>(mesh.num_cells() * out.nloc));
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto dofs = S.dofs.cell_dofs(c);
        for (int l = 0; l < out.nloc; ++l)
            out.coeffs[static_cast<std::size_t>(c * out.nloc + l)] = global[static_cast<std::size_t>(dofs[static_cast<std::size_t>(l)])];
    }
    return out;
}

/// Moment interpolant of both velocity components, assembled into global coefficients.
inline VelocityField moment_interpolate_velocity(const Field2D& u1, const Field2D& u2, const VelocitySpace& V,
                                                 int nq = 0)
{
    if (nq <= 0) nq = default_quadrature_points(V.k);
    return {to_global(moment_interpolate(u1, V[0], V.mesh, nq), V[0], V.mesh),
            to_global(moment_interpolate(u2, V[1], V.mesh, nq), V[1], V.mesh)};
}

enum class DerivativePair { xx, yy, xy, yx };

inline std::string to_string(DerivativePair p)
{
    switch (p) {
    case DerivativePair::xx: return "xx";
    case DerivativePair::yy: return "yy";
    case DerivativePair::xy: return "xy";
    case DerivativePair::yx: return "yx";
    }
    return "?";
}

/// sup over psi in the Dirichlet-reduced test space of |int (u - u_I)_a psi_b| / ||psi||_{H^1},
/// evaluated exactly as sqrt(r^T G^{-1} r) with G the H^1 Gram matrix.
///   component: 0 -> u_I in Q_{k+1,k}, 1 -> u_I in Q_{k,k+1}
///   test_space: 0 -> V_{h,1}, 1 -> V_{h,2}
inline double lemma_functional_norm(const ExactScalar& u, int component, DerivativePair pair, int test_space,
                                    const VelocitySpace& V, int nq = 0)
{
    if (component < 0 || component > 1 || test_space < 0 || test_space > 1)
        throw std::invalid_argument("lemma_functional_norm: component and test space must be 0 or 1");
    if (nq <= 0) nq = default_quadrature_points(V.k);
    const Mesh& mesh = V.mesh;
    const ScalarSpace& U = V[component];
    const ScalarSpace& T = V[test_space];
    const CellwiseField ui = moment_interpolate(u.value, U, mesh, nq);
    const Tabulation tu = tabulate(U.element, nq);
    const Tabulation tt = tabulate(T.element, nq);
    const bool a_is_x = pair == DerivativePair::xx || pair == DerivativePair::xy;
    const bool b_is_x = pair == DerivativePair::xx || pair == DerivativePair::yx;

    Vector residual = Vector::Zero(T.dofs.num_free());
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const CellGeometry geom = mesh.cell(i, j);
            const int c = mesh.cell_index(i, j);
            const auto local = ui.cell(c);
            const auto tdofs = T.dofs.cell_dofs(c);
            for (int q = 0; q < tu.nq; ++q) {
                const auto [x, y] = geom.map(tu.xi[static_cast<std::size_t>(q)], tu.eta[static_cast<std::size_t>(q)]);
                double dui = 0.0;
                for (int l = 0; l < tu.nb; ++l)
                    dui += local[static_cast<std::size_t>(l)] *
                           (a_is_x ? tu.grad_xi(q, l) * geom.dxi_dx() : tu.grad_eta(q, l) * geom.deta_dy());
                const double err = (a_is_x ? u.dx(x, y) : u.dy(x, y)) - dui;
                const double w = tu.weight[static_cast<std::size_t>(q)] * geom.jacobian() * err;
                for (int l = 0; l < tt.nb; ++l) {
                    const int f = T.dofs.free_index(tdofs[static_cast<std::size_t>(l)]);
                    if (f < 0) continue;
                    residual[f] += w * (b_is_x ? tt.grad_xi(q, l) * geom.dxi_dx() : tt.grad_eta(q, l) * geom.deta_dy());
                }
            }
        }
    if (residual.size() == 0) return 0.0;
    const LinearOperator gram = assemble_h1_gram(T, mesh, nq);
    const SpdSolver solver(gram.matrix);
    const Vector riesz = solver.solve(residual);
    return std::sqrt(std::max(0.0, residual.dot(riesz)));
}

} // namespace dfs
