#pragma once

// Tensor-product Lagrange elements Q_{m,n} on rectangles and their global DOF maps:
// the continuous velocity components Q_{k+1,k} x Q_{k,k+1} with homogeneous Dirichlet
// boundary, and discontinuous per-cell spaces for pressures.

#include <array>
#include <cassert>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mesh.hpp"
#include "quadrature.hpp"

namespace dfs {

enum class NodeFamily {
    equispaced,     ///< endpoints included, uniform spacing
    gauss_lobatto,  ///< endpoints plus roots of P'_n
    gauss_legendre, ///< interior Gauss points (discontinuous spaces only)
};

enum class Continuity { continuous, discontinuous };

enum class NodeEntity { vertex, horizontal_edge, vertical_edge, interior };

inline std::vector<double> lattice_points(int degree, NodeFamily family)
{
    if (degree < 0) throw std::invalid_argument("lattice_points: negative degree");
    switch (family) {
    case NodeFamily::gauss_legendre:
        return gauss_legendre(degree + 1).nodes;
    case NodeFamily::gauss_lobatto:
        if (degree == 0) throw std::invalid_argument("lattice_points: Lobatto lattice needs degree >= 1");
        return gauss_lobatto_points(degree + 1);
    case NodeFamily::equispaced:
        break;
    }
    if (degree == 0) return {0.0};
    std::vector<double> t(static_cast<std::size_t>(degree + 1));
    for (int i = 0; i <= degree; ++i) t[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / degree;
    return t;
}

/// 1D Lagrange basis on a node set in [-1,1].
class LagrangeBasis1D {
public:
    LagrangeBasis1D() = default;
    explicit LagrangeBasis1D(std::vector<double> nodes) : nodes_(std::move(nodes))
    {
        const std::size_t n = nodes_.size();
        denom_.assign(n, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) denom_[i] *= nodes_[i] - nodes_[j];
    }

    int size() const noexcept { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }

    double value(int i, double t) const
    {
        double v = 1.0;
        for (int j = 0; j < size(); ++j)
            if (j != i) v *= t - nodes_[static_cast<std::size_t>(j)];
        return v / denom_[static_cast<std::size_t>(i)];
    }

    double derivative(int i, double t) const
    {
        double s = 0.0;
        for (int m = 0; m < size(); ++m) {
            if (m == i) continue;
            double v = 1.0;
            for (int j = 0; j < size(); ++j)
                if (j != i && j != m) v *= t - nodes_[static_cast<std::size_t>(j)];
            s += v;
        }
        return s / denom_[static_cast<std::size_t>(i)];
    }

private:
    std::vector<double> nodes_;
    std::vector<double> denom_;
};

/// Reference element Q_{deg_x,deg_y} on [-1,1]^2 with a tensor lattice of Lagrange nodes.
/// Local node (a, b) has index b * (deg_x + 1) + a.
class ScalarElement {
public:
    ScalarElement(int deg_x, int deg_y, Continuity continuity, NodeFamily family)
        : deg_x_(deg_x), deg_y_(deg_y), continuity_(continuity), family_(family)
    {
        if (deg_x < 0 || deg_y < 0) throw std::invalid_argument("ScalarElement: negative degree");
        if (continuity == Continuity::continuous && (deg_x < 1 || deg_y < 1))
            throw std::invalid_argument("ScalarElement: continuous elements need degree >= 1 in each direction");
        if (continuity == Continuity::continuous && family == NodeFamily::gauss_legendre)
            throw std::invalid_argument("ScalarElement: continuous elements need endpoint nodes");
        bx_ = LagrangeBasis1D(lattice_points(deg_x, family));
        by_ = LagrangeBasis1D(lattice_points(deg_y, family));
    }

    int deg_x() const noexcept { return deg_x_; }
    int deg_y() const noexcept { return deg_y_; }
    Continuity continuity() const noexcept { return continuity_; }
    NodeFamily family() const noexcept { return family_; }
    int num_nodes() const noexcept { return (deg_x_ + 1) * (deg_y_ + 1); }
    const LagrangeBasis1D& basis_x() const noexcept { return bx_; }
    const LagrangeBasis1D& basis_y() const noexcept { return by_; }

    std::array<double, 2> node(int local) const
    {
        const int a = local % (deg_x_ + 1), b = local / (deg_x_ + 1);
        return {bx_.nodes()[static_cast<std::size_t>(a)], by_.nodes()[static_cast<std::size_t>(b)]};
    }

    NodeEntity entity(int local) const
    {
        if (continuity_ == Continuity::discontinuous) return NodeEntity::interior;
        const int a = local % (deg_x_ + 1), b = local / (deg_x_ + 1);
        const bool end_x = a == 0 || a == deg_x_;
        const bool end_y = b == 0 || b == deg_y_;
        if (end_x && end_y) return NodeEntity::vertex;
        if (end_y) return NodeEntity::horizontal_edge;
        if (end_x) return NodeEntity::vertical_edge;
        return NodeEntity::interior;
    }

    /// Values and reference gradients of all local shape functions at (xi, eta).
    void eval(double xi, double eta, std::span<double> val, std::span<double> dxi, std::span<double> deta) const
    {
        assert(val.size() >= static_cast<std::size_t>(num_nodes()));
        thread_local std::vector<double> vx, dx, vy, dy;
        tabulate_1d(bx_, xi, vx, dx);
        tabulate_1d(by_, eta, vy, dy);
        for (int b = 0; b <= deg_y_; ++b)
            for (int a = 0; a <= deg_x_; ++a) {
                const auto i = static_cast<std::size_t>(b * (deg_x_ + 1) + a);
                val[i] = vx[static_cast<std::size_t>(a)] * vy[static_cast<std::size_t>(b)];
                if (!dxi.empty()) dxi[i] = dx[static_cast<std::size_t>(a)] * vy[static_cast<std::size_t>(b)];
                if (!deta.empty()) deta[i] = vx[static_cast<std::size_t>(a)] * dy[static_cast<std::size_t>(b)];
            }
    }

private:
    static void tabulate_1d(const LagrangeBasis1D& basis, double t, std::vector<double>& v, std::vector<double>& d)
    {
        const auto n = static_cast<std::size_t>(basis.size());
        v.resize(n);
        d.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = basis.value(static_cast<int>(i), t);
            d[i] = basis.derivative(static_cast<int>(i), t);
        }
    }

    int deg_x_, deg_y_;
    Continuity continuity_;
    NodeFamily family_;
    LagrangeBasis1D bx_, by_;
};

/// Local-to-global numbering of a scalar element over a structured mesh.
///
/// Continuous spaces share the global lattice of (deg_x*nx + 1) x (deg_y*ny + 1) points;
/// nodes on the domain boundary are flagged as Dirichlet. Discontinuous spaces number
/// each cell's nodes contiguously and have no boundary DOFs.
class DofMap {
public:
    DofMap(const Mesh& mesh, const ScalarElement& elem, bool dirichlet = true)
        : nloc_(elem.num_nodes())
    {
        const int dx = elem.deg_x(), dy = elem.deg_y();
        const int ncells = mesh.num_cells();
        cell_dofs_.resize(static_cast<std::size_t>(ncells * nloc_));
        if (elem.continuity() == Continuity::continuous) {
            const int gx = dx * mesh.nx() + 1, gy = dy * mesh.ny() + 1;
            total_ = gx * gy;
            points_.resize(static_cast<std::size_t>(total_));
            boundary_.assign(static_cast<std::size_t>(total_), 0);
            for (int j = 0; j < mesh.ny(); ++j)
                for (int i = 0; i < mesh.nx(); ++i) {
                    const CellGeometry geom = mesh.cell(i, j);
                    const int c = mesh.cell_index(i, j);
                    for (int b = 0; b <= dy; ++b)
                        for (int a = 0; a <= dx; ++a) {
                            const int ga = i * dx + a, gb = j * dy + b;
                            const int g = gb * gx + ga;
                            const int local = b * (dx + 1) + a;
                            cell_dofs_[static_cast<std::size_t>(c * nloc_ + local)] = g;
                            const auto [rx, ry] = elem.node(local);
                            points_[static_cast<std::size_t>(g)] = geom.map(rx, ry);
                            if (dirichlet && (ga == 0 || ga == gx - 1 || gb == 0 || gb == gy - 1))
                                boundary_[static_cast<std::size_t>(g)] = 1;
                        }
                }
        } else {
            total_ = ncells * nloc_;
            points_.resize(static_cast<std::size_t>(total_));
            boundary_.assign(static_cast<std::size_t>(total_), 0);
            for (int j = 0; j < mesh.ny(); ++j)
                for (int i = 0; i < mesh.nx(); ++i) {
                    const CellGeometry geom = mesh.cell(i, j);
                    const int c = mesh.cell_index(i, j);
                    for (int l = 0; l < nloc_; ++l) {
                        const int g = c * nloc_ + l;
                        cell_dofs_[static_cast<std::size_t>(g)] = g;
                        const auto [rx, ry] = elem.node(l);
                        points_[static_cast<std::size_t>(g)] = geom.map(rx, ry);
                    }
                }
        }
        free_index_.assign(static_cast<std::size_t>(total_), -1);
        for (int g = 0; g < total_; ++g)
            if (!boundary_[static_cast<std::size_t>(g)]) {
                free_index_[static_cast<std::size_t>(g)] = static_cast<int>(free_to_global_.size());
                free_to_global_.push_back(g);
            }
    }

    int total_dofs() const noexcept { return total_; }
    int num_free() const noexcept { return static_cast<int>(free_to_global_.size()); }
    int num_boundary() const noexcept { return total_ - num_free(); }
    int dofs_per_cell() const noexcept { return nloc_; }

    std::span<const int> cell_dofs(int cell) const
    {
        return {cell_dofs_.data() + static_cast<std::size_t>(cell * nloc_), static_cast<std::size_t>(nloc_)};
    }
    bool is_boundary(int g) const { return boundary_[static_cast<std::size_t>(g)] != 0; }
    /// Index into the Dirichlet-reduced vector, or -1 for boundary DOFs.
    int free_index(int g) const { return free_index_[static_cast<std::size_t>(g)]; }
    const std::vector<int>& free_dofs() const noexcept { return free_to_global_; }
    std::array<double, 2> point(int g) const { return points_[static_cast<std::size_t>(g)]; }

    std::vector<int> boundary_dofs() const
    {
        std::vector<int> out;
        for (int g = 0; g < total_; ++g)
            if (is_boundary(g)) out.push_back(g);
        return out;
    }

    /// Expand a Dirichlet-reduced vector to all DOFs (boundary entries zero).
    std::vector<double> expand(std::span<const double> free_values) const
    {
        std::vector<double> full(static_cast<std::size_t>(total_), 0.0);
        for (std::size_t f = 0; f < free_to_global_.size(); ++f)
            full[static_cast<std::size_t>(free_to_global_[f])] = free_values[f];
        return full;
    }

    std::vector<double> restrict_to_free(std::span<const double> full) const
    {
        std::vector<double> out(free_to_global_.size());
        for (std::size_t f = 0; f < free_to_global_.size(); ++f)
            out[f] = full[static_cast<std::size_t>(free_to_global_[f])];
        return out;
    }

private:
    int nloc_;
    int total_ = 0;
    std::vector<int> cell_dofs_;
    std::vector<char> boundary_;
    std::vector<int> free_index_;
    std::vector<int> free_to_global_;
    std::vector<std::array<double, 2>> points_;
};

/// A scalar element together with its global numbering on a mesh.
struct ScalarSpace {
    ScalarElement element;
    DofMap dofs;
};

/// V_h = V_{h,1} x V_{h,2} with V_{h,1} of type Q_{k+1,k} and V_{h,2} of type Q_{k,k+1}.
/// The Dirichlet-reduced velocity vector stores component 1 first, then component 2.
struct VelocitySpace {
    Mesh mesh;
    int k;
    std::array<ScalarSpace, 2> comp;

    int num_free() const { return comp[0].dofs.num_free() + comp[1].dofs.num_free(); }
    int offset(int c) const { return c == 0 ? 0 : comp[0].dofs.num_free(); }
    const ScalarSpace& operator[](int c) const { return comp[static_cast<std::size_t>(c)]; }
};

constexpr int max_supported_k = 3;

inline ScalarSpace make_scalar_space(const Mesh& mesh, int deg_x, int deg_y, Continuity continuity,
                                     NodeFamily family, bool dirichlet = true)
{
    ScalarElement e(deg_x, deg_y, continuity, family);
    DofMap d(mesh, e, dirichlet && continuity == Continuity::continuous);
    return {std::move(e), std::move(d)};
}

inline VelocitySpace velocity_space(const Mesh& mesh, int k, NodeFamily family = NodeFamily::gauss_lobatto,
                                    bool dirichlet = true)
{
    if (k < 1 || k > max_supported_k)
        throw std::invalid_argument("velocity_space: k must be 1, 2 or 3, got " + std::to_string(k));
    if (family == NodeFamily::gauss_legendre)
        throw std::invalid_argument("velocity_space: continuous lattice needs endpoint nodes");
    return VelocitySpace{mesh, k,
                         {make_scalar_space(mesh, k + 1, k, Continuity::continuous, family, dirichlet),
                          make_scalar_space(mesh, k, k + 1, Continuity::continuous, family, dirichlet)}};
}

/// Discontinuous per-cell Q_deg.
inline ScalarSpace discontinuous_space(const Mesh& mesh, int deg, NodeFamily family = NodeFamily::equispaced)
{
    if (deg < 0) throw std::invalid_argument("discontinuous_space: negative degree");
    if (deg == 0) family = NodeFamily::equispaced;
    return make_scalar_space(mesh, deg, deg, Continuity::discontinuous, family);
}

/// Pressure space Q_{k-1}^{dc} of the rotated Bernardi-Raugel element.
inline ScalarSpace br_pressure_space(const Mesh& mesh, int k, NodeFamily family = NodeFamily::equispaced)
{
    if (k < 1) throw std::invalid_argument("br_pressure_space: k must be >= 1, got " + std::to_string(k));
    return discontinuous_space(mesh, k - 1, family);
}

/// Shape values and physical-scale reference gradients at the points of a tensor Gauss rule.
struct Tabulation {
    int nq = 0;   // quadrature points
    int nb = 0;   // shape functions
    std::vector<double> xi, eta, weight;  // reference points, tensor weights
    std::vector<double> val, dxi, deta;   // [q * nb + i]

    double value(int q, int i) const { return val[static_cast<std::size_t>(q * nb + i)]; }
    double grad_xi(int q, int i) const { return dxi[static_cast<std::size_t>(q * nb + i)]; }
    double grad_eta(int q, int i) const { return deta[static_cast<std::size_t>(q * nb + i)]; }
};

inline Tabulation tabulate(const ScalarElement& elem, int points_per_direction)
{
    const QuadRule1D rule = gauss_legendre(points_per_direction);
    Tabulation t;
    t.nb = elem.num_nodes();
    t.nq = static_cast<int>(rule.size() * rule.size());
    t.val.resize(static_cast<std::size_t>(t.nq * t.nb));
    t.dxi.resize(t.val.size());
    t.deta.resize(t.val.size());
    int q = 0;
    for (std::size_t b = 0; b < rule.size(); ++b)
        for (std::size_t a = 0; a < rule.size(); ++a, ++q) {
            t.xi.push_back(rule.nodes[a]);
            t.eta.push_back(rule.nodes[b]);
            t.weight.push_back(rule.weights[a] * rule.weights[b]);
            const auto off = static_cast<std::size_t>(q * t.nb);
            const auto n = static_cast<std::size_t>(t.nb);
            elem.eval(rule.nodes[a], rule.nodes[b], std::span(t.val).subspan(off, n),
                      std::span(t.dxi).subspan(off, n), std::span(t.deta).subspan(off, n));
        }
    return t;
}

/// Value and physical gradient of a discrete scalar field (full coefficient vector) in a given cell.
struct PointValue {
    double value = 0.0, dx = 0.0, dy = 0.0;
};

inline PointValue eval_in_cell(const ScalarSpace& space, const Mesh& mesh, std::span<const double> coeffs, int i,
                               int j, double x, double y)
{
    const CellGeometry geom = mesh.cell(i, j);
    const auto [xi, eta] = geom.to_reference(x, y);
    const int n = space.element.num_nodes();
    thread_local std::vector<double> v, gx, gy;
    v.resize(static_cast<std::size_t>(n));
    gx.resize(v.size());
    gy.resize(v.size());
    space.element.eval(xi, eta, v, gx, gy);
    const auto dofs = space.dofs.cell_dofs(mesh.cell_index(i, j));
    PointValue out;
    for (int l = 0; l < n; ++l) {
        const double c = coeffs[static_cast<std::size_t>(dofs[static_cast<std::size_t>(l)])];
        out.value += c * v[static_cast<std::size_t>(l)];
        out.dx += c * gx[static_cast<std::size_t>(l)];
        out.dy += c * gy[static_cast<std::size_t>(l)];
    }
    out.dx *= geom.dxi_dx();
    out.dy *= geom.deta_dy();
    return out;
}

/// Locate the cell containing (x, y); points on interior edges go to the upper/right cell.
inline std::array<int, 2> locate_cell(const Mesh& mesh, double x, double y)
{
    auto find = [](const std::vector<double>& c, double t) {
        const auto it = std::upper_bound(c.begin(), c.end(), t);
        int idx = static_cast<int>(it - c.begin()) - 1;
        return std::clamp(idx, 0, static_cast<int>(c.size()) - 2);
    };
    return {find(mesh.x_coords(), x), find(mesh.y_coords(), y)};
}

inline PointValue eval_field(const ScalarSpace& space, const Mesh& mesh, std::span<const double> coeffs, double x,
                             double y)
{
    const auto [i, j] = locate_cell(mesh, x, y);
    return eval_in_cell(space, mesh, coeffs, i, j, x, y);
}

} // namespace dfs
