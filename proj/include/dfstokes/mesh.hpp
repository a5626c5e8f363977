#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfs {

/// Affine image of the reference square [-1,1]^2.
struct CellGeometry {
    double x0 = 0.0, y0 = 0.0; // lower-left corner
    double hx = 1.0, hy = 1.0;

    std::array<double, 2> map(double xi, double eta) const
    {
        return {x0 + 0.5 * (xi + 1.0) * hx, y0 + 0.5 * (eta + 1.0) * hy};
    }
    std::array<double, 2> to_reference(double x, double y) const
    {
        return {2.0 * (x - x0) / hx - 1.0, 2.0 * (y - y0) / hy - 1.0};
    }
    double jacobian() const { return 0.25 * hx * hy; }
    double dxi_dx() const { return 2.0 / hx; }
    double deta_dy() const { return 2.0 / hy; }
    double size() const { return std::max(hx, hy); }
};

/// Tensor-product rectangular grid given by two strictly increasing coordinate sequences.
class Mesh {
public:
    Mesh(std::vector<double> x_coords, std::vector<double> y_coords, int level = 0)
        : xs_(std::move(x_coords)), ys_(std::move(y_coords)), level_(level)
    {
        check_coords(xs_, "x");
        check_coords(ys_, "y");
    }

    int nx() const noexcept { return static_cast<int>(xs_.size()) - 1; }
    int ny() const noexcept { return static_cast<int>(ys_.size()) - 1; }
    int num_cells() const noexcept { return nx() * ny(); }
    int level() const noexcept { return level_; }
    const std::vector<double>& x_coords() const noexcept { return xs_; }
    const std::vector<double>& y_coords() const noexcept { return ys_; }

    /// Cells are numbered row by row: index = j * nx + i.
    int cell_index(int i, int j) const noexcept { return j * nx() + i; }

    CellGeometry cell(int i, int j) const
    {
        if (i < 0 || i >= nx() || j < 0 || j >= ny())
            throw std::out_of_range("Mesh::cell: index (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") outside " + std::to_string(nx()) + "x" + std::to_string(ny()));
        return {xs_[i], ys_[j], xs_[i + 1] - xs_[i], ys_[j + 1] - ys_[j]};
    }

    double max_cell_size() const
    {
        double h = 0.0;
        for (int i = 0; i < nx(); ++i) h = std::max(h, xs_[i + 1] - xs_[i]);
        for (int j = 0; j < ny(); ++j) h = std::max(h, ys_[j + 1] - ys_[j]);
        return h;
    }

private:
    static void check_coords(const std::vector<double>& c, const char* axis)
    {
        if (c.size() < 2) throw std::invalid_argument(std::string("Mesh: need at least one cell in ") + axis);
        for (std::size_t i = 0; i + 1 < c.size(); ++i)
            if (!(c[i + 1] > c[i]))
                throw std::invalid_argument(std::string("Mesh: ") + axis + " coordinates not strictly increasing");
    }

    std::vector<double> xs_, ys_;
    int level_;
};

/// Level L is the uniform 2^(L-1) x 2^(L-1) grid on the unit square; level 1 is the square itself.
inline Mesh build_uniform(int level)
{
    if (level < 1) throw std::invalid_argument("build_uniform: level must be >= 1");
    if (level > 14) throw std::invalid_argument("build_uniform: level too large");
    const int n = 1 << (level - 1);
    std::vector<double> c(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) c[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
    return Mesh(c, c, level);
}

inline CellGeometry cell_geometry(const Mesh& m, int i, int j) { return m.cell(i, j); }

} // namespace dfs
