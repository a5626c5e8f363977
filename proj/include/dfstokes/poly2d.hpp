#pragma once

// Exact bivariate polynomials  sum_{i,j} c_ij x^i y^j  with dense coefficient storage,
// and the stream-function based manufactured Stokes solutions built from them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace dfs {

enum class Var { x, y };

class BivariatePoly {
public:
    BivariatePoly() : coeffs_(1, 0.0) {}

    /// Coefficients in row-major order: coeffs[j * (degree_x + 1) + i] multiplies x^i y^j.
    BivariatePoly(int degree_x, int degree_y, std::vector<double> coeffs)
        : deg_x_(degree_x), deg_y_(degree_y), coeffs_(std::move(coeffs))
    {
        if (degree_x < 0 || degree_y < 0)
            throw std::invalid_argument("BivariatePoly: negative degree");
        if (coeffs_.size() != static_cast<std::size_t>((degree_x + 1) * (degree_y + 1)))
            throw std::invalid_argument("BivariatePoly: coefficient count does not match degrees");
        trim();
    }

    static BivariatePoly constant(double c) { return BivariatePoly(0, 0, {c}); }

    static BivariatePoly monomial(int i, int j, double c = 1.0)
    {
        std::vector<double> cs(static_cast<std::size_t>((i + 1) * (j + 1)), 0.0);
        cs[static_cast<std::size_t>(j * (i + 1) + i)] = c;
        return BivariatePoly(i, j, std::move(cs));
    }

    /// Univariate polynomial in `v` from ascending coefficients.
    static BivariatePoly univariate(Var v, std::initializer_list<double> ascending)
    {
        const int d = static_cast<int>(ascending.size()) - 1;
        if (d < 0) return {};
        std::vector<double> cs(ascending);
        return v == Var::x ? BivariatePoly(d, 0, std::move(cs)) : BivariatePoly(0, d, std::move(cs));
    }

    int degree_x() const noexcept { return deg_x_; }
    int degree_y() const noexcept { return deg_y_; }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }

    double coeff(int i, int j) const
    {
        if (i < 0 || j < 0 || i > deg_x_ || j > deg_y_) return 0.0;
        return coeffs_[static_cast<std::size_t>(j * (deg_x_ + 1) + i)];
    }

    bool is_zero() const
    {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c == 0.0; });
    }

    /// Nested Horner evaluation.
    double operator()(double x, double y) const
    {
        double result = 0.0;
        for (int j = deg_y_; j >= 0; --j) {
            double row = 0.0;
            for (int i = deg_x_; i >= 0; --i) row = row * x + coeff(i, j);
            result = result * y + row;
        }
        return result;
    }

    friend BivariatePoly operator+(const BivariatePoly& p, const BivariatePoly& q)
    {
        return combine(p, q, 1.0);
    }
    friend BivariatePoly operator-(const BivariatePoly& p, const BivariatePoly& q)
    {
        return combine(p, q, -1.0);
    }
    friend BivariatePoly operator*(double s, const BivariatePoly& p)
    {
        std::vector<double> cs = p.coeffs_;
        for (double& c : cs) c *= s;
        return BivariatePoly(p.deg_x_, p.deg_y_, std::move(cs));
    }
    friend BivariatePoly operator-(const BivariatePoly& p) { return -1.0 * p; }

    friend BivariatePoly operator*(const BivariatePoly& p, const BivariatePoly& q)
    {
        const int dx = p.deg_x_ + q.deg_x_;
        const int dy = p.deg_y_ + q.deg_y_;
        std::vector<double> cs(static_cast<std::size_t>((dx + 1) * (dy + 1)), 0.0);
        for (int j1 = 0; j1 <= p.deg_y_; ++j1)
            for (int i1 = 0; i1 <= p.deg_x_; ++i1) {
                const double a = p.coeff(i1, j1);
                if (a == 0.0) continue;
                for (int j2 = 0; j2 <= q.deg_y_; ++j2)
                    for (int i2 = 0; i2 <= q.deg_x_; ++i2)
                        cs[static_cast<std::size_t>((j1 + j2) * (dx + 1) + i1 + i2)] += a * q.coeff(i2, j2);
            }
        return BivariatePoly(dx, dy, std::move(cs));
    }

    /// Coefficient-wise equality within an absolute tolerance (missing entries count as zero).
    friend bool near(const BivariatePoly& p, const BivariatePoly& q, double tol)
    {
        const int dx = std::max(p.deg_x_, q.deg_x_);
        const int dy = std::max(p.deg_y_, q.deg_y_);
        for (int j = 0; j <= dy; ++j)
            for (int i = 0; i <= dx; ++i)
                if (std::abs(p.coeff(i, j) - q.coeff(i, j)) > tol) return false;
        return true;
    }

private:
    static BivariatePoly combine(const BivariatePoly& p, const BivariatePoly& q, double sign)
    {
        const int dx = std::max(p.deg_x_, q.deg_x_);
        const int dy = std::max(p.deg_y_, q.deg_y_);
        std::vector<double> cs(static_cast<std::size_t>((dx + 1) * (dy + 1)), 0.0);
        for (int j = 0; j <= dy; ++j)
            for (int i = 0; i <= dx; ++i)
                cs[static_cast<std::size_t>(j * (dx + 1) + i)] = p.coeff(i, j) + sign * q.coeff(i, j);
        return BivariatePoly(dx, dy, std::move(cs));
    }

    // Drop all-zero top rows/columns so that degree bounds are tight.
    void trim()
    {
        int dx = 0, dy = 0;
        for (int j = 0; j <= deg_y_; ++j)
            for (int i = 0; i <= deg_x_; ++i)
                if (coeffs_[static_cast<std::size_t>(j * (deg_x_ + 1) + i)] != 0.0) {
                    dx = std::max(dx, i);
                    dy = std::max(dy, j);
                }
        if (dx == deg_x_ && dy == deg_y_) return;
        std::vector<double> cs(static_cast<std::size_t>((dx + 1) * (dy + 1)));
        for (int j = 0; j <= dy; ++j)
            for (int i = 0; i <= dx; ++i)
                cs[static_cast<std::size_t>(j * (dx + 1) + i)] = coeff(i, j);
        deg_x_ = dx;
        deg_y_ = dy;
        coeffs_ = std::move(cs);
    }

    int deg_x_ = 0;
    int deg_y_ = 0;
    std::vector<double> coeffs_;
};

inline BivariatePoly differentiate(const BivariatePoly& p, Var v)
{
    const int dx = v == Var::x ? std::max(p.degree_x() - 1, 0) : p.degree_x();
    const int dy = v == Var::y ? std::max(p.degree_y() - 1, 0) : p.degree_y();
    std::vector<double> cs(static_cast<std::size_t>((dx + 1) * (dy + 1)), 0.0);
    for (int j = 0; j <= dy; ++j)
        for (int i = 0; i <= dx; ++i)
            cs[static_cast<std::size_t>(j * (dx + 1) + i)] =
                v == Var::x ? (i + 1) * p.coeff(i + 1, j) : (j + 1) * p.coeff(i, j + 1);
    return BivariatePoly(dx, dy, std::move(cs));
}

inline BivariatePoly multiply(const BivariatePoly& p, const BivariatePoly& q) { return p * q; }

inline double evaluate(const BivariatePoly& p, double x, double y) { return p(x, y); }

inline BivariatePoly laplacian(const BivariatePoly& p)
{
    return differentiate(differentiate(p, Var::x), Var::x) + differentiate(differentiate(p, Var::y), Var::y);
}

/// Exact integral over [0,1]^2:  sum c_ij / ((i+1)(j+1)).
inline double integrate_unit_square(const BivariatePoly& p)
{
    double s = 0.0;
    for (int j = 0; j <= p.degree_y(); ++j)
        for (int i = 0; i <= p.degree_x(); ++i) s += p.coeff(i, j) / ((i + 1.0) * (j + 1.0));
    return s;
}

/// u = curl g = (g_y, -g_x), p = lap g (mean-free on [0,1]^2), f = -lap u + grad p.
struct StokesManufactured {
    BivariatePoly g;
    BivariatePoly u1, u2;
    BivariatePoly p;
    BivariatePoly f1, f2;
};

enum class SolutionVariant { asymmetric, symmetric };

inline StokesManufactured make_manufactured_from_stream(const BivariatePoly& g)
{
    StokesManufactured s;
    s.g = g;
    s.u1 = differentiate(g, Var::y);
    s.u2 = -differentiate(g, Var::x);
    const BivariatePoly lap_g = laplacian(g);
    s.p = lap_g - BivariatePoly::constant(integrate_unit_square(lap_g));
    s.f1 = -laplacian(s.u1) + differentiate(s.p, Var::x);
    s.f2 = -laplacian(s.u2) + differentiate(s.p, Var::y);
    return s;
}

/// asymmetric: g = 2^8 (x^3-x^4)^2 (y^3-y^4)^2;  symmetric: g = 2^8 (x-x^2)^2 (y-y^2)^2.
inline StokesManufactured make_manufactured(SolutionVariant variant)
{
    BivariatePoly a, b;
    if (variant == SolutionVariant::asymmetric) {
        a = BivariatePoly::univariate(Var::x, {0, 0, 0, 1, -1});
        b = BivariatePoly::univariate(Var::y, {0, 0, 0, 1, -1});
    } else {
        a = BivariatePoly::univariate(Var::x, {0, 1, -1});
        b = BivariatePoly::univariate(Var::y, {0, 1, -1});
    }
    return make_manufactured_from_stream(256.0 * (a * a) * (b * b));
}

} // namespace dfs
