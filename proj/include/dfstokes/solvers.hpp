#pragma once

// Outer iterations for the discrete Stokes system:
//  - iterated penalty for the divergence-free pair (pressure recovered from the accumulator),
//  - mass-scaled Uzawa for the rotated Bernardi-Raugel pair,
// on top of a reusable sparse Cholesky factorization.

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>
#include <string>

#include "assembly.hpp"

namespace dfs {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sparse Cholesky of an SPD operator, factorized once and reused for many right-hand sides.
class SpdSolver {
public:
    SpdSolver() = default;
    explicit SpdSolver(const SparseMatrix& a) { factorize(a); }

    void factorize(const SparseMatrix& a)
    {
        if (a.rows() != a.cols()) throw SolverError("SpdSolver: matrix is not square");
        matrix_ = &a;
        llt_.compute(a);
        if (llt_.info() != Eigen::Success) throw SolverError("SpdSolver: Cholesky breakdown (matrix not SPD)");
    }

    /// Solve with one step of iterative refinement.
    Vector solve(const Vector& rhs) const
    {
        Vector x = llt_.solve(rhs);
        if (llt_.info() != Eigen::Success) throw SolverError("SpdSolver: triangular solve failed");
        if (matrix_ != nullptr) {
            const Vector r = rhs - (*matrix_) * x;
            x += llt_.solve(r);
        }
        return x;
    }

private:
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
    const SparseMatrix* matrix_ = nullptr;
};

/// Solve A x = rhs for SPD A; throws unless ||A x - rhs|| <= tol ||rhs||.
inline Vector solve_spd(const LinearOperator& a, const Vector& rhs, double tol = 1e-10)
{
    if (a.rows() != rhs.size()) throw SolverError("solve_spd: dimension mismatch");
    const SpdSolver solver(a.matrix);
    Vector x = solver.solve(rhs);
    const double rn = rhs.norm();
    const double res = (a.matrix * x - rhs).norm();
    if (res > tol * std::max(rn, std::numeric_limits<double>::min()) && res > 0.0)
        throw SolverError("solve_spd: residual " + std::to_string(res) + " exceeds tolerance");
    return x;
}

struct PenaltyConfig {
    double r = 2000.0;
    double div_tol = 1e-9;
    int max_outer = 50;
};

struct UzawaConfig {
    double alpha = 1.0;
    double p_tol = 1e-6;
    int max_outer = 5000;
};

enum class ElementKind { divfree, br };

struct StokesSolution {
    ElementKind element = ElementKind::divfree;
    Vector velocity;     // Dirichlet-reduced, component 1 then component 2
    Vector accumulator;  // divergence-free pair: w_h, with p_h = pressure_sign * div w_h
    Vector pressure;     // Bernardi-Raugel pair: coefficients in Q_{k-1}^{dc}
    int iterations = 0;
    double div_norm = 0.0;
};

/// p_h = pressure_sign * div w_h. Follows from b(v, p) = -int div v p and the
/// accumulator update w <- w + r u: at the fixed point a(u, v) + (div w, div v) = (f, v).
constexpr double pressure_sign = -1.0;

/// Iterated penalty: (A + r D) u^n = F - D w^n,  w^{n+1} = w^n + r u^n, w^0 = 0.
/// ||div u^n|| is measured as ||G u^n|| when a divergence sampler G (G^T G = D) is given,
/// otherwise as sqrt(u^T D u), which cannot resolve values much below 1e-8.
inline StokesSolution iterated_penalty(const LinearOperator& a, const LinearOperator& d, const Vector& load,
                                       const PenaltyConfig& cfg = {}, const LinearOperator* div_sampler = nullptr)
{
    if (!(cfg.r > 0.0) || !(cfg.div_tol > 0.0) || cfg.max_outer < 1)
        throw std::invalid_argument("iterated_penalty: invalid configuration");
    if (a.rows() != d.rows() || a.rows() != load.size())
        throw std::invalid_argument("iterated_penalty: dimension mismatch");
    const SparseMatrix k = a.matrix + cfg.r * d.matrix;
    const SpdSolver solver(k);

    StokesSolution sol;
    sol.element = ElementKind::divfree;
    sol.accumulator = Vector::Zero(load.size());
    for (int n = 1; n <= cfg.max_outer; ++n) {
        sol.velocity = solver.solve(load - d.matrix * sol.accumulator);
        sol.accumulator += cfg.r * sol.velocity;
        sol.div_norm = div_sampler != nullptr ? (div_sampler->matrix * sol.velocity).norm()
                                              : std::sqrt(std::max(0.0, d.energy(sol.velocity)));
        sol.iterations = n;
        if (sol.div_norm <= cfg.div_tol) return sol;
    }
    throw SolverError("iterated_penalty: no convergence in " + std::to_string(cfg.max_outer) +
                      " iterations (||div u_h|| = " + std::to_string(sol.div_norm) + ")");
}

/// Mass-scaled Uzawa: A u^n = F - B^T p^n,  p^{n+1} = p^n + alpha M^{-1} B u^n (mean removed).
/// `pressure_mass` is the mass matrix of the discontinuous pressure space.
inline StokesSolution uzawa(const LinearOperator& a, const LinearOperator& b, const Vector& load,
                            const LinearOperator& pressure_mass, const UzawaConfig& cfg = {})
{
    if (!(cfg.alpha > 0.0) || !(cfg.p_tol > 0.0) || cfg.max_outer < 1)
        throw std::invalid_argument("uzawa: invalid configuration");
    if (b.cols() != a.rows() || b.rows() != pressure_mass.rows() || a.rows() != load.size())
        throw std::invalid_argument("uzawa: dimension mismatch");
    const SpdSolver a_solver(a.matrix);
    const SpdSolver m_solver(pressure_mass.matrix);
    const Vector ones = Vector::Ones(b.rows());
    const Vector mass_ones = pressure_mass.matrix * ones;
    const double area = ones.dot(mass_ones);
    auto remove_mean = [&](Vector& p) { p -= (mass_ones.dot(p) / area) * ones; };

    StokesSolution sol;
    sol.element = ElementKind::br;
    sol.pressure = Vector::Zero(b.rows());
    double last_step = std::numeric_limits<double>::infinity();
    int growing = 0;
    for (int n = 1; n <= cfg.max_outer; ++n) {
        sol.velocity = a_solver.solve(load - b.matrix.transpose() * sol.pressure);
        Vector step = cfg.alpha * m_solver.solve(b.matrix * sol.velocity);
        remove_mean(step);
        sol.pressure += step;
        sol.iterations = n;
        const double size = step.cwiseAbs().maxCoeff();
        if (!std::isfinite(size)) throw SolverError("uzawa: non-finite pressure update");
        if (size <= cfg.p_tol) {
            sol.velocity = a_solver.solve(load - b.matrix.transpose() * sol.pressure);
            return sol;
        }
        growing = size > last_step ? growing + 1 : 0;
        if (growing >= 50) throw SolverError("uzawa: pressure increment growing for 50 consecutive steps");
        last_step = size;
    }
    throw SolverError("uzawa: no convergence in " + std::to_string(cfg.max_outer) + " iterations");
}

/// Direct solve of the mean-constrained saddle point system
///   [A  B^T 0] [u]   [F]
///   [B  0   m] [p] = [0]
///   [0  m^T 0] [l]   [0],   m = M 1.
/// Intended for small cross-validation problems. On uniform grids B^T also annihilates a
/// checkerboard pressure, so only the velocity and the pressure modulo ker B^T are unique;
/// Uzawa iterates stay M-orthogonal to that mode.
inline StokesSolution solve_saddle_direct(const LinearOperator& a, const LinearOperator& b, const Vector& load,
                                          const LinearOperator& pressure_mass)
{
    const Eigen::Index nu = a.rows(), np = b.rows(), n = nu + np + 1;
    const Vector m = pressure_mass.matrix * Vector::Ones(np);
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index c = 0; c < a.matrix.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(a.matrix, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index c = 0; c < b.matrix.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(b.matrix, c); it; ++it) {
            t.emplace_back(nu + it.row(), it.col(), it.value());
            t.emplace_back(it.col(), nu + it.row(), it.value());
        }
    for (Eigen::Index i = 0; i < np; ++i) {
        t.emplace_back(nu + i, n - 1, m[i]);
        t.emplace_back(n - 1, nu + i, m[i]);
    }
    SparseMatrix k(n, n);
    k.setFromTriplets(t.begin(), t.end());
    k.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(k);
    if (lu.info() != Eigen::Success) throw SolverError("solve_saddle_direct: factorization failed");
    Vector rhs = Vector::Zero(n);
    rhs.head(nu) = load;
    const Vector x = lu.solve(rhs);
    StokesSolution sol;
    sol.element = ElementKind::br;
    sol.velocity = x.head(nu);
    sol.pressure = x.segment(nu, np);
    sol.iterations = 1;
    return sol;
}

} // namespace dfs
