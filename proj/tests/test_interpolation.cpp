#include <gtest/gtest.h>

#include <dfstokes/interpolation.hpp>
#include <dfstokes/study.hpp>

#include <random>

using namespace dfs;

namespace {

std::vector<double> random_coeffs(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> c(static_cast<std::size_t>(n));
    for (double& v : c) v = u(rng);
    return c;
}

Field2D as_field(const ScalarSpace& S, const Mesh& m, const std::vector<double>& c)
{
    return [&S, &m, c](double x, double y) { return eval_field(S, m, c, x, y).value; };
}

} // namespace

TEST(Interpolation, LagrangeIdempotentOnDiscreteSpace)
{
    const Mesh m = build_uniform(3);
    for (int k = 1; k <= 3; ++k)
        for (NodeFamily f : {NodeFamily::equispaced, NodeFamily::gauss_lobatto}) {
            const VelocitySpace V = velocity_space(m, k, f, false);
            for (int c = 0; c < 2; ++c) {
                const auto coeffs = random_coeffs(V[c].dofs.total_dofs(), 3 + static_cast<unsigned>(k));
                const auto back = nodal_interpolate(V[c], as_field(V[c], m, coeffs));
                for (std::size_t i = 0; i < back.size(); ++i) EXPECT_NEAR(back[i], coeffs[i], 1e-12);
            }
        }
}

TEST(Interpolation, LagrangeConstant)
{
    const VelocitySpace V = velocity_space(build_uniform(2), 2, NodeFamily::gauss_lobatto, false);
    for (double c : nodal_interpolate(V[1], [](double, double) { return 3.5; })) EXPECT_EQ(c, 3.5);
}

TEST(Interpolation, LagrangeH1OrderK2)
{
    const StokesManufactured ex = make_manufactured(SolutionVariant::asymmetric);
    const ExactScalar u1 = ExactScalar::from_poly(ex.u1), u2 = ExactScalar::from_poly(ex.u2);
    double e[2];
    for (int l = 4; l <= 5; ++l) {
        const VelocitySpace V = velocity_space(build_uniform(l), 2);
        e[l - 4] = velocity_error_h1_semi(V, lagrange_interpolate(ex.u1, ex.u2, V), u1, u2);
    }
    EXPECT_NEAR(*rate(e[0], e[1]), 2.0, 0.15);
}

TEST(Interpolation, MomentSystemSizesAndUnisolvence)
{
    const int expected[] = {6, 12, 20};
    for (int k = 1; k <= 3; ++k)
        for (NodeFamily f : {NodeFamily::equispaced, NodeFamily::gauss_lobatto}) {
            const VelocitySpace V = velocity_space(build_uniform(1), k, f);
            for (int c = 0; c < 2; ++c) {
                const MomentInterpolationSystem sys(V[c].element);
                EXPECT_EQ(sys.num_conditions(), expected[k - 1]);
                EXPECT_EQ(sys.num_conditions(), V[c].element.num_nodes());
                EXPECT_GT(std::abs(sys.determinant()), 1e-12);
                EXPECT_LT(sys.condition_number(), 1e4);
            }
        }
}

TEST(Interpolation, MomentReproducesTensorPolynomials)
{
    const Mesh m = build_uniform(3);
    for (int k = 1; k <= 3; ++k) {
        const VelocitySpace V = velocity_space(m, k, NodeFamily::gauss_lobatto, false);
        const auto coeffs = random_coeffs(V[0].dofs.total_dofs(), 17);
        const CellwiseField mi = moment_interpolate(as_field(V[0], m, coeffs), V[0], m);
        const auto g = to_global(mi, V[0], m);
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], coeffs[i], 1e-11);
    }
}

TEST(Interpolation, MomentIdempotent)
{
    const Mesh m = build_uniform(2);
    const StokesManufactured ex = make_manufactured(SolutionVariant::asymmetric);
    const VelocitySpace V = velocity_space(m, 2);
    const auto once = to_global(moment_interpolate(ex.u1, V[0], m), V[0], m);
    const auto twice = to_global(moment_interpolate(as_field(V[0], m, once), V[0], m), V[0], m);
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-12);
}

TEST(Interpolation, MomentContinuousAcrossEdges)
{
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Mesh m = build_uniform(3);
    const StokesManufactured ex = make_manufactured(SolutionVariant::asymmetric);
    for (int k = 1; k <= 3; ++k) {
        const VelocitySpace V = velocity_space(m, k);
        const CellwiseField mi = moment_interpolate(ex.u1, V[0], m);
        // per-cell evaluation of the cellwise field
        auto eval_cell = [&](int i, int j, double x, double y) {
            const CellGeometry geom = m.cell(i, j);
            const auto [xi, eta] = geom.to_reference(x, y);
            std::vector<double> v(static_cast<std::size_t>(mi.nloc));
            V[0].element.eval(xi, eta, v, {}, {});
            const auto c = mi.cell(m.cell_index(i, j));
            double s = 0.0;
            for (int l = 0; l < mi.nloc; ++l) s += c[static_cast<std::size_t>(l)] * v[static_cast<std::size_t>(l)];
            return s;
        };
        for (int t = 0; t < 20; ++t) {
            const double s = u(rng);
            const int row = std::min(3, static_cast<int>(s * 4));
            EXPECT_NEAR(eval_cell(1, row, 0.5, s), eval_cell(2, row, 0.5, s), 1e-10);
            EXPECT_NEAR(eval_cell(row, 1, s, 0.5), eval_cell(row, 2, s, 0.5), 1e-10);
        }
    }
}

TEST(Interpolation, PressureInterpolant)
{
    const Mesh m = build_uniform(4);
    const ScalarSpace P = br_pressure_space(m, 2);
    const int nq = 8;
    for (double c : interpolate_pressure([](double, double) { return 0.0; }, P, m, nq)) EXPECT_EQ(c, 0.0);
    // per-cell Q_1 with zero mean is reproduced
    auto q = [](double x, double y) { return (x - 0.5) * (y - 0.5) + (x - 0.5); };
    const auto pi = interpolate_pressure(q, P, m, nq);
    for (double x : {0.1, 0.33, 0.9})
        for (double y : {0.2, 0.7}) EXPECT_NEAR(eval_field(P, m, pi, x, y).value, q(x, y), 1e-13);
    EXPECT_NEAR(field_mean(P, m, pi, nq), 0.0, 1e-14);
}

TEST(Interpolation, PressureOrderK2)
{
    const StokesManufactured ex = make_manufactured(SolutionVariant::asymmetric);
    double e[2];
    for (int l = 4; l <= 5; ++l) {
        const Mesh m = build_uniform(l);
        const ScalarSpace P = br_pressure_space(m, 2);
        const auto pi = interpolate_pressure(ex.p, P, m, 8);
        e[l - 4] = error_l2(P, m, pi, ex.p, 8);
    }
    EXPECT_NEAR(*rate(e[0], e[1]), 2.0, 0.2);
}

TEST(Interpolation, LemmaNormVanishesOnDiscreteFunctions)
{
    const Mesh m = build_uniform(3);
    const VelocitySpace V = velocity_space(m, 2);
    // x^3 y^2 - x y in Q_{3,2}
    const BivariatePoly p = BivariatePoly::monomial(3, 2) - BivariatePoly::monomial(1, 1);
    for (DerivativePair pr : {DerivativePair::xx, DerivativePair::yy, DerivativePair::xy, DerivativePair::yx})
        EXPECT_LE(lemma_functional_norm(ExactScalar::from_poly(p), 0, pr, 0, V), 1e-11);
}

TEST(Interpolation, LemmaRates)
{
    const LemmaReport k2 = run_lemma_study(2, 0, DerivativePair::xx, {3, 5});
    EXPECT_GE(*k2.last_rate(), 3.7);
    const LemmaReport k1 = run_lemma_study(1, 0, DerivativePair::xx, {4, 6});
    EXPECT_GE(*k1.last_rate(), 1.8);
    const LemmaReport yy = run_lemma_study(1, 0, DerivativePair::yy, {4, 6});
    EXPECT_GE(*yy.last_rate(), 2.7);
}

TEST(Interpolation, Errors)
{
    const Mesh m = build_uniform(2);
    const VelocitySpace V = velocity_space(m, 1);
    EXPECT_THROW(moment_interpolate([](double, double) { return 0.0; }, br_pressure_space(m, 2), m),
                 std::invalid_argument);
    EXPECT_THROW(lemma_functional_norm(ExactScalar::zero(), 2, DerivativePair::xx, 0, V), std::invalid_argument);
}
