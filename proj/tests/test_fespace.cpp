#include <gtest/gtest.h>

#include <dfstokes/fespace.hpp>

#include <random>

using namespace dfs;

namespace {

struct ElementCase {
    int dx, dy;
    NodeFamily family;
};

const ElementCase element_cases[] = {
    {2, 1, NodeFamily::equispaced}, {3, 2, NodeFamily::equispaced}, {4, 3, NodeFamily::equispaced},
    {2, 1, NodeFamily::gauss_lobatto}, {3, 2, NodeFamily::gauss_lobatto}, {4, 3, NodeFamily::gauss_lobatto},
    {3, 4, NodeFamily::gauss_lobatto},
};

} // namespace

TEST(FeSpace, LocalNodeCountK1)
{
    const VelocitySpace V = velocity_space(build_uniform(1), 1);
    EXPECT_EQ(V[0].element.num_nodes(), 6);
    EXPECT_EQ(V[1].element.num_nodes(), 6);
    int vertices = 0, hedges = 0;
    for (int l = 0; l < 6; ++l) {
        vertices += V[0].element.entity(l) == NodeEntity::vertex;
        hedges += V[0].element.entity(l) == NodeEntity::horizontal_edge;
    }
    EXPECT_EQ(vertices, 4);
    EXPECT_EQ(hedges, 2);
}

TEST(FeSpace, InteriorDofsK1LevelTwo)
{
    // 2x2 cells of Q_{2,1}: global lattice 5 x 3, interior 3 x 1
    const VelocitySpace V = velocity_space(build_uniform(2), 1);
    EXPECT_EQ(V[0].dofs.total_dofs(), 15);
    EXPECT_EQ(V[0].dofs.num_free(), 3);
    EXPECT_EQ(V[1].dofs.num_free(), 3);
}

TEST(FeSpace, GlobalCounts)
{
    for (int k = 1; k <= 3; ++k)
        for (int level = 1; level <= 4; ++level) {
            const Mesh m = build_uniform(level);
            const VelocitySpace V = velocity_space(m, k);
            const int n = m.nx();
            EXPECT_EQ(V[0].dofs.total_dofs(), ((k + 1) * n + 1) * (k * n + 1));
            EXPECT_EQ(V[0].dofs.num_free(), ((k + 1) * n - 1) * (k * n - 1));
            EXPECT_EQ(V.num_free(), 2 * V[0].dofs.num_free());
        }
}

TEST(FeSpace, PressureCounts)
{
    EXPECT_EQ(br_pressure_space(build_uniform(3), 1).dofs.total_dofs(), 16);
    EXPECT_EQ(br_pressure_space(build_uniform(2), 3).dofs.total_dofs(), 36);
    EXPECT_EQ(discontinuous_space(build_uniform(2), 1).dofs.total_dofs(), 16);
    EXPECT_TRUE(discontinuous_space(build_uniform(2), 2).dofs.boundary_dofs().empty());
}

TEST(FeSpace, KroneckerProperty)
{
    for (const auto& c : element_cases) {
        const ScalarElement e(c.dx, c.dy, Continuity::continuous, c.family);
        const int n = e.num_nodes();
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int l = 0; l < n; ++l) {
            const auto [xi, eta] = e.node(l);
            e.eval(xi, eta, v, {}, {});
            for (int m = 0; m < n; ++m) EXPECT_NEAR(v[static_cast<std::size_t>(m)], l == m ? 1.0 : 0.0, 1e-13);
        }
    }
}

TEST(FeSpace, PartitionOfUnity)
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& c : element_cases) {
        const ScalarElement e(c.dx, c.dy, Continuity::continuous, c.family);
        std::vector<double> v(static_cast<std::size_t>(e.num_nodes())), gx(v.size()), gy(v.size());
        for (int trial = 0; trial < 50; ++trial) {
            e.eval(u(rng), u(rng), v, gx, gy);
            double s = 0.0, sx = 0.0, sy = 0.0;
            for (std::size_t l = 0; l < v.size(); ++l) {
                s += v[l];
                sx += gx[l];
                sy += gy[l];
            }
            EXPECT_NEAR(s, 1.0, 1e-13);
            EXPECT_NEAR(sx, 0.0, 1e-12);
            EXPECT_NEAR(sy, 0.0, 1e-12);
        }
    }
}

TEST(FeSpace, GlobalOnesIsOne)
{
    const Mesh m = build_uniform(3);
    for (int k = 1; k <= 3; ++k) {
        const VelocitySpace V = velocity_space(m, k);
        for (int c = 0; c < 2; ++c) {
            const std::vector<double> ones(static_cast<std::size_t>(V[c].dofs.total_dofs()), 1.0);
            for (double x : {0.0, 0.13, 0.5, 0.9, 1.0})
                for (double y : {0.0, 0.3, 0.75, 1.0}) {
                    const PointValue p = eval_field(V[c], m, ones, x, y);
                    EXPECT_NEAR(p.value, 1.0, 1e-13);
                    EXPECT_NEAR(p.dx, 0.0, 1e-11);
                }
        }
    }
}

TEST(FeSpace, ReproducesTensorPolynomials)
{
    // x^a y^b with a <= k+1, b <= k lies in V_{h,1}
    const Mesh m = build_uniform(3);
    const int k = 2;
    const VelocitySpace V = velocity_space(m, k, NodeFamily::gauss_lobatto, false);
    std::vector<double> c(static_cast<std::size_t>(V[0].dofs.total_dofs()));
    auto f = [](double x, double y) { return x * x * x * y * y - 2.0 * x * y + 0.5; };
    for (int g = 0; g < V[0].dofs.total_dofs(); ++g) {
        const auto [x, y] = V[0].dofs.point(g);
        c[static_cast<std::size_t>(g)] = f(x, y);
    }
    for (double x : {0.1, 0.44, 0.8})
        for (double y : {0.05, 0.61}) {
            const PointValue p = eval_field(V[0], m, c, x, y);
            EXPECT_NEAR(p.value, f(x, y), 1e-13);
            EXPECT_NEAR(p.dx, 3 * x * x * y * y - 2 * y, 1e-12);
            EXPECT_NEAR(p.dy, 2 * x * x * x * y - 2 * x, 1e-12);
        }
}

TEST(FeSpace, ConformityAcrossEdges)
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Mesh m = build_uniform(3);
    const VelocitySpace V = velocity_space(m, 3);
    for (int c = 0; c < 2; ++c) {
        std::vector<double> coeffs(static_cast<std::size_t>(V[c].dofs.total_dofs()));
        for (double& v : coeffs) v = u(rng);
        for (int trial = 0; trial < 20; ++trial) {
            // interior vertical edge x = 0.5, interior horizontal edge y = 0.25
            const double t = 0.5 * (u(rng) + 1.0);
            const double left = eval_in_cell(V[c], m, coeffs, 1, std::min(3, static_cast<int>(t * 4)), 0.5, t).value;
            const double right = eval_in_cell(V[c], m, coeffs, 2, std::min(3, static_cast<int>(t * 4)), 0.5, t).value;
            EXPECT_NEAR(left, right, 1e-12);
            const double below = eval_in_cell(V[c], m, coeffs, std::min(3, static_cast<int>(t * 4)), 0, t, 0.25).value;
            const double above = eval_in_cell(V[c], m, coeffs, std::min(3, static_cast<int>(t * 4)), 1, t, 0.25).value;
            EXPECT_NEAR(below, above, 1e-12);
        }
    }
}

TEST(FeSpace, BoundaryFlags)
{
    const Mesh m = build_uniform(3);
    const VelocitySpace V = velocity_space(m, 2);
    for (int c = 0; c < 2; ++c) {
        const auto bd = V[c].dofs.boundary_dofs();
        EXPECT_EQ(static_cast<int>(bd.size()), V[c].dofs.num_boundary());
        for (int g = 0; g < V[c].dofs.total_dofs(); ++g) {
            const auto [x, y] = V[c].dofs.point(g);
            const bool on = x == 0.0 || y == 0.0 || std::abs(x - 1.0) < 1e-14 || std::abs(y - 1.0) < 1e-14;
            EXPECT_EQ(V[c].dofs.is_boundary(g), on);
            EXPECT_EQ(V[c].dofs.free_index(g) < 0, on);
        }
    }
}

TEST(FeSpace, ExpandRestrictRoundTrip)
{
    const VelocitySpace V = velocity_space(build_uniform(3), 1);
    std::vector<double> free(static_cast<std::size_t>(V[0].dofs.num_free()));
    for (std::size_t i = 0; i < free.size(); ++i) free[i] = 0.5 + static_cast<double>(i);
    const auto full = V[0].dofs.expand(free);
    for (int g : V[0].dofs.boundary_dofs()) EXPECT_EQ(full[static_cast<std::size_t>(g)], 0.0);
    EXPECT_EQ(V[0].dofs.restrict_to_free(full), free);
}

TEST(FeSpace, SharedNodesNumberedOnce)
{
    const Mesh m = build_uniform(2);
    const VelocitySpace V = velocity_space(m, 1);
    // cells (0,0) and (1,0) share the vertical edge x = 0.5: k+1 = 2 points of Q_{2,1}
    const auto a = V[0].dofs.cell_dofs(m.cell_index(0, 0));
    const auto b = V[0].dofs.cell_dofs(m.cell_index(1, 0));
    int shared = 0;
    for (int x : a)
        for (int y : b) shared += x == y;
    EXPECT_EQ(shared, 2);
}

TEST(FeSpace, LatticeFamilies)
{
    const auto eq = lattice_points(3, NodeFamily::equispaced);
    EXPECT_NEAR(eq[1], -1.0 / 3.0, 1e-15);
    EXPECT_EQ(lattice_points(0, NodeFamily::equispaced), std::vector<double>{0.0});
    EXPECT_THROW(lattice_points(-1, NodeFamily::equispaced), std::invalid_argument);
}

TEST(FeSpace, Errors)
{
    const Mesh m = build_uniform(2);
    EXPECT_THROW(velocity_space(m, 0), std::invalid_argument);
    EXPECT_THROW(velocity_space(m, 4), std::invalid_argument);
    EXPECT_THROW(velocity_space(m, 1, NodeFamily::gauss_legendre), std::invalid_argument);
    EXPECT_THROW(br_pressure_space(m, 0), std::invalid_argument);
    EXPECT_THROW(ScalarElement(0, 1, Continuity::continuous, NodeFamily::equispaced), std::invalid_argument);
}
