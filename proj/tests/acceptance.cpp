// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <dfstokes/study.hpp>

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace dfs;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void add(bool pass, const std::string& what)
    {
        ok = ok && pass;
        if (!detail.empty()) detail += "; ";
        detail += what + (pass ? "" : " [x]");
    }
};

std::string num(double v, int prec = 3)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string sci(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

double last(const ConvergenceReport& r, double LevelResult::*m)
{
    const auto v = r.last_rate(m);
    return v ? *v : std::nan("");
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

void rate_check(Check& c, const std::string& label, double v, double target, double tol)
{
    c.add(within(v, target, tol), label + " " + num(v, 2) + " (want " + num(target, 1) + "+-" + num(tol, 2) + ")");
}

ConvergenceReport study(ElementKind e, int k, LevelRange lv, SolutionVariant s = SolutionVariant::asymmetric)
{
    StudyConfig cfg;
    cfg.element = e;
    cfg.k = k;
    cfg.levels = lv;
    cfg.solution = s;
    return run_convergence_study(cfg);
}

int failures = 0;

void report(int id, const std::string& name, const Check& c)
{
    std::printf("%s criterion %d (%s): %s\n", c.ok ? "PASS" : "FAIL", id, name.c_str(), c.detail.c_str());
    std::fflush(stdout);
    if (!c.ok) ++failures;
}

Vector random_vector(Eigen::Index n, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

Check properties()
{
    Check c;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    double qerr = 0.0;
    for (int n = 1; n <= 16; ++n) {
        const QuadRule1D r = gauss_legendre(n);
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double s = 0.0;
            for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.nodes[q], p);
            qerr = std::max(qerr, std::abs(s - (p % 2 ? 0.0 : 2.0 / (p + 1))));
        }
    }
    c.add(qerr <= 1e-13, "quadrature exactness err " + sci(qerr));

    double pu = 0.0, idem = 0.0, unis = 0.0;
    const Mesh mesh = build_uniform(3);
    for (int k = 1; k <= 3; ++k) {
        const VelocitySpace V = velocity_space(mesh, k, NodeFamily::gauss_lobatto, false);
        for (int comp = 0; comp < 2; ++comp) {
            const ScalarElement& e = V[comp].element;
            std::vector<double> v(static_cast<std::size_t>(e.num_nodes()));
            for (int t = 0; t < 50; ++t) {
                e.eval(u(rng), u(rng), v, {}, {});
                double s = 0.0;
                for (double x : v) s += x;
                pu = std::max(pu, std::abs(s - 1.0));
            }
            std::vector<double> coeffs(static_cast<std::size_t>(V[comp].dofs.total_dofs()));
            for (double& x : coeffs) x = u(rng);
            const ScalarSpace& S = V[comp];
            auto field = [&](double x, double y) { return eval_field(S, mesh, coeffs, x, y).value; };
            const auto lag = nodal_interpolate(S, field);
            const auto mom = to_global(moment_interpolate(field, S, mesh), S, mesh);
            for (std::size_t i = 0; i < coeffs.size(); ++i)
                idem = std::max({idem, std::abs(lag[i] - coeffs[i]), std::abs(mom[i] - coeffs[i])});
            const MomentInterpolationSystem sys(e);
            const int expect = k == 1 ? 6 : k == 2 ? 12 : 20;
            if (sys.num_conditions() != expect) unis = 1.0;
            unis = std::max(unis, 1.0 / std::abs(sys.determinant()) > 1e12 ? 1.0 : 0.0);
        }
    }
    c.add(pu <= 1e-13, "partition of unity err " + sci(pu));
    c.add(idem <= 1e-11, "interpolant idempotence err " + sci(idem));
    c.add(unis == 0.0, "moment unisolvence k=1,2,3");

    const StokesManufactured ex = make_manufactured(SolutionVariant::asymmetric);
    const VelocitySpace V = velocity_space(build_uniform(4), 2);
    const LinearOperator a = assemble_stiffness(V), d = assemble_div_div(V), g = assemble_div_sampler(V);
    const Vector f = assemble_load(ex.f1, ex.f2, V);
    const StokesSolution ref = iterated_penalty(a, d, f, {2000.0, 1e-9, 50}, &g);
    double spread = 0.0;
    for (double r : {500.0, 8000.0}) {
        const StokesSolution s = iterated_penalty(a, d, f, {r, 1e-9, 50}, &g);
        spread = std::max(spread, (s.velocity - ref.velocity).cwiseAbs().maxCoeff());
    }
    c.add(spread <= 1e-7, "penalty r in {500,2000,8000} spread " + sci(spread));

    const Vector res = a.apply(ref.velocity) + d.apply(ref.accumulator) - f;
    double gal = 0.0;
    for (int t = 0; t < 20; ++t) {
        Vector v = random_vector(res.size(), rng);
        gal = std::max(gal, std::abs(res.dot(v / v.norm())));
    }
    c.add(gal <= 1e-7, "Galerkin residual " + sci(gal));
    return c;
}

} // namespace

int main()
{
    using clock = std::chrono::steady_clock;
    using E = ElementKind;
    const auto t0 = clock::now();
    const ConvergenceReport df1 = study(E::divfree, 1, {2, 7});
    const ConvergenceReport br1 = study(E::br, 1, {2, 7});
    const double t1 = std::chrono::duration<double>(clock::now() - t0).count();
    const ConvergenceReport df2 = study(E::divfree, 2, {1, 7});
    const ConvergenceReport br2 = study(E::br, 2, {1, 7});
    const ConvergenceReport df3 = study(E::divfree, 3, {1, 5});
    const ConvergenceReport br3 = study(E::br, 3, {1, 5});
    const ConvergenceReport sym = study(E::divfree, 3, {2, 6}, SolutionVariant::symmetric);

    {
        Check c;
        rate_check(c, "divfree H1", last(df1, &LevelResult::e_h1), 2.0, 0.15);
        rate_check(c, "divfree p", last(df1, &LevelResult::p_l2), 2.0, 0.15);
        int it = 0;
        for (const auto& l : df1.levels) it = std::max(it, l.iterations);
        c.add(it <= 5, "max penalty iterations " + std::to_string(it));
        rate_check(c, "BR H1", last(br1, &LevelResult::e_h1), 1.0, 0.15);
        c.add(t1 < 60.0, "runtime " + num(t1, 1) + "s");
        report(1, "k=1 rates", c);
    }
    {
        Check c;
        rate_check(c, "divfree H1", last(df2, &LevelResult::e_h1), 3.0, 0.15);
        rate_check(c, "divfree L2", last(df2, &LevelResult::e_l2), 4.0, 0.2);
        rate_check(c, "divfree p", last(df2, &LevelResult::p_l2), 3.0, 0.15);
        rate_check(c, "BR H1", last(br2, &LevelResult::e_h1), 2.0, 0.15);
        rate_check(c, "BR p", last(br2, &LevelResult::p_l2), 2.0, 0.2);
        report(2, "k=2 rates", c);
    }
    {
        Check c;
        rate_check(c, "divfree H1", last(df3, &LevelResult::e_h1), 4.0, 0.2);
        rate_check(c, "divfree p", last(df3, &LevelResult::p_l2), 4.0, 0.2);
        rate_check(c, "BR H1", last(br3, &LevelResult::e_h1), 2.9, 0.3);
        report(3, "k=3 rates", c);
    }
    {
        Check c;
        const double h1 = last(sym, &LevelResult::e_h1);
        c.add(h1 >= 4.6, "divfree H1 " + num(h1, 2) + " (want >= 4.6; |e|_H1 at last level " +
                             sci(sym.levels.back().e_h1) + ")");
        rate_check(c, "divfree p", last(sym, &LevelResult::p_l2), 4.0, 0.2);
        report(4, "symmetric k=3", c);
    }
    {
        Check c;
        double worst_df = 0.0, worst_br = std::numeric_limits<double>::infinity();
        for (const auto* r : {&df1, &df2, &df3, &sym})
            for (const auto& l : r->levels) worst_df = std::max(worst_df, l.div_norm);
        for (const auto* r : {&br1, &br2, &br3})
            for (const auto& l : r->levels)
                if (l.level >= 3) worst_br = std::min(worst_br, l.div_norm);
        c.add(worst_df <= 1e-9, "max divfree ||div u_h|| " + sci(worst_df));
        c.add(worst_br > 1e-6, "min BR ||div u_h|| (level>=3) " + sci(worst_br));
        report(5, "divergence", c);
    }
    {
        Check c;
        struct Case {
            int k;
            DerivativePair pair;
            double order;
        };
        const std::vector<Case> cases{
            {1, DerivativePair::xx, 2}, {2, DerivativePair::xx, 4}, {3, DerivativePair::xx, 5},
            {1, DerivativePair::yy, 3}, {2, DerivativePair::yy, 4}, {3, DerivativePair::yy, 5},
            {1, DerivativePair::xy, 2}, {2, DerivativePair::xy, 3}, {3, DerivativePair::xy, 4},
            {1, DerivativePair::yx, 2}, {2, DerivativePair::yx, 3}, {3, DerivativePair::yx, 4},
        };
        for (const Case& cs : cases) {
            const LemmaReport r = run_lemma_study(cs.k, 0, cs.pair, {3, 6}, 0);
            const double v = r.last_rate().value_or(std::nan(""));
            c.add(v >= cs.order - 0.3, "(" + to_string(cs.pair) + ") k=" + std::to_string(cs.k) + " " + num(v, 2) +
                                           " >= " + num(cs.order - 0.3, 1));
        }
        report(6, "lemma rates", c);
    }
    {
        Check c;
        const double e5 = df1.levels[3].e_h1;
        const double reference = 0.055901;
        c.add(df1.levels[3].level == 5 && e5 >= reference / 3.0 && e5 <= 3.0 * reference,
              "divfree k=1 level 5 |e|_H1 " + sci(e5) + " vs 0.055901 (ratio " + num(reference / e5, 2) + ")");
        report(7, "error magnitude", c);
    }
    report(8, "property suites", properties());

    std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
