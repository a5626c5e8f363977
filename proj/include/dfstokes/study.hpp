#pragma once

// Convergence studies on the uniform dyadic hierarchy of the unit square, lemma-rate
// studies for the moment interpolant, and sampled field dumps.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "assembly.hpp"
#include "fespace.hpp"
#include "interpolation.hpp"
#include "mesh.hpp"
#include "norms.hpp"
#include "poly2d.hpp"
#include "solvers.hpp"

namespace dfs {

/// Which velocity interpolant the headline error u_h - I_h u is measured against.
enum class InterpolantKind { lagrange, moment };

struct LevelRange {
    int first = 1;
    int last = 1;
};

inline LevelRange default_levels(int k)
{
    switch (k) {
    case 1: return {2, 7};
    case 2: return {1, 7};
    default: return {1, 5};
    }
}

struct StudyConfig {
    ElementKind element = ElementKind::divfree;
    int k = 1;
    LevelRange levels = default_levels(1);
    SolutionVariant solution = SolutionVariant::asymmetric;
    PenaltyConfig penalty{};
    UzawaConfig uzawa{};
    InterpolantKind interpolant = InterpolantKind::lagrange;
    NodeFamily nodes = NodeFamily::gauss_lobatto;
    NodeFamily pressure_nodes = NodeFamily::equispaced;

    void validate() const
    {
        if (k < 1 || k > max_supported_k) throw std::invalid_argument("study: k must be 1, 2 or 3");
        if (levels.first < 1 || levels.last < levels.first)
            throw std::invalid_argument("study: levels must be nonempty, increasing and >= 1");
    }
};

struct LevelResult {
    int level = 0;
    double h = 0.0;
    double e_l2 = 0.0;  // ||u_h - I_h u||
    double e_h1 = 0.0;  // |u_h - I_h u|_1
    double p_l2 = 0.0;  // ||p_h - p_I||
    double u_l2 = 0.0;  // ||u - u_h||
    double u_h1 = 0.0;  // |u - u_h|_1
    double p_err = 0.0; // ||p - p_h||
    int iterations = 0;
    double div_norm = 0.0;
    int velocity_dofs = 0;
};

struct ConvergenceReport {
    ElementKind element = ElementKind::divfree;
    int k = 1;
    SolutionVariant solution = SolutionVariant::asymmetric;
    std::vector<LevelResult> levels;

    template <class Member>
    std::vector<std::optional<double>> rates_of(Member m) const
    {
        std::vector<double> e;
        for (const auto& l : levels) e.push_back(l.*m);
        return rates(e);
    }
    /// Rate of a column over the last level pair.
    template <class Member>
    std::optional<double> last_rate(Member m) const
    {
        if (levels.size() < 2) return std::nullopt;
        return rates_of(m).back();
    }
};

inline std::string to_string(ElementKind e) { return e == ElementKind::divfree ? "divfree" : "br"; }
inline std::string to_string(SolutionVariant s) { return s == SolutionVariant::asymmetric ? "asym" : "sym"; }

/// Everything produced by one discrete solve; kept for dumps and tests.
struct LevelSolve {
    VelocitySpace V;
    ScalarSpace P;                 // Q_k^{dc} (divergence-free) or Q_{k-1}^{dc} (Bernardi-Raugel)
    StokesSolution solution;
    VelocityField velocity;        // u_h, all DOFs
    std::vector<double> pressure;  // p_h in P, all DOFs, mean zero
};

/// p_h = pressure_sign * div w_h sampled at the nodes of Q_k^{dc}; exact because div V_h is in Q_k^{dc}.
inline std::vector<double> recover_pressure(const VelocitySpace& V, const Vector& accumulator, const ScalarSpace& P)
{
    const VelocityField w = expand_velocity(V, accumulator);
    const Mesh& mesh = V.mesh;
    std::vector<double> p(static_cast<std::size_t>(P.dofs.total_dofs()));
    const int nloc = P.element.num_nodes();
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const CellGeometry geom = mesh.cell(i, j);
            const auto dofs = P.dofs.cell_dofs(mesh.cell_index(i, j));
            for (int l = 0; l < nloc; ++l) {
                const auto [rx, ry] = P.element.node(l);
                const auto [x, y] = geom.map(rx, ry);
                const double div = eval_in_cell(V[0], mesh, w.c1, i, j, x, y).dx +
                                   eval_in_cell(V[1], mesh, w.c2, i, j, x, y).dy;
                p[static_cast<std::size_t>(dofs[static_cast<std::size_t>(l)])] = pressure_sign * div;
            }
        }
    return p;
}

/// Assemble and solve on one level for arbitrary polynomial load data.
inline LevelSolve solve_level(const StudyConfig& cfg, int level, const BivariatePoly& f1, const BivariatePoly& f2)
{
    const Mesh mesh = build_uniform(level);
    VelocitySpace V = velocity_space(mesh, cfg.k, cfg.nodes);
    const int nq = default_quadrature_points(cfg.k);
    ScalarSpace P = cfg.element == ElementKind::divfree ? discontinuous_space(mesh, cfg.k, cfg.pressure_nodes)
                                                        : br_pressure_space(mesh, cfg.k, cfg.pressure_nodes);
    const LinearOperator a = assemble_stiffness(V, nq);
    const Vector load = assemble_load(f1, f2, V, nq);
    const LinearOperator d = assemble_div_div(V, nq);
    const LinearOperator g = assemble_div_sampler(V, nq);
    StokesSolution sol;
    std::vector<double> p;
    if (cfg.element == ElementKind::divfree) {
        sol = iterated_penalty(a, d, load, cfg.penalty, &g);
        p = recover_pressure(V, sol.accumulator, P);
    } else {
        const LinearOperator b = assemble_div_pressure(V, P, nq);
        const LinearOperator m = assemble_mass(P, mesh, nq, false);
        sol = uzawa(a, b, load, m, cfg.uzawa);
        sol.div_norm = div_norm_sampled(g, sol.velocity);
        p.assign(sol.pressure.data(), sol.pressure.data() + sol.pressure.size());
    }
    const double mean = field_mean(P, mesh, p, nq);
    for (double& v : p) v -= mean;
    VelocityField uh = expand_velocity(V, sol.velocity);
    return {std::move(V), std::move(P), std::move(sol), std::move(uh), std::move(p)};
}

inline LevelResult measure_level(const StudyConfig& cfg, const LevelSolve& s, const StokesManufactured& exact)
{
    const VelocitySpace& V = s.V;
    const int nq = default_quadrature_points(cfg.k);
    const VelocityField ui = cfg.interpolant == InterpolantKind::lagrange
                                 ? lagrange_interpolate(exact.u1, exact.u2, V)
                                 : moment_interpolate_velocity(exact.u1, exact.u2, V, nq);
    VelocityField diff = s.velocity;
    for (std::size_t i = 0; i < diff.c1.size(); ++i) diff.c1[i] -= ui.c1[i];
    for (std::size_t i = 0; i < diff.c2.size(); ++i) diff.c2[i] -= ui.c2[i];
    const ExactScalar zero = ExactScalar::zero();
    const ExactScalar u1 = ExactScalar::from_poly(exact.u1);
    const ExactScalar u2 = ExactScalar::from_poly(exact.u2);

    const std::vector<double> pi = interpolate_pressure(exact.p, s.P, V.mesh, nq);
    std::vector<double> pdiff = s.pressure;
    for (std::size_t i = 0; i < pdiff.size(); ++i) pdiff[i] -= pi[i];

    LevelResult r;
    r.level = V.mesh.level();
    r.h = V.mesh.max_cell_size();
    r.e_l2 = velocity_error_l2(V, diff, zero, zero, nq);
    r.e_h1 = velocity_error_h1_semi(V, diff, zero, zero, nq);
    r.p_l2 = error_l2(s.P, V.mesh, pdiff, zero.value, nq);
    r.u_l2 = velocity_error_l2(V, s.velocity, u1, u2, nq);
    r.u_h1 = velocity_error_h1_semi(V, s.velocity, u1, u2, nq);
    r.p_err = error_l2(s.P, V.mesh, s.pressure, exact.p, nq);
    r.iterations = s.solution.iterations;
    r.div_norm = s.solution.div_norm;
    r.velocity_dofs = V.num_free();
    return r;
}

/// Raised when a level fails; carries the level number.
class StudyError : public std::runtime_error {
public:
    StudyError(int level, const std::string& what)
        : std::runtime_error("level " + std::to_string(level) + ": " + what), level_(level)
    {
    }
    int level() const noexcept { return level_; }

private:
    int level_;
};

inline ConvergenceReport run_convergence_study(const StudyConfig& cfg)
{
    cfg.validate();
    const StokesManufactured exact = make_manufactured(cfg.solution);
    ConvergenceReport report{cfg.element, cfg.k, cfg.solution, {}};
    for (int level = cfg.levels.first; level <= cfg.levels.last; ++level) {
        try {
            const LevelSolve s = solve_level(cfg, level, exact.f1, exact.f2);
            report.levels.push_back(measure_level(cfg, s, exact));
        } catch (const std::exception& e) {
            throw StudyError(level, e.what());
        }
    }
    return report;
}

// ---------------------------------------------------------------------------------------------
// Output

namespace detail {

inline std::string fmt_rate(const std::optional<double>& r, int prec = 2)
{
    if (!r) return "";
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << *r;
    return os.str();
}

inline std::string fmt_sci(double v)
{
    std::ostringstream os;
    os << std::scientific << std::setprecision(6) << v;
    return os.str();
}

} // namespace detail

inline void write_text(std::ostream& os, const ConvergenceReport& r)
{
    const auto rl2 = r.rates_of(&LevelResult::e_l2);
    const auto rh1 = r.rates_of(&LevelResult::e_h1);
    const auto rp = r.rates_of(&LevelResult::p_l2);
    os << "element=" << to_string(r.element) << " k=" << r.k << " solution=" << to_string(r.solution) << "\n";
    os << std::left << std::setw(4) << "lvl" << std::right << std::setw(14) << "|e|_L2" << std::setw(6) << "h^n"
       << std::setw(14) << "|e|_H1" << std::setw(6) << "h^n" << std::setw(14) << "|eps|_L2" << std::setw(6) << "h^n"
       << std::setw(6) << (r.element == ElementKind::divfree ? "#it" : "#Uz") << std::setw(13) << "|div u_h|"
       << std::setw(14) << "|u-u_h|_H1" << std::setw(14) << "|p-p_h|_L2" << "\n";
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
        const LevelResult& l = r.levels[i];
        os << std::left << std::setw(4) << l.level << std::right << std::setw(14) << detail::fmt_sci(l.e_l2)
           << std::setw(6) << detail::fmt_rate(rl2[i], 1) << std::setw(14) << detail::fmt_sci(l.e_h1) << std::setw(6)
           << detail::fmt_rate(rh1[i], 1) << std::setw(14) << detail::fmt_sci(l.p_l2) << std::setw(6)
           << detail::fmt_rate(rp[i], 1) << std::setw(6) << l.iterations << std::setw(13) << std::setprecision(2)
           << std::scientific << l.div_norm << std::setw(14) << detail::fmt_sci(l.u_h1) << std::setw(14)
           << detail::fmt_sci(l.p_err) << std::defaultfloat << "\n";
    }
}

/// CSV: level,e_l2,rate_l2,e_h1,rate_h1,p_l2,rate_p,iters,div_norm  followed by the
/// secondary error convention u_l2,rate_u_l2,u_h1,rate_u_h1,p_err,rate_p_err.
inline void write_csv(std::ostream& os, const ConvergenceReport& r)
{
    const auto rl2 = r.rates_of(&LevelResult::e_l2);
    const auto rh1 = r.rates_of(&LevelResult::e_h1);
    const auto rp = r.rates_of(&LevelResult::p_l2);
    const auto ru2 = r.rates_of(&LevelResult::u_l2);
    const auto ruh = r.rates_of(&LevelResult::u_h1);
    const auto rpe = r.rates_of(&LevelResult::p_err);
    os << "level,e_l2,rate_l2,e_h1,rate_h1,p_l2,rate_p,iters,div_norm,u_l2,rate_u_l2,u_h1,rate_u_h1,p_err,rate_p_err\n";
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
        const LevelResult& l = r.levels[i];
        os << l.level << ',' << detail::fmt_sci(l.e_l2) << ',' << detail::fmt_rate(rl2[i], 4) << ','
           << detail::fmt_sci(l.e_h1) << ',' << detail::fmt_rate(rh1[i], 4) << ',' << detail::fmt_sci(l.p_l2) << ','
           << detail::fmt_rate(rp[i], 4) << ',' << l.iterations << ',' << detail::fmt_sci(l.div_norm) << ','
           << detail::fmt_sci(l.u_l2) << ',' << detail::fmt_rate(ru2[i], 4) << ',' << detail::fmt_sci(l.u_h1) << ','
           << detail::fmt_rate(ruh[i], 4) << ',' << detail::fmt_sci(l.p_err) << ',' << detail::fmt_rate(rpe[i], 4)
           << '\n';
    }
}

inline nlohmann::json to_json(const ConvergenceReport& r)
{
    auto rate_json = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    const auto rl2 = r.rates_of(&LevelResult::e_l2);
    const auto rh1 = r.rates_of(&LevelResult::e_h1);
    const auto rp = r.rates_of(&LevelResult::p_l2);
    nlohmann::json j;
    j["element"] = to_string(r.element);
    j["k"] = r.k;
    j["solution"] = to_string(r.solution);
    j["levels"] = nlohmann::json::array();
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
        const LevelResult& l = r.levels[i];
        j["levels"].push_back({{"level", l.level},
                               {"h", l.h},
                               {"e_l2", l.e_l2},
                               {"rate_l2", rate_json(rl2[i])},
                               {"e_h1", l.e_h1},
                               {"rate_h1", rate_json(rh1[i])},
                               {"p_l2", l.p_l2},
                               {"rate_p", rate_json(rp[i])},
                               {"iters", l.iterations},
                               {"div_norm", l.div_norm},
                               {"u_l2", l.u_l2},
                               {"u_h1", l.u_h1},
                               {"p_err", l.p_err},
                               {"velocity_dofs", l.velocity_dofs}});
    }
    return j;
}

// ---------------------------------------------------------------------------------------------
// Lemma-rate studies

struct LemmaReport {
    int k = 1;
    int component = 0;
    int test_space = 0;
    DerivativePair pair = DerivativePair::xx;
    std::vector<int> levels;
    std::vector<double> norms;

    std::vector<std::optional<double>> rate_list() const { return rates(norms); }
    std::optional<double> last_rate() const
    {
        if (norms.size() < 2) return std::nullopt;
        return rate_list().back();
    }
};

/// Functional-norm decay for the asymmetric manufactured velocity component.
inline LemmaReport run_lemma_study(int k, int component, DerivativePair pair, LevelRange levels, int test_space = -1,
                                   NodeFamily nodes = NodeFamily::gauss_lobatto)
{
    if (test_space < 0) test_space = component;
    const StokesManufactured exact = make_manufactured(SolutionVariant::asymmetric);
    const ExactScalar u = ExactScalar::from_poly(component == 0 ? exact.u1 : exact.u2);
    LemmaReport rep{k, component, test_space, pair, {}, {}};
    for (int level = levels.first; level <= levels.last; ++level) {
        const VelocitySpace V = velocity_space(build_uniform(level), k, nodes);
        rep.levels.push_back(level);
        rep.norms.push_back(lemma_functional_norm(u, component, pair, test_space, V));
    }
    return rep;
}

inline void write_text(std::ostream& os, const LemmaReport& r)
{
    const auto rs = r.rate_list();
    os << "lemma k=" << r.k << " component=" << r.component + 1 << " test_space=V_h," << r.test_space + 1
       << " pair=" << to_string(r.pair) << "\n";
    os << std::left << std::setw(6) << "level" << std::right << std::setw(16) << "norm" << std::setw(8) << "rate" << "\n";
    for (std::size_t i = 0; i < r.levels.size(); ++i)
        os << std::left << std::setw(6) << r.levels[i] << std::right << std::setw(16) << detail::fmt_sci(r.norms[i])
           << std::setw(8) << detail::fmt_rate(rs[i]) << "\n";
}

// ---------------------------------------------------------------------------------------------
// Field dumps

struct DumpStats {
    double p_center = 0.0;      // p_h sampled at (0.5, 0.5)
    double max_abs_div = 0.0;   // max |div u_h| over the lattice
    int samples = 0;
};

/// Sample u_h, p_h and p_h - p on an n x n lattice and write fields.csv into `out_dir`.
/// With `zero_load` the solve uses f = 0 (and p = 0 as the reference pressure).
inline DumpStats dump_fields(const StudyConfig& cfg, int level, const std::filesystem::path& out_dir,
                             int n = 101, bool zero_load = false)
{
    const StokesManufactured exact = make_manufactured(cfg.solution);
    const BivariatePoly zero;
    const LevelSolve s =
        zero_load ? solve_level(cfg, level, zero, zero) : solve_level(cfg, level, exact.f1, exact.f2);
    const Mesh& mesh = s.V.mesh;
    std::filesystem::create_directories(out_dir);
    const auto path = out_dir / "fields.csv";
    std::ofstream os(path);
    if (!os) throw std::runtime_error("dump_fields: cannot open " + path.string());
    os << "x,y,u1,u2,p_h,p_h_minus_p,div_u_h\n";
    os << std::setprecision(12);
    DumpStats stats;
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            const double x = n == 1 ? 0.5 : static_cast<double>(a) / (n - 1);
            const double y = n == 1 ? 0.5 : static_cast<double>(b) / (n - 1);
            const PointValue v1 = eval_field(s.V[0], mesh, s.velocity.c1, x, y);
            const PointValue v2 = eval_field(s.V[1], mesh, s.velocity.c2, x, y);
            const double ph = eval_field(s.P, mesh, s.pressure, x, y).value;
            const double pex = zero_load ? 0.0 : exact.p(x, y);
            const double div = v1.dx + v2.dy;
            os << x << ',' << y << ',' << v1.value << ',' << v2.value << ',' << ph << ',' << ph - pex << ',' << div
               << '\n';
            stats.max_abs_div = std::max(stats.max_abs_div, std::abs(div));
            ++stats.samples;
        }
    stats.p_center = eval_field(s.P, mesh, s.pressure, 0.5, 0.5).value;
    if (!os) throw std::runtime_error("dump_fields: write failed for " + path.string());
    return stats;
}

} // namespace dfs
