// Command-line driver: convergence studies, lemma-rate studies and field dumps.

#include <CLI11.hpp>

#include <dfstokes/study.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <regex>

namespace {

dfs::LevelRange parse_levels(const std::string& s)
{
    static const std::regex range(R"((\d+)\.\.(\d+))");
    static const std::regex single(R"((\d+))");
    std::smatch m;
    if (std::regex_match(s, m, range)) return {std::stoi(m[1]), std::stoi(m[2])};
    if (std::regex_match(s, m, single)) return {std::stoi(m[1]), std::stoi(m[1])};
    throw CLI::ValidationError("--levels", "expected A..B, got '" + s + "'");
}

const std::map<std::string, dfs::ElementKind> element_names{{"divfree", dfs::ElementKind::divfree},
                                                            {"br", dfs::ElementKind::br}};
const std::map<std::string, dfs::SolutionVariant> solution_names{{"asym", dfs::SolutionVariant::asymmetric},
                                                                 {"sym", dfs::SolutionVariant::symmetric}};
const std::map<std::string, dfs::DerivativePair> pair_names{{"xx", dfs::DerivativePair::xx},
                                                            {"yy", dfs::DerivativePair::yy},
                                                            {"xy", dfs::DerivativePair::xy},
                                                            {"yx", dfs::DerivativePair::yx}};
const std::map<std::string, dfs::InterpolantKind> interpolant_names{{"lagrange", dfs::InterpolantKind::lagrange},
                                                                    {"moment", dfs::InterpolantKind::moment}};
const std::map<std::string, dfs::NodeFamily> node_names{{"lobatto", dfs::NodeFamily::gauss_lobatto},
                                                        {"equispaced", dfs::NodeFamily::equispaced}};
const std::map<std::string, dfs::NodeFamily> pressure_node_names{{"equispaced", dfs::NodeFamily::equispaced},
                                                                 {"gauss", dfs::NodeFamily::gauss_legendre}};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Divergence-free Q_{k+1,k}-Q_{k,k+1} and rotated Bernardi-Raugel Stokes solvers"};
    app.require_subcommand(1);

    dfs::StudyConfig cfg;
    std::string levels_str;
    std::string format = "text";
    std::string out_path;
    std::optional<double> r_opt, alpha_opt;

    auto* converge = app.add_subcommand("converge", "run a convergence study on the uniform hierarchy");
    converge->add_option("--element", cfg.element, "divfree or br")
        ->transform(CLI::CheckedTransformer(element_names))
        ->required();
    converge->add_option("--k", cfg.k, "velocity degree parameter")->check(CLI::Range(1, 3))->required();
    converge->add_option("--levels", levels_str, "level range A..B (default depends on k)");
    converge->add_option("--solution", cfg.solution, "asym or sym")
        ->transform(CLI::CheckedTransformer(solution_names));
    converge->add_option("--format", format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
    converge->add_option("--r", r_opt, "iterated penalty parameter");
    converge->add_option("--alpha", alpha_opt, "Uzawa step");
    converge->add_option("--interpolant", cfg.interpolant, "lagrange or moment")
        ->transform(CLI::CheckedTransformer(interpolant_names));
    converge->add_option("--nodes", cfg.nodes, "velocity lattice: lobatto or equispaced")
        ->transform(CLI::CheckedTransformer(node_names));
    converge->add_option("--pressure-nodes", cfg.pressure_nodes, "pressure lattice: equispaced or gauss")
        ->transform(CLI::CheckedTransformer(pressure_node_names));
    converge->add_option("--out", out_path, "output file (default stdout)");

    int lemma_k = 1, component = 1, test_space = 0;
    dfs::DerivativePair pair = dfs::DerivativePair::xx;
    auto* lemma = app.add_subcommand("lemma", "measure decay of the moment-interpolant functional norms");
    lemma->add_option("--k", lemma_k)->check(CLI::Range(1, 3))->required();
    lemma->add_option("--pair", pair)->transform(CLI::CheckedTransformer(pair_names))->required();
    lemma->add_option("--component", component, "velocity component 1 or 2")->check(CLI::Range(1, 2));
    lemma->add_option("--test-space", test_space, "test space 1 or 2 (default: same as component)")
        ->check(CLI::Range(1, 2));
    lemma->add_option("--levels", levels_str, "level range A..B")->required();

    int dump_level = 3;
    int samples = 101;
    auto* dump = app.add_subcommand("dump", "sample u_h, p_h and p_h - p on a uniform lattice");
    dump->add_option("--element", cfg.element)->transform(CLI::CheckedTransformer(element_names))->required();
    dump->add_option("--k", cfg.k)->check(CLI::Range(1, 3))->required();
    dump->add_option("--level", dump_level)->check(CLI::PositiveNumber)->required();
    dump->add_option("--solution", cfg.solution)->transform(CLI::CheckedTransformer(solution_names));
    dump->add_option("--samples", samples)->check(CLI::Range(2, 2001));
    dump->add_option("--out", out_path, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (converge->parsed()) {
            cfg.levels = levels_str.empty() ? dfs::default_levels(cfg.k) : parse_levels(levels_str);
            if (r_opt) cfg.penalty.r = *r_opt;
            if (alpha_opt) cfg.uzawa.alpha = *alpha_opt;
            const dfs::ConvergenceReport report = dfs::run_convergence_study(cfg);
            std::ofstream file;
            if (!out_path.empty()) {
                file.open(out_path);
                if (!file) throw std::runtime_error("cannot open " + out_path);
            }
            std::ostream& os = out_path.empty() ? std::cout : file;
            if (format == "csv")
                dfs::write_csv(os, report);
            else if (format == "json")
                os << dfs::to_json(report).dump(2) << "\n";
            else
                dfs::write_text(os, report);
        } else if (lemma->parsed()) {
            const int ts = test_space == 0 ? component - 1 : test_space - 1;
            const auto rep = dfs::run_lemma_study(lemma_k, component - 1, pair, parse_levels(levels_str), ts);
            dfs::write_text(std::cout, rep);
        } else if (dump->parsed()) {
            const auto stats = dfs::dump_fields(cfg, dump_level, out_path, samples);
            std::cout << "wrote " << stats.samples << " samples to " << out_path << "/fields.csv; p_h(0.5,0.5) = "
                      << stats.p_center << ", max |div u_h| = " << stats.max_abs_div << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
