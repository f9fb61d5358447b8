#include "tracefem/config.hpp"
#include "tracefem/harness.hpp"
#include "tracefem/kernels.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace tracefem;

namespace {

void select_kernels(const std::string& name)
{
    if (name == "scalar") {
        kernels::set_isa(kernels::Isa::scalar);
    } else if (name == "avx2") {
        kernels::set_isa(kernels::Isa::avx2);
    }
}

int run(const std::string& path)
{
    const RunConfig cfg = load_config(path);
    select_kernels(cfg.kernels);
    const BenchmarkCase bc = make_case(cfg.case_name, cfg.case_params);
    const std::vector<MeshLevel> levels = resolve_levels(cfg, bc);
    const RunOptions options = resolve_options(cfg, bc);
    std::cout << "case " << bc.name << ", " << levels.size() << " level(s), kernels "
              << kernels::to_string(kernels::active_isa()) << ", solver " << to_string(options.solver.method)
              << " (tol " << options.solver.tolerance << "), Dirichlet "
              << to_string(options.params.dirichlet) << '\n';

    if (bc.has_exact()) {
        ErrorReport report;
        try {
            report = run_convergence(bc, levels, options, &std::cout);
        } catch (const ConvergenceFailure& e) {
            print_report(std::cerr, e.partial());
            throw;
        }
        print_report(std::cout, report);
        if (!cfg.csv_path.empty()) {
            std::ofstream out(cfg.csv_path);
            if (!out) {
                throw Error("cannot open " + cfg.csv_path);
            }
            write_csv(out, report);
            std::cout << "wrote " << cfg.csv_path << '\n';
        }
    }

    if (!bc.has_exact() || !cfg.vtk_path.empty()) {
        const auto sol = solve_level(bc, levels.back(), options);
        std::cout << "finest level: leaves " << sol->mesh.num_cells() << ", vertices " << sol->mesh.num_vertices()
                  << ", h min " << sol->mesh.min_cell_size() << ", h max " << sol->mesh.max_cell_size()
                  << ", unknowns " << sol->space.num_free_unknowns() << ", " << sol->report.backend << " residual "
                  << sol->report.relative_residual << '\n';
        const FluxBalance fb = flux_balance(bc.network, *sol);
        if (!bc.has_exact()) {
            std::cout << "Dirichlet inflow " << fb.inflow << ", outflow " << fb.outflow << ", imbalance "
                      << 100.0 * fb.imbalance << " %, ";
        }
        std::cout << "pressure range [" << fb.p_min << ", " << fb.p_max << "]\n";
        if (!cfg.vtk_path.empty()) {
            export_solution(cfg.vtk_path, bc.network, *sol);
            std::cout << "wrote " << cfg.vtk_path << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Trace finite elements for Darcy flow in fracture networks"};
    app.require_subcommand(1);
    std::string config;
    CLI::App* run_cmd = app.add_subcommand("run", "run a configured case");
    run_cmd->add_option("config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    CLI::App* list_cmd = app.add_subcommand("list-cases", "list the built-in cases");
    CLI11_PARSE(app, argc, argv);

    try {
        if (*list_cmd) {
            for (const std::string& name : case_names()) {
                std::cout << name << '\n';
            }
            return 0;
        }
        return run(config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
