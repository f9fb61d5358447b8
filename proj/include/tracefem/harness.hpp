#pragma once

// Convergence studies, error norms and rates, network diagnostics.

#include "tracefem/assembly.hpp"
#include "tracefem/geometry.hpp"
#include "tracefem/manufactured.hpp"
#include "tracefem/octree_mesh.hpp"
#include "tracefem/solver.hpp"
#include "tracefem/trace_space.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tracefem {

struct RunOptions {
    FormParameters params;
    SolverOptions solver;
};

/// Mesh, geometry, space and solution of one level. Holds references into
/// the case's network, so the case must outlive it.
struct LevelSolution {
    explicit LevelSolution(OctreeMesh m) : mesh(std::move(m)) {}

    OctreeMesh mesh;
    ReconstructedGeometry geometry;
    ProductSpace space;
    LinearSystem system;
    Eigen::VectorXd x;  // full unknown vector
    SolveReport report;

    [[nodiscard]] Discretization discretization(const FractureNetwork& network) const
    {
        return {network, mesh, geometry, space};
    }
};

/// Default options with the case's Dirichlet treatment.
[[nodiscard]] RunOptions default_options(const BenchmarkCase& bc);

[[nodiscard]] OctreeMesh build_mesh(const FractureNetwork& network, const MeshLevel& level);

/// Builds and solves one level.
[[nodiscard]] std::unique_ptr<LevelSolution> solve_level(const BenchmarkCase& bc, const MeshLevel& level,
                                                         const RunOptions& options);

/// Same, on a caller-supplied mesh.
[[nodiscard]] std::unique_ptr<LevelSolution> solve_on_mesh(const BenchmarkCase& bc, OctreeMesh mesh,
                                                           const RunOptions& options);

struct ErrorNorms {
    double u_l2 = 0.0;
    double p_l2 = 0.0;
    double p_linf = 0.0;
};

/// Errors against the exact fields at surface quadrature points. Pressure
/// errors are mean-adjusted per connected group that had to be pinned.
[[nodiscard]] ErrorNorms compute_errors(const BenchmarkCase& bc, const LevelSolution& sol);

/// Smallest active (cut) cell size over all components.
[[nodiscard]] double cut_cell_size(const ProductSpace& space, const OctreeMesh& mesh);

/// Number of distinct mesh vertices carrying a pressure DOF, summed over components.
[[nodiscard]] int pressure_dofs(const ProductSpace& space);

struct LevelRecord {
    double h = 0.0;
    int pressure_dofs = 0;
    int total_unknowns = 0;
    int free_unknowns = 0;
    int cells = 0;
    ErrorNorms errors;
    double solve_residual = 0.0;
    double seconds = 0.0;
};

struct ErrorReport {
    std::string case_name;
    std::vector<LevelRecord> levels;

    /// rate_k = log(e_{k-1}/e_k) / log(h_{k-1}/h_k), k >= 1; NaN for non-positive input.
    [[nodiscard]] std::vector<double> rates(double ErrorNorms::*metric) const;
};

[[nodiscard]] double convergence_rate(double e0, double e1, double h0, double h1);

/// Solves every level. On a solver failure the partial report is attached to
/// the thrown ConvergenceFailure.
[[nodiscard]] ErrorReport run_convergence(const BenchmarkCase& bc, const std::vector<MeshLevel>& levels,
                                          const RunOptions& options, std::ostream* log = nullptr);

class ConvergenceFailure : public SolverError {
public:
    ConvergenceFailure(const std::string& what, ErrorReport partial)
        : SolverError(what), partial_(std::move(partial))
    {
    }
    [[nodiscard]] const ErrorReport& partial() const { return partial_; }

private:
    ErrorReport partial_;
};

void write_csv(std::ostream& out, const ErrorReport& report);
[[nodiscard]] ErrorReport read_csv(std::istream& in);

/// Human-readable table in the layout of the error tables.
void print_report(std::ostream& out, const ErrorReport& report);

struct FluxBalance {
    double inflow = 0.0;     // total flux entering through Dirichlet curves
    double outflow = 0.0;    // total flux leaving through Dirichlet curves
    double imbalance = 0.0;  // |inflow - outflow| / inflow
    double p_min = 0.0;      // over surface quadrature points and triangle vertices
    double p_max = 0.0;
};

/// Flux of u_h through every Dirichlet curve (outward conormal) and the
/// pressure range on the reconstructed surface.
[[nodiscard]] FluxBalance flux_balance(const FractureNetwork& network, const LevelSolution& sol);

/// VTK polydata with per-vertex pressure and per-triangle velocity.
void export_solution(std::ostream& out, const FractureNetwork& network, const LevelSolution& sol);
void export_solution(const std::string& path, const FractureNetwork& network, const LevelSolution& sol);

}  // namespace tracefem
