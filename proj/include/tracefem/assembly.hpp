#pragma once

// Assembly of the stabilized mixed trace-FEM system.
//
//   a(u,p; v,q) = (K^-1 u, v) + (grad p, v) - (grad q, u) + (K grad p, grad q)
//               + sum_e rho_e/h^2 sum_{k<l} ([p]_kl, [q]_kl)_e
//               + rho_u h (n.grad u, n.grad v)_cells + rho_p h (n.grad p, n.grad q)_cells
//               + rho_dir/h^2 (p, q) on internal Dirichlet curves (and on box
//                 Dirichlet curves with the penalty treatment)
//   f(v,q)      = 2 (g, q) + (f, v + K grad q) - 2 (psi, q)_Neumann
//               + rho_dir/h^2 (p_D, q) on internal Dirichlet curves

#include "tracefem/trace_space.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <string>
#include <vector>

namespace tracefem {

enum class PenaltyScale { local, global };

struct FormParameters {
    double rho_e = 1.0;
    double rho_u = 1.0;
    double rho_p = 1.0;
    double rho_dir = 1.0;
    PenaltyScale penalty_h = PenaltyScale::local;
    DirichletTreatment dirichlet = DirichletTreatment::nodal_normal;  // box faces

    void validate() const;
};

/// Volume data per component; empty fields are zero.
struct FlowData {
    std::vector<VectorField> force;   // f
    std::vector<ScalarField> source;  // g
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct LinearSystem {
    SparseMatrix matrix;            // all unknowns, before elimination
    Eigen::VectorXd rhs;            // all unknowns
    std::vector<char> essential;    // per unknown
    Eigen::VectorXd essential_values;

    std::vector<int> free_unknowns;  // reduced index -> unknown
    SparseMatrix reduced_matrix;
    Eigen::VectorXd reduced_rhs;

    /// Full unknown vector from a reduced solution.
    [[nodiscard]] Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
};

[[nodiscard]] LinearSystem assemble(const Discretization& disc, const FlowData& data, const FormParameters& params);

/// y^T A x with the assembled (full) matrix: a(x; y).
[[nodiscard]] double bilinear_form(const LinearSystem& system, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// ||v,q||^2 evaluated directly from the fields, without the matrix.
[[nodiscard]] double energy_norm_squared(const Discretization& disc, const FormParameters& params,
                                         const Eigen::VectorXd& x);

/// Penalty length scale for a curve segment in `cell`.
[[nodiscard]] double penalty_length(const Discretization& disc, const FormParameters& params, int cell);

/// Matrix Market dump of the reduced system (matrix and right-hand side).
void write_matrix_market(const LinearSystem& system, const std::string& matrix_path, const std::string& rhs_path);

}  // namespace tracefem
