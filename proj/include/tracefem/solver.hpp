#pragma once

#include "tracefem/assembly.hpp"

#include <Eigen/Dense>

#include <string>

namespace tracefem {

/// automatic: direct up to `direct_limit` unknowns, iterative above.
enum class SolverMethod { automatic, direct, iterative };

[[nodiscard]] std::string to_string(SolverMethod method);
[[nodiscard]] SolverMethod parse_solver_method(const std::string& name);

struct SolverOptions {
    SolverMethod method = SolverMethod::automatic;
    int direct_limit = 60000;
    double tolerance = 1e-10;
    int max_iterations = 2000;
    int restart = 200;  // GMRES fallback
    int refinement_steps = 3;  // iterative refinement after a direct solve
};

struct SolveReport {
    SolverMethod method = SolverMethod::direct;
    std::string backend;
    int iterations = 0;
    double relative_residual = 0.0;
    double seconds = 0.0;
};

/// Thrown on factorization breakdown or a missed residual target; carries
/// the report of the failed attempt.
class SolveFailure : public SolverError {
public:
    SolveFailure(const std::string& what, SolveReport report) : SolverError(what), report_(std::move(report)) {}
    [[nodiscard]] const SolveReport& report() const { return report_; }

private:
    SolveReport report_;
};

struct Solution {
    Eigen::VectorXd x;  // reduced unknowns
    SolveReport report;
};

[[nodiscard]] Solution solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, const SolverOptions& options = {});

/// Solves the reduced system and returns the full unknown vector.
[[nodiscard]] Eigen::VectorXd solve(const LinearSystem& system, const SolverOptions& options, SolveReport* report);

/// Name of the direct backend compiled in.
[[nodiscard]] std::string direct_backend();

}  // namespace tracefem
