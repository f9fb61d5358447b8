#include "tracefem/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>
#ifdef TRACEFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <chrono>

namespace tracefem {

std::string to_string(SolverMethod method)
{
    switch (method) {
    case SolverMethod::automatic:
        return "auto";
    case SolverMethod::direct:
        return "direct";
    case SolverMethod::iterative:
        return "iterative";
    }
    return "unknown";
}

SolverMethod parse_solver_method(const std::string& name)
{
    for (SolverMethod m : {SolverMethod::automatic, SolverMethod::direct, SolverMethod::iterative}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw ConfigurationError("unknown solver method '" + name + "'");
}

std::string direct_backend()
{
#ifdef TRACEFEM_HAVE_UMFPACK
    return "umfpack";
#else
    return "eigen-sparselu";
#endif
}

namespace {

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b)
{
    const double nb = b.norm();
    const double nr = (b - a * x).norm();
    return nb > 0.0 ? nr / nb : nr;
}

template <class Factorization>
void direct_solve(Factorization& lu, const SparseMatrix& a, const Eigen::VectorXd& b, const SolverOptions& options,
                  Eigen::VectorXd& x, SolveReport& report)
{
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw SolveFailure("direct solver: factorization failed (matrix singular on the constrained space?)",
                           report);
    }
    x = lu.solve(b);
    report.relative_residual = relative_residual(a, x, b);
    for (int k = 0; k < options.refinement_steps && report.relative_residual > options.tolerance; ++k) {
        x += lu.solve(Eigen::VectorXd(b - a * x));
        report.relative_residual = relative_residual(a, x, b);
        report.iterations = k + 1;
    }
}

// BiCGSTAB with a cheap ILUT first, GMRES with a stronger ILUT if that stalls.
void iterative_solve(const SparseMatrix& a, const Eigen::VectorXd& b, const SolverOptions& options,
                     Eigen::VectorXd& x, SolveReport& report)
{
    {
        report.backend = "bicgstab-ilut";
        Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>> bicg;
        bicg.preconditioner().setDroptol(1e-4);
        bicg.preconditioner().setFillfactor(10);
        bicg.setMaxIterations(options.max_iterations);
        bicg.setTolerance(options.tolerance * 0.1);
        bicg.compute(a);
        if (bicg.info() == Eigen::Success) {
            x = bicg.solve(b);
            report.iterations = static_cast<int>(bicg.iterations());
            report.relative_residual = relative_residual(a, x, b);
            if (report.relative_residual <= options.tolerance) {
                return;
            }
        }
    }
    report.backend = "gmres-ilut";
    Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<double>> gmres;
    gmres.preconditioner().setDroptol(1e-5);
    gmres.preconditioner().setFillfactor(20);
    gmres.set_restart(options.restart);
    gmres.setMaxIterations(options.max_iterations);
    gmres.setTolerance(options.tolerance * 0.1);
    gmres.compute(a);
    if (gmres.info() != Eigen::Success) {
        throw SolveFailure("iterative solver: preconditioner setup failed", report);
    }
    x = gmres.solve(b);
    report.iterations = static_cast<int>(gmres.iterations());
    report.relative_residual = relative_residual(a, x, b);
}

}  // namespace

Solution solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, const SolverOptions& options)
{
    if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size()) {
        throw PreconditionError("solve: dimension mismatch");
    }
    const auto start = std::chrono::steady_clock::now();
    Solution out;
    SolveReport& report = out.report;
    report.method = options.method;
    if (report.method == SolverMethod::automatic) {
        report.method = matrix.rows() <= options.direct_limit ? SolverMethod::direct : SolverMethod::iterative;
    }
    if (rhs.size() == 0 || rhs.norm() == 0.0) {
        out.x = Eigen::VectorXd::Zero(rhs.size());
        report.backend = "trivial";
        return out;
    }

    if (report.method == SolverMethod::direct) {
        report.backend = direct_backend();
#ifdef TRACEFEM_HAVE_UMFPACK
        Eigen::UmfPackLU<SparseMatrix> lu;
#else
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
#endif
        direct_solve(lu, matrix, rhs, options, out.x, report);
    } else {
        iterative_solve(matrix, rhs, options, out.x, report);
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!(report.relative_residual <= options.tolerance)) {
        throw SolveFailure(to_string(report.method) + " solver: relative residual " +
                               std::to_string(report.relative_residual) + " above tolerance",
                           report);
    }
    return out;
}

Eigen::VectorXd solve(const LinearSystem& system, const SolverOptions& options, SolveReport* report)
{
    Solution s = solve(system.reduced_matrix, system.reduced_rhs, options);
    if (report != nullptr) {
        *report = s.report;
    }
    return system.expand(s.x);
}

}  // namespace tracefem
