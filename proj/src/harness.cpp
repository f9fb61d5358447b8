#include "tracefem/harness.hpp"

#include "tracefem/quadrature.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace tracefem {

RunOptions default_options(const BenchmarkCase& bc)
{
    RunOptions options;
    options.params.dirichlet = bc.dirichlet;
    return options;
}

OctreeMesh build_mesh(const FractureNetwork& network, const MeshLevel& level)
{
    OctreeMesh mesh = OctreeMesh::uniform(network.domain(), level.roots);
    if (level.refine_levels > 0) {
        mesh = refine_near_surface(mesh, network, level.refine_levels, level.band);
    }
    return mesh;
}

std::unique_ptr<LevelSolution> solve_on_mesh(const BenchmarkCase& bc, OctreeMesh mesh, const RunOptions& options)
{
    auto sol = std::make_unique<LevelSolution>(std::move(mesh));
    sol->geometry = reconstruct(bc.network, sol->mesh);
    sol->space = build_product_space(bc.network, sol->mesh, sol->geometry, options.params.dirichlet);
    const Discretization disc = sol->discretization(bc.network);
    sol->system = assemble(disc, bc.data, options.params);
    sol->x = solve(sol->system, options.solver, &sol->report);
    return sol;
}

std::unique_ptr<LevelSolution> solve_level(const BenchmarkCase& bc, const MeshLevel& level, const RunOptions& options)
{
    return solve_on_mesh(bc, build_mesh(bc.network, level), options);
}

double cut_cell_size(const ProductSpace& space, const OctreeMesh& mesh)
{
    double h = std::numeric_limits<double>::infinity();
    for (const ComponentSpace& cs : space.components) {
        for (int c : cs.active_cells) {
            h = std::min(h, mesh.cell_size(c));
        }
    }
    return h;
}

int pressure_dofs(const ProductSpace& space)
{
    return space.num_scalar_dofs();
}

namespace {

template <class Fn>
void for_each_surface_point(const LevelSolution& sol, int comp, Fn&& fn)
{
    for (const CellPatch& patch : sol.geometry.components[comp].patches) {
        for (const Triangle& t : patch.triangles) {
            for (const QuadPoint& q : triangle_rule(t.v[0], t.v[1], t.v[2])) {
                fn(patch.cell, q);
            }
        }
    }
}

}  // namespace

ErrorNorms compute_errors(const BenchmarkCase& bc, const LevelSolution& sol)
{
    if (!bc.has_exact()) {
        throw PreconditionError("compute_errors: case '" + bc.name + "' has no exact solution");
    }
    const Discretization disc = sol.discretization(bc.network);
    const int n = static_cast<int>(bc.network.size());

    // Mean pressure offset for every group whose constant mode was pinned.
    std::vector<double> shift(n, 0.0);
    const auto groups = bc.network.connected_groups();
    for (int g : sol.space.pinned_groups) {
        double integral = 0.0;
        double area = 0.0;
        for (int ci : groups[g]) {
            for_each_surface_point(sol, ci, [&](int cell, const QuadPoint& q) {
                integral += q.w * (bc.exact_p[ci](q.x) - evaluate(disc, sol.x, ci, cell, q.x).p);
                area += q.w;
            });
        }
        for (int ci : groups[g]) {
            shift[ci] = area > 0.0 ? integral / area : 0.0;
        }
    }

    ErrorNorms e;
    for (int ci = 0; ci < n; ++ci) {
        for_each_surface_point(sol, ci, [&](int cell, const QuadPoint& q) {
            const TraceValue tv = evaluate(disc, sol.x, ci, cell, q.x);
            const double dp = bc.exact_p[ci](q.x) - tv.p - shift[ci];
            e.u_l2 += q.w * (bc.exact_u[ci](q.x) - tv.u).squaredNorm();
            e.p_l2 += q.w * dp * dp;
            e.p_linf = std::max(e.p_linf, std::abs(dp));
        });
    }
    e.u_l2 = std::sqrt(e.u_l2);
    e.p_l2 = std::sqrt(e.p_l2);
    return e;
}

double convergence_rate(double e0, double e1, double h0, double h1)
{
    if (!(e0 > 0.0 && e1 > 0.0 && h0 > 0.0 && h1 > 0.0) || h0 == h1) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::log(e0 / e1) / std::log(h0 / h1);
}

std::vector<double> ErrorReport::rates(double ErrorNorms::*metric) const
{
    std::vector<double> out;
    for (std::size_t k = 1; k < levels.size(); ++k) {
        out.push_back(convergence_rate(levels[k - 1].errors.*metric, levels[k].errors.*metric, levels[k - 1].h,
                                       levels[k].h));
    }
    return out;
}

ErrorReport run_convergence(const BenchmarkCase& bc, const std::vector<MeshLevel>& levels, const RunOptions& options,
                            std::ostream* log)
{
    ErrorReport report;
    report.case_name = bc.name;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        std::unique_ptr<LevelSolution> sol;
        try {
            sol = solve_level(bc, levels[k], options);
        } catch (const SolverError& e) {
            throw ConvergenceFailure("level " + std::to_string(k) + ": " + e.what(), report);
        }
        LevelRecord rec;
        rec.h = cut_cell_size(sol->space, sol->mesh);
        rec.pressure_dofs = pressure_dofs(sol->space);
        rec.total_unknowns = sol->space.num_unknowns();
        rec.free_unknowns = sol->space.num_free_unknowns();
        rec.cells = static_cast<int>(sol->mesh.num_cells());
        rec.errors = compute_errors(bc, *sol);
        rec.solve_residual = sol->report.relative_residual;
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.levels.push_back(rec);
        if (log != nullptr) {
            *log << "  level " << k << ": leaves " << sol->mesh.num_cells() << ", vertices " << sol->mesh.num_vertices()
                 << ", h " << rec.h << " (max " << sol->mesh.max_cell_size() << "), pressure dofs "
                 << rec.pressure_dofs << ", unknowns " << rec.free_unknowns << ", " << sol->report.backend
                 << " residual " << sol->report.relative_residual << ", " << std::fixed << std::setprecision(1)
                 << rec.seconds << std::defaultfloat << std::setprecision(6) << " s\n";
        }
    }
    return report;
}

namespace {

const char* kCsvHeader = "case,level,h,pressure_dofs,total_unknowns,free_unknowns,cells,err_u_l2,err_p_l2,err_p_linf,"
                         "rate_u_l2,rate_p_l2,rate_p_linf,residual,seconds";

std::string fmt(double v)
{
    if (std::isnan(v)) {
        return "";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s)
{
    if (s.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) {
        throw Error("csv: malformed number '" + s + "'");
    }
    return v;
}

}  // namespace

void write_csv(std::ostream& out, const ErrorReport& report)
{
    out << kCsvHeader << '\n';
    const auto ru = report.rates(&ErrorNorms::u_l2);
    const auto rp = report.rates(&ErrorNorms::p_l2);
    const auto ri = report.rates(&ErrorNorms::p_linf);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < report.levels.size(); ++k) {
        const LevelRecord& r = report.levels[k];
        out << report.case_name << ',' << k << ',' << fmt(r.h) << ',' << r.pressure_dofs << ',' << r.total_unknowns
            << ',' << r.free_unknowns << ',' << r.cells << ',' << fmt(r.errors.u_l2) << ',' << fmt(r.errors.p_l2)
            << ',' << fmt(r.errors.p_linf) << ',' << fmt(k > 0 ? ru[k - 1] : nan) << ','
            << fmt(k > 0 ? rp[k - 1] : nan) << ',' << fmt(k > 0 ? ri[k - 1] : nan) << ',' << fmt(r.solve_residual)
            << ',' << fmt(r.seconds) << '\n';
    }
}

ErrorReport read_csv(std::istream& in)
{
    ErrorReport report;
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw Error("csv: missing or unexpected header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (line.back() == ',') {
            f.emplace_back();
        }
        if (f.size() != 15) {
            throw Error("csv: expected 15 fields, got " + std::to_string(f.size()));
        }
        report.case_name = f[0];
        LevelRecord r;
        r.h = parse_double(f[2]);
        r.pressure_dofs = std::stoi(f[3]);
        r.total_unknowns = std::stoi(f[4]);
        r.free_unknowns = std::stoi(f[5]);
        r.cells = std::stoi(f[6]);
        r.errors.u_l2 = parse_double(f[7]);
        r.errors.p_l2 = parse_double(f[8]);
        r.errors.p_linf = parse_double(f[9]);
        r.solve_residual = parse_double(f[13]);
        r.seconds = parse_double(f[14]);
        report.levels.push_back(r);
    }
    return report;
}

void print_report(std::ostream& out, const ErrorReport& report)
{
    const auto ru = report.rates(&ErrorNorms::u_l2);
    const auto rp = report.rates(&ErrorNorms::p_l2);
    const auto ri = report.rates(&ErrorNorms::p_linf);
    auto rate = [](const std::vector<double>& r, std::size_t k) {
        char buf[16];
        if (k == 0 || std::isnan(r[k - 1])) {
            return std::string(6, ' ');
        }
        std::snprintf(buf, sizeof buf, "%6.2f", r[k - 1]);
        return std::string(buf);
    };
    char buf[256];
    out << report.case_name << '\n';
    out << "         h   p-dofs  unknowns   |u-uh|_L2  rate   |p-ph|_L2  rate  |p-ph|_Linf  rate\n";
    for (std::size_t k = 0; k < report.levels.size(); ++k) {
        const LevelRecord& r = report.levels[k];
        std::snprintf(buf, sizeof buf, "%10.4g %8d %9d  %10.3e %s  %10.3e %s  %10.3e %s\n", r.h, r.pressure_dofs,
                      r.free_unknowns, r.errors.u_l2, rate(ru, k).c_str(), r.errors.p_l2, rate(rp, k).c_str(),
                      r.errors.p_linf, rate(ri, k).c_str());
        out << buf;
    }
}

FluxBalance flux_balance(const FractureNetwork& network, const LevelSolution& sol)
{
    const Discretization disc = sol.discretization(network);
    FluxBalance fb;
    fb.p_min = std::numeric_limits<double>::infinity();
    fb.p_max = -std::numeric_limits<double>::infinity();
    for (int ci = 0; ci < static_cast<int>(network.size()); ++ci) {
        const FractureComponent& comp = network.components()[ci];
        const ComponentGeometry& cg = sol.geometry.components[ci];
        auto curve_flux = [&](const CurveSegmentSet& set) {
            for (const CurveSegment& s : set.segments) {
                for (const QuadPoint& q : segment_rule(s.a, s.b)) {
                    const double flux = q.w * evaluate(disc, sol.x, ci, s.cell, q.x).u.dot(s.conormal);
                    if (flux < 0.0) {
                        fb.inflow -= flux;
                    } else {
                        fb.outflow += flux;
                    }
                }
            }
        };
        for (int f = 0; f < kBoxFaces; ++f) {
            if (comp.box_faces[f].kind == BoundaryKind::dirichlet) {
                curve_flux(cg.box_curves[f]);
            }
        }
        for (std::size_t k = 0; k < comp.trims.size(); ++k) {
            if (comp.trims[k].kind == BoundaryKind::dirichlet) {
                curve_flux(cg.trim_curves[k]);
            }
        }
        for (const CellPatch& patch : cg.patches) {
            for (const Triangle& t : patch.triangles) {
                for (const Vec3& v : t.v) {
                    const double p = evaluate(disc, sol.x, ci, patch.cell, v).p;
                    fb.p_min = std::min(fb.p_min, p);
                    fb.p_max = std::max(fb.p_max, p);
                }
                for (const QuadPoint& q : triangle_rule(t.v[0], t.v[1], t.v[2])) {
                    const double p = evaluate(disc, sol.x, ci, patch.cell, q.x).p;
                    fb.p_min = std::min(fb.p_min, p);
                    fb.p_max = std::max(fb.p_max, p);
                }
            }
        }
    }
    fb.imbalance = fb.inflow > 0.0 ? std::abs(fb.inflow - fb.outflow) / fb.inflow : 0.0;
    return fb;
}

}  // namespace tracefem
