#include "tracefem/harness.hpp"

#include <fstream>
#include <ostream>

namespace tracefem {

void export_solution(std::ostream& out, const FractureNetwork& network, const LevelSolution& sol)
{
    const Discretization disc = sol.discretization(network);
    struct Tri {
        int comp;
        int cell;
        const Triangle* t;
    };
    struct Line {
        int comp;  // component whose trace is sampled
        int cell;
        Vec3 a, b;
        int kind;  // 1 junction, 2 dirichlet, 3 neumann
    };
    std::vector<Tri> tris;
    std::vector<Line> lines;
    for (int ci = 0; ci < static_cast<int>(network.size()); ++ci) {
        const ComponentGeometry& cg = sol.geometry.components[ci];
        for (const CellPatch& p : cg.patches) {
            for (const Triangle& t : p.triangles) {
                tris.push_back({ci, p.cell, &t});
            }
        }
        auto add = [&](const CurveSegmentSet& set) {
            if (set.kind == BoundaryKind::junction) {
                return;
            }
            for (const CurveSegment& s : set.segments) {
                lines.push_back({ci, s.cell, s.a, s.b, set.kind == BoundaryKind::dirichlet ? 2 : 3});
            }
        };
        for (const auto& set : cg.trim_curves) {
            add(set);
        }
        for (const auto& set : cg.box_curves) {
            add(set);
        }
    }
    for (std::size_t e = 0; e < sol.geometry.junctions.size(); ++e) {
        const int host = network.junctions()[e].host;
        for (const CurveSegment& s : sol.geometry.junctions[e].segments) {
            lines.push_back({host, s.cell, s.a, s.b, 1});
        }
    }

    out << "# vtk DataFile Version 3.0\nfracture network solution\nASCII\nDATASET POLYDATA\n";
    out.precision(17);
    out << "POINTS " << 3 * tris.size() + 2 * lines.size() << " double\n";
    std::vector<double> pressure;
    for (const Tri& t : tris) {
        for (const Vec3& p : t.t->v) {
            out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
            pressure.push_back(evaluate(disc, sol.x, t.comp, t.cell, p).p);
        }
    }
    for (const Line& l : lines) {
        for (const Vec3& p : {l.a, l.b}) {
            out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
            pressure.push_back(evaluate(disc, sol.x, l.comp, l.cell, p).p);
        }
    }
    const std::size_t base = 3 * tris.size();
    if (!lines.empty()) {
        out << "LINES " << lines.size() << ' ' << 3 * lines.size() << '\n';
        for (std::size_t i = 0; i < lines.size(); ++i) {
            out << "2 " << base + 2 * i << ' ' << base + 2 * i + 1 << '\n';
        }
    }
    if (!tris.empty()) {
        out << "POLYGONS " << tris.size() << ' ' << 4 * tris.size() << '\n';
        for (std::size_t i = 0; i < tris.size(); ++i) {
            out << "3 " << 3 * i << ' ' << 3 * i + 1 << ' ' << 3 * i + 2 << '\n';
        }
    }
    out << "CELL_DATA " << lines.size() + tris.size() << '\n';
    out << "SCALARS component int 1\nLOOKUP_TABLE default\n";
    for (const Line& l : lines) {
        out << (l.kind == 1 ? 0 : l.comp + 1) << '\n';
    }
    for (const Tri& t : tris) {
        out << t.comp + 1 << '\n';
    }
    out << "SCALARS kind int 1\nLOOKUP_TABLE default\n";
    for (const Line& l : lines) {
        out << l.kind << '\n';
    }
    for (std::size_t i = 0; i < tris.size(); ++i) {
        out << "0\n";
    }
    out << "VECTORS velocity double\n";
    for (std::size_t i = 0; i < lines.size(); ++i) {
        out << "0 0 0\n";
    }
    for (const Tri& t : tris) {
        const Vec3 c = (t.t->v[0] + t.t->v[1] + t.t->v[2]) / 3.0;
        const Vec3 u = evaluate(disc, sol.x, t.comp, t.cell, c).u;
        out << u[0] << ' ' << u[1] << ' ' << u[2] << '\n';
    }
    out << "POINT_DATA " << pressure.size() << '\n';
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (double p : pressure) {
        out << p << '\n';
    }
}

void export_solution(const std::string& path, const FractureNetwork& network, const LevelSolution& sol)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    export_solution(out, network, sol);
    if (!out) {
        throw Error("write to " + path + " failed");
    }
}

}  // namespace tracefem
