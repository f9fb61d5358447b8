#include "tracefem/trace_space.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace tracefem {

std::string to_string(DirichletTreatment treatment)
{
    switch (treatment) {
    case DirichletTreatment::nodal_normal:
        return "nodal_normal";
    case DirichletTreatment::nodal_face:
        return "nodal_face";
    case DirichletTreatment::penalty:
        return "penalty";
    }
    return "unknown";
}

DirichletTreatment parse_dirichlet_treatment(const std::string& name)
{
    for (DirichletTreatment t :
         {DirichletTreatment::nodal_normal, DirichletTreatment::nodal_face, DirichletTreatment::penalty}) {
        if (name == to_string(t)) {
            return t;
        }
    }
    throw ConfigurationError("unknown Dirichlet treatment '" + name + "'");
}

bool ComponentSpace::is_active(int cell) const
{
    return std::binary_search(active_cells.begin(), active_cells.end(), cell);
}

int ProductSpace::num_scalar_dofs() const
{
    int n = 0;
    for (const ComponentSpace& c : components) {
        n += c.num_dofs();
    }
    return n;
}

int ProductSpace::num_essential() const
{
    return static_cast<int>(std::count(essential.begin(), essential.end(), char{1}));
}

std::vector<CornerDof> ProductSpace::expand(const OctreeMesh& mesh, int comp, int cell) const
{
    const ComponentSpace& cs = components[comp];
    std::vector<CornerDof> out;
    out.reserve(8);
    const auto& cv = mesh.cell_vertices(cell);
    for (int a = 0; a < 8; ++a) {
        const int v = cv[a];
        const int k = mesh.constraint_index(v);
        if (k < 0) {
            const int d = cs.vertex_dof[v];
            if (d < 0) {
                throw PreconditionError("trace space: cell is not active for this component");
            }
            out.push_back({a, cs.offset + d, 1.0});
        } else {
            const Constraint& con = mesh.constraints()[k];
            for (std::size_t m = 0; m < con.resolved_masters.size(); ++m) {
                const int d = cs.vertex_dof[con.resolved_masters[m]];
                if (d < 0) {
                    throw PreconditionError("trace space: cell is not active for this component");
                }
                out.push_back({a, cs.offset + d, con.resolved_weights[m]});
            }
        }
    }
    return out;
}

std::vector<int> build_active_cells(const FractureNetwork& network, const ReconstructedGeometry& geometry, int comp)
{
    std::set<int> cells;
    for (const CellPatch& p : geometry.components[comp].patches) {
        cells.insert(p.cell);
    }
    for (std::size_t e = 0; e < network.junctions().size(); ++e) {
        const Junction& j = network.junctions()[e];
        if (std::find(j.members.begin(), j.members.end(), comp) == j.members.end()) {
            continue;
        }
        for (const CurveSegment& s : geometry.junctions[e].segments) {
            cells.insert(s.cell);
        }
    }
    if (cells.empty()) {
        throw ConfigurationError("trace space: component " + std::to_string(network.components()[comp].id) +
                                 " does not intersect the mesh");
    }
    return {cells.begin(), cells.end()};
}

Vec3 closest_point(const std::vector<CurveSegment>& segments, const Vec3& x)
{
    double best = std::numeric_limits<double>::infinity();
    Vec3 out = x;
    for (const CurveSegment& s : segments) {
        const Vec3 d = s.b - s.a;
        const double dd = d.squaredNorm();
        const double t = dd > 0.0 ? std::clamp((x - s.a).dot(d) / dd, 0.0, 1.0) : 0.0;
        const Vec3 p = s.a + t * d;
        const double dist = (p - x).squaredNorm();
        if (dist < best) {
            best = dist;
            out = p;
        }
    }
    return out;
}

Vec3 project_to_surface(const LevelSetField& level_set, const Vec3& x)
{
    Vec3 y = x;
    for (int it = 0; it < 8; ++it) {
        const double phi = level_set.value(y);
        Vec3 g;
        if (level_set.has_gradient()) {
            g = level_set.gradient(y);
        } else {
            const double eps = 1e-7 * std::max(1.0, y.norm());
            for (int a = 0; a < 3; ++a) {
                Vec3 e = Vec3::Zero();
                e[a] = eps;
                g[a] = (level_set.value(y + e) - level_set.value(y - e)) / (2.0 * eps);
            }
        }
        const double gg = g.squaredNorm();
        if (!(gg > 0.0)) {
            throw GeometryError("surface projection: vanishing level-set gradient");
        }
        const Vec3 step = phi / gg * g;
        y -= step;
        if (step.norm() <= 1e-15 * std::max(1.0, y.norm())) {
            break;
        }
    }
    return y;
}

std::vector<std::pair<int, double>> dirichlet_interpolation(const FractureNetwork& network, const OctreeMesh& mesh,
                                                            const ReconstructedGeometry& geometry, int comp,
                                                            DirichletTreatment treatment)
{
    const FractureComponent& fc = network.components()[comp];
    const ComponentGeometry& cg = geometry.components[comp];
    std::map<int, double> values;
    bool tagged = false;
    bool found = false;
    for (int f = 0; f < kBoxFaces; ++f) {
        if (fc.box_faces[f].kind != BoundaryKind::dirichlet) {
            continue;
        }
        tagged = true;
        const auto& segments = cg.box_curves[f].segments;
        if (segments.empty()) {
            continue;
        }
        found = true;
        if (!fc.box_faces[f].data) {
            throw ConfigurationError("trace space: Dirichlet face without pressure data on component " +
                                     std::to_string(fc.id));
        }
        if (treatment == DirichletTreatment::penalty) {
            continue;
        }
        const int axis = f / 2;
        const int side = f % 2;
        for (const CurveSegment& s : segments) {
            const auto& cv = mesh.cell_vertices(s.cell);
            for (int a = 0; a < 8; ++a) {
                if (((a >> axis) & 1) != side) {
                    continue;
                }
                std::vector<int> targets;
                const int k = mesh.constraint_index(cv[a]);
                if (k < 0) {
                    targets.push_back(cv[a]);
                } else {
                    targets = mesh.constraints()[k].resolved_masters;
                }
                for (int v : targets) {
                    if (values.count(v) == 0) {
                        const Vec3 x = treatment == DirichletTreatment::nodal_normal
                                           ? project_to_surface(fc.level_set, mesh.vertex(v))
                                           : closest_point(segments, mesh.vertex(v));
                        values[v] = fc.box_faces[f].data(x);
                    }
                }
            }
        }
    }
    if (tagged && !found) {
        bool internal = false;
        for (std::size_t k = 0; k < fc.trims.size(); ++k) {
            internal = internal || (fc.trims[k].kind == BoundaryKind::dirichlet && !cg.trim_curves[k].segments.empty());
        }
        if (!internal) {
            throw ConfigurationError("trace space: component " + std::to_string(fc.id) +
                                     " is tagged Dirichlet but has no Dirichlet boundary curve");
        }
    }
    return {values.begin(), values.end()};
}

ProductSpace build_product_space(const FractureNetwork& network, const OctreeMesh& mesh,
                                 const ReconstructedGeometry& geometry, DirichletTreatment treatment)
{
    ProductSpace space;
    int offset = 0;
    const std::size_t nv = mesh.num_vertices();
    for (int ci = 0; ci < static_cast<int>(network.size()); ++ci) {
        ComponentSpace cs;
        cs.component = ci;
        cs.active_cells = build_active_cells(network, geometry, ci);
        std::vector<char> used(nv, 0);
        for (int c : cs.active_cells) {
            for (int v : mesh.cell_vertices(c)) {
                const int k = mesh.constraint_index(v);
                if (k < 0) {
                    used[v] = 1;
                } else {
                    for (int m : mesh.constraints()[k].resolved_masters) {
                        used[m] = 1;
                    }
                }
            }
        }
        cs.vertex_dof.assign(nv, -1);
        for (std::size_t v = 0; v < nv; ++v) {
            if (used[v]) {
                cs.vertex_dof[v] = static_cast<int>(cs.dof_vertex.size());
                cs.dof_vertex.push_back(static_cast<int>(v));
            }
        }
        cs.offset = offset;
        offset += cs.num_dofs();
        space.components.push_back(std::move(cs));
    }

    space.essential.assign(offset, 0);
    space.essential_value.assign(offset, 0.0);
    std::vector<char> has_dirichlet(network.size(), 0);
    for (int ci = 0; ci < static_cast<int>(network.size()); ++ci) {
        const ComponentSpace& cs = space.components[ci];
        for (const auto& [v, value] : dirichlet_interpolation(network, mesh, geometry, ci, treatment)) {
            const int d = cs.vertex_dof[v];
            if (d < 0) {
                continue;
            }
            space.essential[cs.offset + d] = 1;
            space.essential_value[cs.offset + d] = value;
            has_dirichlet[ci] = 1;
        }
        const FractureComponent& fc = network.components()[ci];
        for (int f = 0; f < kBoxFaces; ++f) {
            if (fc.box_faces[f].kind == BoundaryKind::dirichlet &&
                !geometry.components[ci].box_curves[f].segments.empty()) {
                has_dirichlet[ci] = 1;
            }
        }
        for (std::size_t k = 0; k < fc.trims.size(); ++k) {
            if (fc.trims[k].kind == BoundaryKind::dirichlet &&
                !geometry.components[ci].trim_curves[k].segments.empty()) {
                has_dirichlet[ci] = 1;
            }
        }
    }

    const auto groups = network.connected_groups();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const bool anchored = std::any_of(groups[g].begin(), groups[g].end(), [&](int c) { return has_dirichlet[c]; });
        if (anchored) {
            continue;
        }
        const int d = space.components[groups[g].front()].offset;
        space.essential[d] = 1;
        space.essential_value[d] = 0.0;
        space.pinned.push_back(d);
        space.pinned_groups.push_back(static_cast<int>(g));
    }
    return space;
}

TraceValue evaluate(const Discretization& disc, const Eigen::VectorXd& x, int comp, int cell, const Vec3& point)
{
    std::array<std::array<double, 8>, kFields> corner{};
    for (const CornerDof& cd : disc.space.expand(disc.mesh, comp, cell)) {
        for (int f = 0; f < kFields; ++f) {
            corner[f][cd.corner] += cd.weight * x[ProductSpace::unknown(cd.dof, f)];
        }
    }
    const Box box = disc.mesh.cell_box(cell);
    TraceValue out;
    for (int f = 0; f < 3; ++f) {
        Vec3 g;
        out.u[f] = trilinear(box, corner[f], point, &g);
        out.grad_u.row(f) = g.transpose();
    }
    out.p = trilinear(box, corner[kPressure], point, &out.grad_p);
    return out;
}

}  // namespace tracefem
