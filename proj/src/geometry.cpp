#include "tracefem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace tracefem {

namespace {

constexpr int kTrimTag = 100;

Vec3 corner_position(const Box& box, int a)
{
    return {(a & 1) ? box.hi[0] : box.lo[0], ((a >> 1) & 1) ? box.hi[1] : box.lo[1],
            ((a >> 2) & 1) ? box.hi[2] : box.lo[2]};
}

// Cube edges as (low corner, high corner), indexed by axis*4 + slot.
struct CubeEdges {
    std::array<std::array<int, 2>, 12> ends{};
    std::array<std::array<int, 8>, 8> index{};

    CubeEdges()
    {
        for (auto& row : index) {
            row.fill(-1);
        }
        int e = 0;
        for (int axis = 0; axis < 3; ++axis) {
            for (int a = 0; a < 8; ++a) {
                if ((a >> axis) & 1) {
                    continue;
                }
                const int b = a | (1 << axis);
                ends[e] = {a, b};
                index[a][b] = e;
                index[b][a] = e;
                ++e;
            }
        }
    }
};

const CubeEdges& cube_edges()
{
    static const CubeEdges edges;
    return edges;
}

double fix_zero(double v, double shift) { return v == 0.0 ? shift : v; }

struct Link {
    int to = -1;
    int face = -1;
};

// Reverses orientation of a tagged triangle, keeping edge tags attached.
void flip(TaggedTriangle& t)
{
    std::swap(t.v[1], t.v[2]);
    t.edge_tag = {t.edge_tag[2], t.edge_tag[1], t.edge_tag[0]};
}

void orient(TaggedTriangle& t, const Box& box, const std::array<double, 8>& f)
{
    const Vec3 n = (t.v[1] - t.v[0]).cross(t.v[2] - t.v[0]);
    const double len = n.norm();
    t.area = 0.5 * len;
    if (len == 0.0) {
        return;
    }
    Vec3 g;
    const Vec3 centroid = (t.v[0] + t.v[1] + t.v[2]) / 3.0;
    (void)trilinear(box, f, centroid, &g);
    t.normal = n / len;
    if (t.normal.dot(g) < 0.0) {
        flip(t);
        t.normal = -t.normal;
    }
}

bool project_to_zero(const Box& box, const std::array<double, 8>& f, Vec3& x)
{
    const double h = box.extent().maxCoeff();
    for (int it = 0; it < 40; ++it) {
        Vec3 g;
        const double val = trilinear(box, f, x, &g);
        if (std::abs(val) <= 1e-15 * h) {
            break;
        }
        const double gg = g.squaredNorm();
        if (gg == 0.0) {
            return false;
        }
        x -= (val / gg) * g;
    }
    return std::abs(trilinear(box, f, x)) <= 1e-13 * h && box.contains(x, 1e-12 * h);
}

struct PolyVertex {
    Vec3 x;
    int tag = -1;  // tag of the edge starting here
    std::vector<double> g;
};

}  // namespace

double CurveSegmentSet::length() const
{
    double sum = 0.0;
    for (const CurveSegment& s : segments) {
        sum += s.length();
    }
    return sum;
}

double ComponentGeometry::area() const
{
    double sum = 0.0;
    for (const CellPatch& p : patches) {
        for (const Triangle& t : p.triangles) {
            sum += t.area;
        }
    }
    return sum;
}

std::size_t ComponentGeometry::num_triangles() const
{
    std::size_t n = 0;
    for (const CellPatch& p : patches) {
        n += p.triangles.size();
    }
    return n;
}

std::vector<double> interpolate_levelset(const ScalarField& field, const OctreeMesh& mesh, double shift)
{
    std::vector<double> values(mesh.num_vertices());
    for (std::size_t v = 0; v < values.size(); ++v) {
        if (mesh.is_hanging(static_cast<int>(v))) {
            continue;
        }
        const double val = field(mesh.vertex(static_cast<int>(v)));
        if (!std::isfinite(val)) {
            throw GeometryError("level set: non-finite value at a mesh vertex");
        }
        values[v] = val;
    }
    apply_constraints(mesh, values);
    for (double& v : values) {
        v = fix_zero(v, shift);
    }
    return values;
}

double trilinear(const Box& box, const std::array<double, 8>& f, const Vec3& x, Vec3* grad)
{
    const Vec3 ext = box.extent();
    const Vec3 t = ((x - box.lo).array() / ext.array()).matrix();
    const double lx[2] = {1.0 - t[0], t[0]};
    const double ly[2] = {1.0 - t[1], t[1]};
    const double lz[2] = {1.0 - t[2], t[2]};
    double value = 0.0;
    Vec3 g = Vec3::Zero();
    for (int a = 0; a < 8; ++a) {
        const int bx = a & 1;
        const int by = (a >> 1) & 1;
        const int bz = (a >> 2) & 1;
        value += f[a] * lx[bx] * ly[by] * lz[bz];
        if (grad != nullptr) {
            const double sx = bx ? 1.0 : -1.0;
            const double sy = by ? 1.0 : -1.0;
            const double sz = bz ? 1.0 : -1.0;
            g[0] += f[a] * sx / ext[0] * ly[by] * lz[bz];
            g[1] += f[a] * lx[bx] * sy / ext[1] * lz[bz];
            g[2] += f[a] * lx[bx] * ly[by] * sz / ext[2];
        }
    }
    if (grad != nullptr) {
        *grad = g;
    }
    return value;
}

std::vector<TaggedTriangle> reconstruct_cell(const Box& box, const std::array<double, 8>& f)
{
    const CubeEdges& edges = cube_edges();
    std::array<bool, 12> cut{};
    std::array<Vec3, 12> point;
    bool any = false;
    for (int e = 0; e < 12; ++e) {
        const auto [a, b] = edges.ends[e];
        if ((f[a] < 0.0) != (f[b] < 0.0)) {
            const Vec3 pa = corner_position(box, a);
            const Vec3 pb = corner_position(box, b);
            const double t = f[a] / (f[a] - f[b]);
            point[e] = pa + t * (pb - pa);
            cut[e] = true;
            any = true;
        }
    }
    if (!any) {
        return {};
    }

    std::array<std::array<Link, 2>, 12> links{};
    std::array<int, 12> nlinks{};
    auto connect = [&](int e0, int e1, int face) {
        links[e0][nlinks[e0]++] = {e1, face};
        links[e1][nlinks[e1]++] = {e0, face};
    };
    for (int axis = 0; axis < 3; ++axis) {
        const int u = axis == 0 ? 1 : 0;
        const int v = axis == 2 ? 1 : 2;
        for (int side = 0; side < 2; ++side) {
            const int face = 2 * axis + side;
            const int c00 = side << axis;
            const int c10 = c00 | (1 << u);
            const int c11 = c10 | (1 << v);
            const int c01 = c00 | (1 << v);
            const std::array<int, 4> fe = {edges.index[c00][c10], edges.index[c10][c11],
                                           edges.index[c11][c01], edges.index[c01][c00]};
            std::array<int, 4> hit{};
            int nhit = 0;
            for (int k = 0; k < 4; ++k) {
                if (cut[fe[k]]) {
                    hit[nhit++] = k;
                }
            }
            if (nhit == 2) {
                connect(fe[hit[0]], fe[hit[1]], face);
            } else if (nhit == 4) {
                const double num = f[c00] * f[c11] - f[c10] * f[c01];
                if (num >= 0.0) {
                    connect(fe[0], fe[1], face);
                    connect(fe[2], fe[3], face);
                } else {
                    connect(fe[3], fe[0], face);
                    connect(fe[1], fe[2], face);
                }
            }
        }
    }

    std::vector<TaggedTriangle> out;
    std::array<bool, 12> visited{};
    for (int start = 0; start < 12; ++start) {
        if (!cut[start] || visited[start]) {
            continue;
        }
        if (nlinks[start] != 2) {
            throw GeometryError("marching squares: open surface loop inside a cell");
        }
        std::vector<Vec3> loop;
        std::vector<int> tags;
        int cur = start;
        int prev_face = -1;
        do {
            visited[cur] = true;
            loop.push_back(point[cur]);
            const Link& next = links[cur][0].face != prev_face ? links[cur][0] : links[cur][1];
            tags.push_back(next.face);
            prev_face = next.face;
            cur = next.to;
        } while (cur != start && loop.size() <= 12);
        if (cur != start) {
            throw GeometryError("marching squares: surface loop does not close");
        }

        const std::size_t m = loop.size();
        if (m == 3) {
            TaggedTriangle t;
            t.v = {loop[0], loop[1], loop[2]};
            t.edge_tag = {tags[0], tags[1], tags[2]};
            out.push_back(t);
            continue;
        }
        Vec3 center = Vec3::Zero();
        for (const Vec3& p : loop) {
            center += p;
        }
        center /= static_cast<double>(m);
        if (project_to_zero(box, f, center)) {
            for (std::size_t i = 0; i < m; ++i) {
                TaggedTriangle t;
                t.v = {center, loop[i], loop[(i + 1) % m]};
                t.edge_tag = {-1, tags[i], -1};
                out.push_back(t);
            }
        } else {
            for (std::size_t i = 1; i + 1 < m; ++i) {
                TaggedTriangle t;
                t.v = {loop[0], loop[i], loop[i + 1]};
                t.edge_tag = {i == 1 ? tags[0] : -1, tags[i], i + 1 == m - 1 ? tags[m - 1] : -1};
                out.push_back(t);
            }
        }
    }
    for (TaggedTriangle& t : out) {
        orient(t, box, f);
    }
    std::erase_if(out, [](const TaggedTriangle& t) { return t.area == 0.0; });
    return out;
}

std::vector<Triangle> reconstruct_surface(const Box& box, const std::array<double, 8>& f)
{
    if (std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; })) {
        throw GeometryError("marching squares: all corner values are zero");
    }
    std::array<double, 8> g = f;
    const double shift = 1e-14 * box.extent().maxCoeff();
    for (double& v : g) {
        v = fix_zero(v, shift);
    }
    std::vector<Triangle> out;
    for (const TaggedTriangle& t : reconstruct_cell(box, g)) {
        out.push_back(Triangle{t.v, t.normal, t.area});
    }
    return out;
}

namespace {

std::array<double, 8> corner_values(const OctreeMesh& mesh, const std::vector<double>& nodal, int c)
{
    std::array<double, 8> f{};
    const auto& cv = mesh.cell_vertices(c);
    for (int a = 0; a < 8; ++a) {
        f[a] = nodal[cv[a]];
    }
    return f;
}

// Bit k set when cube face k of cell c lies on the domain boundary.
int boundary_faces(const OctreeMesh& mesh, int c)
{
    const Leaf& l = mesh.leaf(c);
    const std::int64_t s = std::int64_t{1} << (OctreeMesh::kMaxLevel - l.level);
    int mask = 0;
    for (int axis = 0; axis < 3; ++axis) {
        if (l.anchor[axis] == 0) {
            mask |= 1 << (2 * axis);
        }
        if (l.anchor[axis] + s == mesh.lattice_extent(axis)) {
            mask |= 1 << (2 * axis + 1);
        }
    }
    return mask;
}

std::vector<PolyVertex> clip(const std::vector<PolyVertex>& poly, int k, double shift)
{
    std::vector<PolyVertex> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const PolyVertex& a = poly[i];
        const PolyVertex& b = poly[(i + 1) % n];
        const bool in_a = a.g[k] < 0.0;
        const bool in_b = b.g[k] < 0.0;
        auto cross = [&]() {
            const double t = a.g[k] / (a.g[k] - b.g[k]);
            PolyVertex p;
            p.x = a.x + t * (b.x - a.x);
            p.g.resize(a.g.size());
            for (std::size_t j = 0; j < a.g.size(); ++j) {
                p.g[j] = fix_zero(a.g[j] + t * (b.g[j] - a.g[j]), shift);
            }
            p.g[k] = -shift;  // on the clip line, counted as kept
            return p;
        };
        if (in_a && in_b) {
            out.push_back(a);
        } else if (in_a) {
            out.push_back(a);
            PolyVertex p = cross();
            p.tag = kTrimTag + k;
            out.push_back(std::move(p));
        } else if (in_b) {
            PolyVertex p = cross();
            p.tag = a.tag;
            out.push_back(std::move(p));
        }
    }
    return out;
}

CurveSegment make_segment(const Vec3& a, const Vec3& b, int cell, const Vec3& normal, const Vec3& centroid)
{
    CurveSegment s;
    s.a = a;
    s.b = b;
    s.cell = cell;
    s.normal = normal;
    Vec3 m = (b - a).cross(normal);
    const double len = m.norm();
    if (len > 0.0) {
        m /= len;
        if (m.dot(0.5 * (a + b) - centroid) < 0.0) {
            m = -m;
        }
    }
    s.conormal = m;
    return s;
}

}  // namespace

ReconstructedGeometry reconstruct(const FractureNetwork& network, const OctreeMesh& mesh)
{
    network.validate();
    ReconstructedGeometry geo;
    geo.zero_shift = 1e-14 * mesh.min_cell_size();
    const double shift = geo.zero_shift;
    const int ncells = static_cast<int>(mesh.num_cells());

    for (int ci = 0; ci < static_cast<int>(network.size()); ++ci) {
        const FractureComponent& comp = network.components()[ci];
        ComponentGeometry cg;
        cg.phi = interpolate_levelset(comp.level_set.value, mesh, shift);
        const std::size_t ntrim = comp.trims.size();
        for (const TrimConstraint& t : comp.trims) {
            cg.trim_values.push_back(interpolate_levelset(t.function, mesh, shift));
        }
        cg.trim_curves.resize(ntrim);
        for (std::size_t k = 0; k < ntrim; ++k) {
            cg.trim_curves[k].kind = comp.trims[k].kind;
            cg.trim_curves[k].owners = {ci};
        }
        for (int f = 0; f < kBoxFaces; ++f) {
            cg.box_curves[f].kind = comp.box_faces[f].kind;
            cg.box_curves[f].owners = {ci};
        }

        for (int c = 0; c < ncells; ++c) {
            const std::array<double, 8> f = corner_values(mesh, cg.phi, c);
            const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
            if (!(*lo < 0.0 && *hi > 0.0)) {
                continue;
            }
            const Box box = mesh.cell_box(c);
            const std::vector<TaggedTriangle> tris = reconstruct_cell(box, f);
            if (tris.empty()) {
                continue;
            }
            const int bmask = boundary_faces(mesh, c);
            std::vector<std::array<double, 8>> gcorner(ntrim);
            for (std::size_t k = 0; k < ntrim; ++k) {
                gcorner[k] = corner_values(mesh, cg.trim_values[k], c);
            }

            CellPatch patch;
            patch.cell = c;
            for (const TaggedTriangle& t : tris) {
                std::vector<PolyVertex> poly(3);
                for (int i = 0; i < 3; ++i) {
                    poly[i].x = t.v[i];
                    const int tag = t.edge_tag[i];
                    poly[i].tag = (tag >= 0 && ((bmask >> tag) & 1)) ? tag : -1;
                    poly[i].g.resize(ntrim);
                    for (std::size_t k = 0; k < ntrim; ++k) {
                        poly[i].g[k] = fix_zero(trilinear(box, gcorner[k], t.v[i]), shift);
                    }
                }
                for (std::size_t k = 0; k < ntrim && poly.size() >= 3; ++k) {
                    poly = clip(poly, static_cast<int>(k), shift);
                }
                if (poly.size() < 3) {
                    continue;
                }
                Vec3 centroid = Vec3::Zero();
                for (const PolyVertex& p : poly) {
                    centroid += p.x;
                }
                centroid /= static_cast<double>(poly.size());
                for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
                    Triangle tri;
                    tri.v = {poly[0].x, poly[i].x, poly[i + 1].x};
                    tri.normal = t.normal;
                    tri.area = 0.5 * (tri.v[1] - tri.v[0]).cross(tri.v[2] - tri.v[0]).norm();
                    if (tri.area > 0.0) {
                        patch.triangles.push_back(tri);
                    }
                }
                const std::size_t n = poly.size();
                for (std::size_t i = 0; i < n; ++i) {
                    const int tag = poly[i].tag;
                    if (tag < 0) {
                        continue;
                    }
                    const CurveSegment seg = make_segment(poly[i].x, poly[(i + 1) % n].x, c, t.normal, centroid);
                    if (seg.length() == 0.0) {
                        continue;
                    }
                    if (tag >= kTrimTag) {
                        cg.trim_curves[tag - kTrimTag].segments.push_back(seg);
                    } else {
                        cg.box_curves[tag].segments.push_back(seg);
                    }
                }
            }
            if (!patch.triangles.empty()) {
                cg.patches.push_back(std::move(patch));
            }
        }
        geo.components.push_back(std::move(cg));
    }

    for (const Junction& j : network.junctions()) {
        CurveSegmentSet set = geo.components[j.host].trim_curves[j.host_trim];
        set.kind = BoundaryKind::junction;
        set.owners = j.members;
        geo.junctions.push_back(std::move(set));
    }
    return geo;
}

CurveSegmentSet cut_patches(const std::vector<CellPatch>& patches, const OctreeMesh& mesh,
                            const std::vector<double>& nodal)
{
    CurveSegmentSet out;
    const double shift = 1e-14 * mesh.min_cell_size();
    for (const CellPatch& p : patches) {
        const Box box = mesh.cell_box(p.cell);
        const std::array<double, 8> f = corner_values(mesh, nodal, p.cell);
        for (const Triangle& t : p.triangles) {
            std::array<double, 3> g{};
            for (int i = 0; i < 3; ++i) {
                g[i] = fix_zero(trilinear(box, f, t.v[i]), shift);
            }
            std::vector<Vec3> hits;
            for (int i = 0; i < 3; ++i) {
                const int j = (i + 1) % 3;
                if ((g[i] < 0.0) != (g[j] < 0.0)) {
                    const double s = g[i] / (g[i] - g[j]);
                    hits.push_back(t.v[i] + s * (t.v[j] - t.v[i]));
                }
            }
            if (hits.size() == 2) {
                CurveSegment seg;
                seg.a = hits[0];
                seg.b = hits[1];
                seg.cell = p.cell;
                seg.normal = t.normal;
                out.segments.push_back(seg);
            }
        }
    }
    return out;
}

Vec3 extended_normal(const FractureComponent& component, const OctreeMesh& mesh,
                     const std::vector<double>& phi, int cell, const Vec3& x)
{
    Vec3 g;
    if (component.level_set.has_gradient()) {
        g = component.level_set.gradient(x);
    } else {
        (void)trilinear(mesh.cell_box(cell), corner_values(mesh, phi, cell), x, &g);
    }
    const double len = g.norm();
    if (!(len >= 1e-12)) {
        throw GeometryError("extended normal: level-set gradient vanishes");
    }
    return g / len;
}

void write_geometry_vtk(std::ostream& out, const ReconstructedGeometry& geometry)
{
    struct Line {
        Vec3 a, b;
        int component;
        int kind;
    };
    std::vector<Line> lines;
    std::vector<std::pair<const Triangle*, int>> tris;
    for (std::size_t i = 0; i < geometry.components.size(); ++i) {
        const ComponentGeometry& cg = geometry.components[i];
        for (const CellPatch& p : cg.patches) {
            for (const Triangle& t : p.triangles) {
                tris.emplace_back(&t, static_cast<int>(i));
            }
        }
        auto add = [&](const CurveSegmentSet& set) {
            if (set.kind == BoundaryKind::junction) {
                return;
            }
            for (const CurveSegment& s : set.segments) {
                lines.push_back({s.a, s.b, static_cast<int>(i), set.kind == BoundaryKind::dirichlet ? 2 : 3});
            }
        };
        for (const auto& set : cg.trim_curves) {
            add(set);
        }
        for (const auto& set : cg.box_curves) {
            add(set);
        }
    }
    for (const CurveSegmentSet& set : geometry.junctions) {
        for (const CurveSegment& s : set.segments) {
            lines.push_back({s.a, s.b, set.owners.empty() ? -1 : set.owners.front(), 1});
        }
    }

    const std::size_t npts = 3 * tris.size() + 2 * lines.size();
    out << "# vtk DataFile Version 3.0\nfracture network geometry\nASCII\nDATASET POLYDATA\n";
    out << "POINTS " << npts << " double\n";
    out.precision(17);
    for (const auto& [t, comp] : tris) {
        for (const Vec3& p : t->v) {
            out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
        }
    }
    for (const Line& l : lines) {
        out << l.a[0] << ' ' << l.a[1] << ' ' << l.a[2] << '\n' << l.b[0] << ' ' << l.b[1] << ' ' << l.b[2] << '\n';
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
    // Cell data follows the legacy ordering: lines before polygons.
    out << "CELL_DATA " << lines.size() + tris.size() << '\n';
    out << "SCALARS component int 1\nLOOKUP_TABLE default\n";
    for (const Line& l : lines) {
        out << l.component + 1 << '\n';
    }
    for (const auto& [t, comp] : tris) {
        out << comp + 1 << '\n';
    }
    out << "SCALARS kind int 1\nLOOKUP_TABLE default\n";
    for (const Line& l : lines) {
        out << l.kind << '\n';
    }
    for (std::size_t i = 0; i < tris.size(); ++i) {
        out << "0\n";
    }
}

}  // namespace tracefem
