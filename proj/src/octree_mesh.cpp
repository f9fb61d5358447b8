#include "tracefem/octree_mesh.hpp"

#include "tracefem/fracture_network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

namespace tracefem {

namespace {

constexpr int kLevels = OctreeMesh::kMaxLevel;

std::uint64_t leaf_key(int level, std::int64_t i, std::int64_t j, std::int64_t k)
{
    return (static_cast<std::uint64_t>(level) << 60) | (static_cast<std::uint64_t>(i) << 40) |
           (static_cast<std::uint64_t>(j) << 20) | static_cast<std::uint64_t>(k);
}

std::uint64_t leaf_key(const Leaf& leaf)
{
    const int shift = kLevels - leaf.level;
    return leaf_key(leaf.level, leaf.anchor[0] >> shift, leaf.anchor[1] >> shift,
                    leaf.anchor[2] >> shift);
}

std::uint64_t vertex_key(const Lattice& p)
{
    return static_cast<std::uint64_t>(p[0]) | (static_cast<std::uint64_t>(p[1]) << 21) |
           (static_cast<std::uint64_t>(p[2]) << 42);
}

std::int64_t leaf_span(int level) { return std::int64_t{1} << (kLevels - level); }

bool anchor_less(const Leaf& a, const Leaf& b)
{
    return std::tie(a.anchor[2], a.anchor[1], a.anchor[0]) <
           std::tie(b.anchor[2], b.anchor[1], b.anchor[0]);
}

// Face and edge neighbour directions (6 + 12).
const std::vector<std::array<int, 3>>& balance_directions()
{
    static const std::vector<std::array<int, 3>> dirs = [] {
        std::vector<std::array<int, 3>> out;
        for (int dz = -1; dz <= 1; ++dz) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nnz = (dx != 0) + (dy != 0) + (dz != 0);
                    if (nnz == 1 || nnz == 2) {
                        out.push_back({dx, dy, dz});
                    }
                }
            }
        }
        return out;
    }();
    return dirs;
}

// Working set of leaves used while refining and balancing.
class LeafSet {
public:
    LeafSet(std::array<int, 3> root, const std::vector<Leaf>& leaves) : root_(root)
    {
        for (const Leaf& l : leaves) {
            keys_.emplace(leaf_key(l), l);
        }
    }

    [[nodiscard]] bool contains(const Leaf& l) const { return keys_.count(leaf_key(l)) != 0; }

    [[nodiscard]] const Leaf* covering(const Lattice& cell) const
    {
        for (int level = 0; level <= kLevels; ++level) {
            const int shift = kLevels - level;
            auto it = keys_.find(leaf_key(level, cell[0] >> shift, cell[1] >> shift, cell[2] >> shift));
            if (it != keys_.end()) {
                return &it->second;
            }
        }
        return nullptr;
    }

    [[nodiscard]] bool inside(const Lattice& cell) const
    {
        for (int a = 0; a < 3; ++a) {
            if (cell[a] < 0 || cell[a] >= (static_cast<std::int64_t>(root_[a]) << kLevels)) {
                return false;
            }
        }
        return true;
    }

    std::array<Leaf, 8> split(const Leaf& l)
    {
        keys_.erase(leaf_key(l));
        std::array<Leaf, 8> children{};
        const std::int64_t half = leaf_span(l.level + 1);
        for (int a = 0; a < 8; ++a) {
            Leaf c;
            c.level = l.level + 1;
            c.anchor = {l.anchor[0] + (a & 1) * half, l.anchor[1] + ((a >> 1) & 1) * half,
                        l.anchor[2] + ((a >> 2) & 1) * half};
            keys_.emplace(leaf_key(c), c);
            children[a] = c;
        }
        return children;
    }

    // Neighbour cell (finest lattice) adjacent to `l` in direction d.
    [[nodiscard]] static Lattice adjacent(const Leaf& l, const std::array<int, 3>& d)
    {
        const std::int64_t s = leaf_span(l.level);
        Lattice cell{};
        for (int a = 0; a < 3; ++a) {
            cell[a] = d[a] < 0 ? l.anchor[a] - 1 : (d[a] > 0 ? l.anchor[a] + s : l.anchor[a]);
        }
        return cell;
    }

    void balance()
    {
        std::vector<Leaf> work;
        work.reserve(keys_.size());
        for (const auto& kv : keys_) {
            work.push_back(kv.second);
        }
        std::sort(work.begin(), work.end(), anchor_less);
        while (!work.empty()) {
            const Leaf l = work.back();
            work.pop_back();
            if (!contains(l)) {
                continue;
            }
            for (const auto& d : balance_directions()) {
                const Lattice cell = adjacent(l, d);
                if (!inside(cell)) {
                    continue;
                }
                const Leaf* n = covering(cell);
                if (n != nullptr && n->level < l.level - 1) {
                    const Leaf coarse = *n;
                    for (const Leaf& c : split(coarse)) {
                        work.push_back(c);
                    }
                    work.push_back(l);
                    break;
                }
            }
        }
    }

    [[nodiscard]] std::vector<Leaf> leaves() const
    {
        std::vector<Leaf> out;
        out.reserve(keys_.size());
        for (const auto& kv : keys_) {
            out.push_back(kv.second);
        }
        std::sort(out.begin(), out.end(), anchor_less);
        return out;
    }

private:
    std::array<int, 3> root_;
    std::unordered_map<std::uint64_t, Leaf> keys_;
};

}  // namespace

OctreeMesh OctreeMesh::uniform(const Box& box, int n) { return uniform(box, {n, n, n}); }

OctreeMesh OctreeMesh::uniform(const Box& box, std::array<int, 3> n)
{
    for (int a = 0; a < 3; ++a) {
        if (n[a] < 1) {
            throw PreconditionError("octree: root cell count must be >= 1");
        }
        if ((static_cast<std::int64_t>(n[a]) << kLevels) >= (std::int64_t{1} << 20)) {
            throw PreconditionError("octree: root lattice too large for the key encoding");
        }
    }
    const Vec3 ext = box.extent();
    if ((ext.array() <= 0.0).any()) {
        throw PreconditionError("octree: empty domain box");
    }
    const double h = ext[0] / n[0];
    for (int a = 1; a < 3; ++a) {
        if (std::abs(ext[a] / n[a] - h) > 1e-12 * h) {
            throw PreconditionError("octree: root cells are not cubic for the given box");
        }
    }
    std::vector<Leaf> leaves;
    leaves.reserve(static_cast<std::size_t>(n[0]) * n[1] * n[2]);
    const std::int64_t s = leaf_span(0);
    for (int k = 0; k < n[2]; ++k) {
        for (int j = 0; j < n[1]; ++j) {
            for (int i = 0; i < n[0]; ++i) {
                leaves.push_back(Leaf{0, {i * s, j * s, k * s}});
            }
        }
    }
    return from_leaves(box, n, h, std::move(leaves));
}

OctreeMesh OctreeMesh::from_leaves(const Box& box, std::array<int, 3> root, double root_size,
                                   std::vector<Leaf> leaves)
{
    OctreeMesh m;
    m.box_ = box;
    m.root_ = root;
    m.root_size_ = root_size;
    m.leaves_ = std::move(leaves);
    m.build_topology();
    return m;
}

OctreeMesh OctreeMesh::refined(const std::function<bool(const OctreeMesh&, int)>& pred) const
{
    LeafSet set(root_, leaves_);
    bool any = false;
    for (int c = 0; c < static_cast<int>(leaves_.size()); ++c) {
        if (leaves_[c].level < kLevels && pred(*this, c)) {
            set.split(leaves_[c]);
            any = true;
        }
    }
    if (!any) {
        return *this;
    }
    set.balance();
    return from_leaves(box_, root_, root_size_, set.leaves());
}

OctreeMesh OctreeMesh::balanced() const
{
    LeafSet set(root_, leaves_);
    set.balance();
    std::vector<Leaf> out = set.leaves();
    if (out.size() == leaves_.size()) {
        return *this;
    }
    return from_leaves(box_, root_, root_size_, std::move(out));
}

Vec3 OctreeMesh::position(const Lattice& p) const
{
    Vec3 x;
    for (int a = 0; a < 3; ++a) {
        const std::int64_t ext = lattice_extent(a);
        if (p[a] == 0) {
            x[a] = box_.lo[a];
        } else if (p[a] == ext) {
            x[a] = box_.hi[a];
        } else {
            x[a] = box_.lo[a] +
                   (box_.hi[a] - box_.lo[a]) * (static_cast<double>(p[a]) / static_cast<double>(ext));
        }
    }
    return x;
}

double OctreeMesh::cell_size(int c) const { return std::ldexp(root_size_, -leaves_[c].level); }

Box OctreeMesh::cell_box(int c) const
{
    const Leaf& l = leaves_[c];
    const std::int64_t s = leaf_span(l.level);
    return Box{position(l.anchor), position({l.anchor[0] + s, l.anchor[1] + s, l.anchor[2] + s})};
}

int OctreeMesh::find_vertex(const Lattice& p) const
{
    for (int a = 0; a < 3; ++a) {
        if (p[a] < 0 || p[a] > lattice_extent(a)) {
            return -1;
        }
    }
    auto it = vertex_index_.find(vertex_key(p));
    return it == vertex_index_.end() ? -1 : it->second;
}

int OctreeMesh::find_leaf_covering(const Lattice& cell) const
{
    for (int level = 0; level <= kLevels; ++level) {
        const int shift = kLevels - level;
        auto it = leaf_index_.find(leaf_key(level, cell[0] >> shift, cell[1] >> shift, cell[2] >> shift));
        if (it != leaf_index_.end()) {
            return it->second;
        }
    }
    return -1;
}

int OctreeMesh::locate(const Vec3& x) const
{
    const double tol = 1e-12 * root_size_;
    if (!box_.contains(x, tol)) {
        return -1;
    }
    Lattice cell{};
    for (int a = 0; a < 3; ++a) {
        const std::int64_t ext = lattice_extent(a);
        const double t = (x[a] - box_.lo[a]) / (box_.hi[a] - box_.lo[a]) * static_cast<double>(ext);
        cell[a] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(t)), 0, ext - 1);
    }
    return find_leaf_covering(cell);
}

bool OctreeMesh::is_balanced() const
{
    LeafSet set(root_, leaves_);
    for (const Leaf& l : leaves_) {
        for (const auto& d : balance_directions()) {
            const Lattice cell = LeafSet::adjacent(l, d);
            if (!set.inside(cell)) {
                continue;
            }
            const Leaf* n = set.covering(cell);
            if (n != nullptr && n->level < l.level - 1) {
                return false;
            }
        }
    }
    return true;
}

double OctreeMesh::min_cell_size() const { return std::ldexp(root_size_, -max_level()); }

double OctreeMesh::max_cell_size() const
{
    int lo = kLevels;
    for (const Leaf& l : leaves_) {
        lo = std::min(lo, l.level);
    }
    return std::ldexp(root_size_, -lo);
}

int OctreeMesh::max_level() const
{
    int hi = 0;
    for (const Leaf& l : leaves_) {
        hi = std::max(hi, l.level);
    }
    return hi;
}

void OctreeMesh::build_topology()
{
    leaf_index_.clear();
    leaf_index_.reserve(leaves_.size());
    for (int c = 0; c < static_cast<int>(leaves_.size()); ++c) {
        leaf_index_.emplace(leaf_key(leaves_[c]), c);
    }

    std::vector<Lattice> corners;
    corners.reserve(leaves_.size() * 8);
    for (const Leaf& l : leaves_) {
        const std::int64_t s = leaf_span(l.level);
        for (int a = 0; a < 8; ++a) {
            corners.push_back({l.anchor[0] + (a & 1) * s, l.anchor[1] + ((a >> 1) & 1) * s,
                               l.anchor[2] + ((a >> 2) & 1) * s});
        }
    }
    std::sort(corners.begin(), corners.end(), [](const Lattice& a, const Lattice& b) {
        return std::tie(a[2], a[1], a[0]) < std::tie(b[2], b[1], b[0]);
    });
    corners.erase(std::unique(corners.begin(), corners.end()), corners.end());
    vertex_lattice_ = std::move(corners);
    vertex_index_.clear();
    vertex_index_.reserve(vertex_lattice_.size());
    for (int v = 0; v < static_cast<int>(vertex_lattice_.size()); ++v) {
        vertex_index_.emplace(vertex_key(vertex_lattice_[v]), v);
    }

    cell_vertices_.resize(leaves_.size());
    for (std::size_t c = 0; c < leaves_.size(); ++c) {
        const Leaf& l = leaves_[c];
        const std::int64_t s = leaf_span(l.level);
        for (int a = 0; a < 8; ++a) {
            cell_vertices_[c][a] = vertex_index_.at(vertex_key(
                {l.anchor[0] + (a & 1) * s, l.anchor[1] + ((a >> 1) & 1) * s, l.anchor[2] + ((a >> 2) & 1) * s}));
        }
    }

    // Hanging vertices: existing vertices at edge midpoints or face centres
    // of a leaf.
    std::map<int, Constraint> found;
    for (std::size_t c = 0; c < leaves_.size(); ++c) {
        const Leaf& l = leaves_[c];
        if (l.level == kLevels) {
            continue;
        }
        const std::int64_t s = leaf_span(l.level);
        const std::int64_t h = s / 2;
        const auto& cv = cell_vertices_[c];
        for (int axis = 0; axis < 3; ++axis) {
            const int b = (axis + 1) % 3;
            const int d = (axis + 2) % 3;
            // edges along `axis`
            for (int ob = 0; ob < 2; ++ob) {
                for (int od = 0; od < 2; ++od) {
                    Lattice p = l.anchor;
                    p[axis] += h;
                    p[b] += ob * s;
                    p[d] += od * s;
                    const int v = find_vertex(p);
                    if (v < 0 || found.count(v) != 0) {
                        continue;
                    }
                    int c0 = (ob << b) | (od << d);
                    int c1 = c0 | (1 << axis);
                    Constraint con;
                    con.vertex = v;
                    con.masters = {cv[c0], cv[c1]};
                    con.weights = {0.5, 0.5};
                    found.emplace(v, std::move(con));
                }
            }
            // faces normal to `axis`
            for (int side = 0; side < 2; ++side) {
                Lattice p = l.anchor;
                p[axis] += side * s;
                p[b] += h;
                p[d] += h;
                const int v = find_vertex(p);
                if (v < 0 || found.count(v) != 0) {
                    continue;
                }
                Constraint con;
                con.vertex = v;
                for (int ob = 0; ob < 2; ++ob) {
                    for (int od = 0; od < 2; ++od) {
                        con.masters.push_back(cv[(side << axis) | (ob << b) | (od << d)]);
                        con.weights.push_back(0.25);
                    }
                }
                found.emplace(v, std::move(con));
            }
        }
    }

    constraints_.clear();
    constraint_of_vertex_.assign(vertex_lattice_.size(), -1);
    for (auto& [v, con] : found) {
        constraint_of_vertex_[v] = static_cast<int>(constraints_.size());
        constraints_.push_back(std::move(con));
    }

    // Resolve chains down to free masters.
    std::vector<int> state(constraints_.size(), 0);
    std::function<void(int)> resolve = [&](int k) {
        if (state[k] == 2) {
            return;
        }
        if (state[k] == 1) {
            throw GeometryError("octree: cyclic hanging-vertex constraints");
        }
        state[k] = 1;
        std::map<int, double> acc;
        Constraint& con = constraints_[k];
        for (std::size_t m = 0; m < con.masters.size(); ++m) {
            const int mk = constraint_of_vertex_[con.masters[m]];
            if (mk < 0) {
                acc[con.masters[m]] += con.weights[m];
            } else {
                resolve(mk);
                const Constraint& sub = constraints_[mk];
                for (std::size_t r = 0; r < sub.resolved_masters.size(); ++r) {
                    acc[sub.resolved_masters[r]] += con.weights[m] * sub.resolved_weights[r];
                }
            }
        }
        con.resolved_masters.clear();
        con.resolved_weights.clear();
        for (const auto& [mv, w] : acc) {
            con.resolved_masters.push_back(mv);
            con.resolved_weights.push_back(w);
        }
        state[k] = 2;
    };
    for (int k = 0; k < static_cast<int>(constraints_.size()); ++k) {
        resolve(k);
    }
}

double interpolate(const OctreeMesh& mesh, const std::vector<double>& nodal, int c, const Vec3& x)
{
    const Box b = mesh.cell_box(c);
    const Vec3 t = ((x - b.lo).array() / (b.hi - b.lo).array()).matrix();
    const auto& cv = mesh.cell_vertices(c);
    double value = 0.0;
    for (int a = 0; a < 8; ++a) {
        const double wx = (a & 1) ? t[0] : 1.0 - t[0];
        const double wy = ((a >> 1) & 1) ? t[1] : 1.0 - t[1];
        const double wz = ((a >> 2) & 1) ? t[2] : 1.0 - t[2];
        value += wx * wy * wz * nodal[cv[a]];
    }
    return value;
}

void apply_constraints(const OctreeMesh& mesh, std::vector<double>& nodal)
{
    for (const Constraint& con : mesh.constraints()) {
        double value = 0.0;
        for (std::size_t m = 0; m < con.resolved_masters.size(); ++m) {
            value += con.resolved_weights[m] * nodal[con.resolved_masters[m]];
        }
        nodal[con.vertex] = value;
    }
}

OctreeMesh refine_near_surface(const OctreeMesh& mesh, const FractureNetwork& network, int levels,
                               double band)
{
    if (levels < 0) {
        throw PreconditionError("refine_near_surface: levels must be >= 0");
    }
    auto near = [&](const OctreeMesh& m, int c) {
        const Box b = m.cell_box(c);
        const double pad = band * m.cell_size(c);
        const Vec3 lo = b.lo.array() - pad;
        const Vec3 hi = b.hi.array() + pad;
        for (const FractureComponent& comp : network.components()) {
            bool neg = false;
            bool pos = false;
            for (int k = 0; k < 3 && !(neg && pos); ++k) {
                for (int j = 0; j < 3 && !(neg && pos); ++j) {
                    for (int i = 0; i < 3; ++i) {
                        const Vec3 x(lo[0] + 0.5 * i * (hi[0] - lo[0]), lo[1] + 0.5 * j * (hi[1] - lo[1]),
                                     lo[2] + 0.5 * k * (hi[2] - lo[2]));
                        const double phi = comp.level_set.value(x);
                        neg = neg || phi <= 0.0;
                        pos = pos || phi >= 0.0;
                    }
                }
            }
            if (neg && pos) {
                return true;
            }
        }
        return false;
    };
    OctreeMesh out = mesh;
    for (int r = 0; r < levels; ++r) {
        out = out.refined(near);
    }
    return out;
}

}  // namespace tracefem
