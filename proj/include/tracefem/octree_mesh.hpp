#pragma once

// Cartesian octree background mesh with cubic cells.
//
// The domain box is tiled by a root lattice of nx*ny*nz equal cubes; each root
// cube is the root of an octree. All positions are stored as integer
// coordinates on the finest admissible lattice (root cube edge = 2^kMaxLevel
// lattice units), which makes vertex identification exact.

#include "tracefem/common.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

namespace tracefem {

class FractureNetwork;

using Lattice = std::array<std::int64_t, 3>;

struct Leaf {
    int level = 0;
    Lattice anchor{};  // lowest corner, finest-lattice units
};

/// Hanging vertex v = sum_k weight[k] * value(master[k]).
struct Constraint {
    int vertex = -1;
    std::vector<int> masters;  // direct masters (may themselves be hanging)
    std::vector<double> weights;
    std::vector<int> resolved_masters;  // after recursive resolution
    std::vector<double> resolved_weights;
};

class OctreeMesh {
public:
    static constexpr int kMaxLevel = 10;

    /// n^3 root cells over `box`; the box must be a cube.
    static OctreeMesh uniform(const Box& box, int n);
    /// Root lattice with the given cell counts; cells must be cubic.
    static OctreeMesh uniform(const Box& box, std::array<int, 3> n);

    /// New mesh in which every leaf satisfying `pred` (and not at kMaxLevel) is
    /// split once, followed by 2:1 face/edge balancing.
    [[nodiscard]] OctreeMesh refined(const std::function<bool(const OctreeMesh&, int)>& pred) const;

    /// New mesh with 2:1 face+edge balance restored (no-op when balanced).
    [[nodiscard]] OctreeMesh balanced() const;

    [[nodiscard]] const Box& box() const { return box_; }
    [[nodiscard]] std::array<int, 3> root_cells() const { return root_; }
    [[nodiscard]] double root_size() const { return root_size_; }

    [[nodiscard]] std::size_t num_cells() const { return leaves_.size(); }
    [[nodiscard]] std::size_t num_vertices() const { return vertex_lattice_.size(); }

    [[nodiscard]] const Leaf& leaf(int c) const { return leaves_[c]; }
    [[nodiscard]] const std::vector<Leaf>& leaves() const { return leaves_; }
    [[nodiscard]] double cell_size(int c) const;
    [[nodiscard]] Box cell_box(int c) const;
    [[nodiscard]] const std::array<int, 8>& cell_vertices(int c) const { return cell_vertices_[c]; }

    [[nodiscard]] Vec3 vertex(int v) const { return position(vertex_lattice_[v]); }
    [[nodiscard]] const Lattice& vertex_lattice(int v) const { return vertex_lattice_[v]; }
    /// Vertex id at a lattice point, or -1.
    [[nodiscard]] int find_vertex(const Lattice& p) const;

    [[nodiscard]] const std::vector<Constraint>& constraints() const { return constraints_; }
    /// Index into constraints() or -1 for a free vertex.
    [[nodiscard]] int constraint_index(int v) const { return constraint_of_vertex_[v]; }
    [[nodiscard]] bool is_hanging(int v) const { return constraint_of_vertex_[v] >= 0; }

    /// Leaf containing the point (ties resolved towards the upper cell), or -1
    /// when outside the box.
    [[nodiscard]] int locate(const Vec3& x) const;

    [[nodiscard]] bool is_balanced() const;
    [[nodiscard]] double min_cell_size() const;
    [[nodiscard]] double max_cell_size() const;
    [[nodiscard]] int max_level() const;

    [[nodiscard]] Vec3 position(const Lattice& p) const;
    [[nodiscard]] std::int64_t lattice_extent(int axis) const
    {
        return static_cast<std::int64_t>(root_[axis]) << kMaxLevel;
    }

private:
    OctreeMesh() = default;
    static OctreeMesh from_leaves(const Box& box, std::array<int, 3> root, double root_size,
                                  std::vector<Leaf> leaves);
    void build_topology();

    [[nodiscard]] int find_leaf_covering(const Lattice& fine_cell) const;

    Box box_;
    std::array<int, 3> root_{1, 1, 1};
    double root_size_ = 1.0;
    std::vector<Leaf> leaves_;
    std::unordered_map<std::uint64_t, int> leaf_index_;
    std::vector<std::array<int, 8>> cell_vertices_;
    std::vector<Lattice> vertex_lattice_;
    std::unordered_map<std::uint64_t, int> vertex_index_;
    std::vector<Constraint> constraints_;
    std::vector<int> constraint_of_vertex_;
};

/// Refines `levels` times every leaf whose box, inflated by `band` times its
/// own size, sees a sign change of any component level set (trims ignored).
[[nodiscard]] OctreeMesh refine_near_surface(const OctreeMesh& mesh, const FractureNetwork& network,
                                             int levels, double band = 1.0);

/// Trilinear interpolation at x inside cell c from the corner values. Entries
/// at hanging vertices are used as stored; see apply_constraints.
[[nodiscard]] double interpolate(const OctreeMesh& mesh, const std::vector<double>& nodal, int c,
                                 const Vec3& x);

/// Overwrites hanging-vertex entries by their constrained values.
void apply_constraints(const OctreeMesh& mesh, std::vector<double>& nodal);

}  // namespace tracefem
