#pragma once

// Discrete fracture geometry: nodal level-set interpolation, per-cell surface
// triangulation of the trilinear zero set, trimming, and boundary/junction
// polylines.

#include "tracefem/common.hpp"
#include "tracefem/fracture_network.hpp"
#include "tracefem/octree_mesh.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace tracefem {

struct Triangle {
    std::array<Vec3, 3> v;
    Vec3 normal = Vec3::Zero();  // unit, along grad(phi_h)
    double area = 0.0;
};

/// Triangle with per-edge tags; edge k runs from v[k] to v[k+1].
/// Tags: -1 interior, 0..5 cube face (2*axis + side).
struct TaggedTriangle {
    std::array<Vec3, 3> v;
    std::array<int, 3> edge_tag{-1, -1, -1};
    Vec3 normal = Vec3::Zero();
    double area = 0.0;
};

struct CellPatch {
    int cell = -1;
    std::vector<Triangle> triangles;
};

struct CurveSegment {
    Vec3 a;
    Vec3 b;
    int cell = -1;
    Vec3 conormal = Vec3::Zero();  // outward, in the owning triangle's plane
    Vec3 normal = Vec3::Zero();    // surface normal of the owning triangle

    [[nodiscard]] double length() const { return (b - a).norm(); }
};

struct CurveSegmentSet {
    BoundaryKind kind = BoundaryKind::neumann;
    std::vector<int> owners;
    std::vector<CurveSegment> segments;

    [[nodiscard]] double length() const;
};

struct ComponentGeometry {
    std::vector<double> phi;              // nodal phi_h (perturbed, constrained)
    std::vector<std::vector<double>> trim_values;  // nodal trim interpolants
    std::vector<CellPatch> patches;       // trimmed, one per cell with area, sorted
    std::vector<CurveSegmentSet> trim_curves;           // one per trim
    std::array<CurveSegmentSet, kBoxFaces> box_curves;  // where the patch meets the box

    [[nodiscard]] double area() const;
    [[nodiscard]] std::size_t num_triangles() const;
};

struct ReconstructedGeometry {
    std::vector<ComponentGeometry> components;
    std::vector<CurveSegmentSet> junctions;
    double zero_shift = 0.0;  // perturbation applied to exact nodal zeros
};

/// Nodal values of `field` at every mesh vertex; hanging vertices take their
/// constrained values and exact zeros are moved to +shift.
[[nodiscard]] std::vector<double> interpolate_levelset(const ScalarField& field, const OctreeMesh& mesh,
                                                       double shift);

/// Trilinear interpolant inside `box` with corner values `f` (corner a =
/// bx + 2 by + 4 bz); optionally returns the gradient.
[[nodiscard]] double trilinear(const Box& box, const std::array<double, 8>& f, const Vec3& x,
                               Vec3* grad = nullptr);

/// Triangulation of {phi_h = 0} inside one cube from the 8 corner values.
/// Corner values must be nonzero. Returns an empty list without sign change.
[[nodiscard]] std::vector<TaggedTriangle> reconstruct_cell(const Box& box, const std::array<double, 8>& f);

/// Untagged convenience wrapper; throws GeometryError if all values are 0.
[[nodiscard]] std::vector<Triangle> reconstruct_surface(const Box& box, const std::array<double, 8>& f);

/// Full reconstruction of all components, trims, box boundaries and junctions.
[[nodiscard]] ReconstructedGeometry reconstruct(const FractureNetwork& network, const OctreeMesh& mesh);

/// Zero set of a nodal function restricted linearly to the given patches.
[[nodiscard]] CurveSegmentSet cut_patches(const std::vector<CellPatch>& patches, const OctreeMesh& mesh,
                                          const std::vector<double>& nodal);

/// Unit normal extended off the surface: analytic gradient when available,
/// otherwise the gradient of phi_h in `cell`.
[[nodiscard]] Vec3 extended_normal(const FractureComponent& component, const OctreeMesh& mesh,
                                   const std::vector<double>& phi, int cell, const Vec3& x);

/// Legacy VTK polydata with all triangles and curves, component id as cell data.
void write_geometry_vtk(std::ostream& out, const ReconstructedGeometry& geometry);

}  // namespace tracefem
