#pragma once

// Per-component trace spaces on the cut-cell neighbourhoods and the product
// space of velocity (3 scalars) and pressure (1 scalar) per nodal DOF.
//
// Unknown layout: unknown(d, f) = 4 d + f with f = 0, 1, 2 the velocity
// components and f = 3 the pressure, d a global scalar DOF. Scalar DOFs are
// numbered component by component.

#include "tracefem/common.hpp"
#include "tracefem/fracture_network.hpp"
#include "tracefem/geometry.hpp"
#include "tracefem/octree_mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace tracefem {

inline constexpr int kFields = 4;
inline constexpr int kPressure = 3;

/// Contribution of cell corner `corner` to global scalar DOF `dof`.
struct CornerDof {
    int corner = 0;
    int dof = 0;
    double weight = 1.0;
};

struct ComponentSpace {
    int component = -1;
    std::vector<int> active_cells;  // sorted leaf ids
    std::vector<int> dof_vertex;    // local dof -> mesh vertex
    std::vector<int> vertex_dof;    // mesh vertex -> local dof or -1
    int offset = 0;                 // first global scalar DOF

    [[nodiscard]] int num_dofs() const { return static_cast<int>(dof_vertex.size()); }
    [[nodiscard]] bool is_active(int cell) const;
};

class ProductSpace {
public:
    std::vector<ComponentSpace> components;
    std::vector<char> essential;            // per global scalar DOF (pressure)
    std::vector<double> essential_value;    // per global scalar DOF
    std::vector<int> pinned;                // scalar DOFs fixed to remove a constant mode
    std::vector<int> pinned_groups;         // component group index of each pin

    [[nodiscard]] int num_scalar_dofs() const;
    [[nodiscard]] int num_unknowns() const { return kFields * num_scalar_dofs(); }
    [[nodiscard]] int num_essential() const;
    /// Unknowns after eliminating essential pressure DOFs.
    [[nodiscard]] int num_free_unknowns() const { return num_unknowns() - num_essential(); }

    [[nodiscard]] static int unknown(int scalar_dof, int field) { return kFields * scalar_dof + field; }

    /// Corner-to-DOF expansion of component `comp` on `cell` (hanging corners
    /// expand to their resolved masters).
    [[nodiscard]] std::vector<CornerDof> expand(const OctreeMesh& mesh, int comp, int cell) const;
};

/// Leaves carrying trimmed surface of the component, plus the cells of any
/// junction segment the component belongs to.
[[nodiscard]] std::vector<int> build_active_cells(const FractureNetwork& network,
                                                  const ReconstructedGeometry& geometry, int comp);

/// Treatment of Dirichlet data on box faces.
///   nodal_normal: strong; face nodes take the data at their projection onto
///                 the surface along the level-set gradient.
///   nodal_face:   strong; face nodes take the data at the closest point of
///                 the boundary curve within the box face.
///   penalty:      weak; rho_dir/h^2 (p - p_D, q) on the boundary curve.
enum class DirichletTreatment { nodal_normal, nodal_face, penalty };

[[nodiscard]] std::string to_string(DirichletTreatment treatment);
[[nodiscard]] DirichletTreatment parse_dirichlet_treatment(const std::string& name);

/// Builds all component spaces, Dirichlet interpolation and pinning.
[[nodiscard]] ProductSpace build_product_space(const FractureNetwork& network, const OctreeMesh& mesh,
                                               const ReconstructedGeometry& geometry,
                                               DirichletTreatment treatment = DirichletTreatment::nodal_normal);

/// Nodal Dirichlet values of one component: (mesh vertex, value) pairs for
/// the box-face vertices of cells owning Dirichlet segments (none for the
/// penalty treatment).
[[nodiscard]] std::vector<std::pair<int, double>> dirichlet_interpolation(
    const FractureNetwork& network, const OctreeMesh& mesh, const ReconstructedGeometry& geometry, int comp,
    DirichletTreatment treatment = DirichletTreatment::nodal_normal);

/// Newton projection of x onto the zero set along the level-set gradient.
[[nodiscard]] Vec3 project_to_surface(const LevelSetField& level_set, const Vec3& x);

/// Closest point on a polyline.
[[nodiscard]] Vec3 closest_point(const std::vector<CurveSegment>& segments, const Vec3& x);

/// Everything the element loops need, bundled.
struct Discretization {
    const FractureNetwork& network;
    const OctreeMesh& mesh;
    const ReconstructedGeometry& geometry;
    const ProductSpace& space;
};

struct TraceValue {
    double p = 0.0;
    Vec3 grad_p = Vec3::Zero();
    Vec3 u = Vec3::Zero();
    Mat3 grad_u = Mat3::Zero();  // row f = gradient of velocity component f
};

/// Evaluates component `comp`'s FE fields from the full unknown vector at x
/// in `cell`.
[[nodiscard]] TraceValue evaluate(const Discretization& disc, const Eigen::VectorXd& x, int comp, int cell,
                                  const Vec3& point);

}  // namespace tracefem
