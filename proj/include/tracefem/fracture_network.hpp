#pragma once

// Implicit description of a fracture network: each component is the part of
// a level-set zero surface that satisfies a list of trim inequalities g <= 0.
// Trims double as boundary tags: the curve g = 0 on the surface is a junction,
// an internal Dirichlet boundary or an internal Neumann boundary. Where a
// component leaves the domain box, the box face decides the boundary type.

#include "tracefem/common.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tracefem {

struct LevelSetField {
    ScalarField value;
    VectorField gradient;  // optional; empty means "use the discrete gradient"

    [[nodiscard]] bool has_gradient() const { return static_cast<bool>(gradient); }
};

enum class BoundaryKind { junction, dirichlet, neumann };

[[nodiscard]] std::string to_string(BoundaryKind kind);

struct TrimConstraint {
    ScalarField function;  // kept region: function <= 0
    BoundaryKind kind = BoundaryKind::neumann;
    int junction = -1;  // junction index for kind == junction
    ScalarField data;   // p_D (dirichlet) or flux psi (neumann); empty = 0
};

struct FaceCondition {
    BoundaryKind kind = BoundaryKind::neumann;  // dirichlet or neumann
    ScalarField data;                           // empty = 0
};

/// Box faces are numbered 2*axis + side (side 0 = lower face).
inline constexpr int kBoxFaces = 6;

struct FractureComponent {
    int id = 0;
    std::string name;
    LevelSetField level_set;
    std::vector<TrimConstraint> trims;
    Mat3 permeability = Mat3::Identity();
    std::array<FaceCondition, kBoxFaces> box_faces{};
};

struct Junction {
    std::vector<int> members;  // component positions in the network
    int host = -1;             // member whose trim curve carries the junction
    int host_trim = -1;        // index into the host's trims
};

class FractureNetwork {
public:
    FractureNetwork() = default;
    explicit FractureNetwork(Box domain) : domain_(std::move(domain)) {}

    /// Returns the position of the new component.
    int add_component(FractureComponent component);
    int add_junction(Junction junction);

    [[nodiscard]] const Box& domain() const { return domain_; }
    [[nodiscard]] const std::vector<FractureComponent>& components() const { return components_; }
    [[nodiscard]] std::vector<FractureComponent>& components() { return components_; }
    [[nodiscard]] const std::vector<Junction>& junctions() const { return junctions_; }
    [[nodiscard]] std::size_t size() const { return components_.size(); }

    /// Throws ConfigurationError when the description is inconsistent.
    void validate() const;

    /// Connected groups of components (linked through junctions).
    [[nodiscard]] std::vector<std::vector<int>> connected_groups() const;

private:
    Box domain_;
    std::vector<FractureComponent> components_;
    std::vector<Junction> junctions_;
};

/// Level set of the plane {x : n.(x - point) = 0} with unit normal n.
[[nodiscard]] LevelSetField plane_level_set(const Vec3& point, const Vec3& normal);

/// Signed distance to a sphere.
[[nodiscard]] LevelSetField sphere_level_set(const Vec3& center, double radius);

[[nodiscard]] double evaluate_or_zero(const ScalarField& f, const Vec3& x);

}  // namespace tracefem
