#pragma once

// Benchmark problems: crossing planes (optionally rotated, optionally with an
// immersed boundary), sphere, torus and a five-fracture network.

#include "tracefem/assembly.hpp"
#include "tracefem/fracture_network.hpp"

#include <array>
#include <string>
#include <vector>

namespace tracefem {

/// One background mesh of a convergence sequence: root lattice plus the
/// number of surface-graded refinement rounds.
struct MeshLevel {
    std::array<int, 3> roots{1, 1, 1};
    int refine_levels = 0;
    double band = 1.0;
};

struct BenchmarkCase {
    std::string name;
    FractureNetwork network;
    FlowData data;
    std::vector<ScalarField> exact_p;  // per component; empty without exact solution
    std::vector<VectorField> exact_u;
    std::vector<MeshLevel> levels;     // default convergence sequence
    // Strong nodal data needs the normal extension of the exact pressure; a
    // case with boundary values only uses the penalty treatment.
    DirichletTreatment dirichlet = DirichletTreatment::nodal_normal;

    [[nodiscard]] bool has_exact() const { return !exact_p.empty(); }
};

/// Rotation used by the crossing case: first alpha about the y axis, then
/// beta about the z axis (degrees, counter-clockwise).
[[nodiscard]] Mat3 crossing_rotation(double alpha_deg, double beta_deg);

[[nodiscard]] BenchmarkCase case_crossing(double alpha_deg, double beta_deg, bool immersed);
[[nodiscard]] BenchmarkCase case_sphere();
[[nodiscard]] BenchmarkCase case_torus();
[[nodiscard]] BenchmarkCase case_network5();

/// Axis-aligned plane x = x0 in the unit cube with linear tangential pressure
/// p = 1 + 2y - z, u = -grad p, Dirichlet data on all box faces.
[[nodiscard]] BenchmarkCase case_plane_patch(double x0);

/// Crossing geometry with constant pressure c and zero velocity.
[[nodiscard]] BenchmarkCase case_crossing_constant(double alpha_deg, double beta_deg, double c);

[[nodiscard]] std::vector<std::string> case_names();

struct CaseParameters {
    double alpha = 20.0;
    double beta = 0.0;
    double x0 = 0.5;  // plane-patch position
};

/// Looks up a case by name: crossing, crossing-immersed, sphere, torus,
/// network5, plane-patch, crossing-constant.
[[nodiscard]] BenchmarkCase make_case(const std::string& name, const CaseParameters& params = {});

}  // namespace tracefem
