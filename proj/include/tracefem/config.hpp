#pragma once

// JSON run configuration for the command-line tool.

#include "tracefem/harness.hpp"
#include "tracefem/manufactured.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tracefem {

struct RunConfig {
    std::string case_name = "crossing";
    CaseParameters case_params;
    bool default_levels = true;     // use the case's own level sequence
    std::vector<MeshLevel> levels;  // when !default_levels
    RunOptions options;
    std::optional<DirichletTreatment> dirichlet;  // overrides the case default
    std::string csv_path;
    std::string vtk_path;           // finest level
    std::string kernels = "auto";   // auto | scalar | avx2
};

/// Parses a configuration document. Unknown keys are rejected.
[[nodiscard]] RunConfig parse_config(std::istream& in);
[[nodiscard]] RunConfig load_config(const std::string& path);

/// Root lattice with n0 cells along x and cubic cells, for the given domain.
[[nodiscard]] std::array<int, 3> root_lattice(const Box& domain, int n0);

/// Run options for a case: config values plus the case's Dirichlet treatment
/// unless the config overrides it.
[[nodiscard]] RunOptions resolve_options(const RunConfig& config, const BenchmarkCase& bc);

/// The mesh sequence a config resolves to for a given case.
[[nodiscard]] std::vector<MeshLevel> resolve_levels(const RunConfig& config, const BenchmarkCase& bc);

}  // namespace tracefem
