#include "tracefem/config.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace tracefem;

namespace {

RunConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

}  // namespace

TEST(Config, Defaults)
{
    const RunConfig c = parse("{}");
    EXPECT_EQ(c.case_name, "crossing");
    EXPECT_TRUE(c.default_levels);
    EXPECT_EQ(c.options.solver.method, SolverMethod::automatic);
    EXPECT_EQ(c.kernels, "auto");
    EXPECT_FALSE(c.dirichlet.has_value());
}

TEST(Config, FullDocument)
{
    const RunConfig c = parse(R"({
        // comments are allowed
        "case": {"name": "crossing", "alpha": 24, "beta": 4},
        "mesh": {"n0": [9, 19], "refine_levels": 0, "band": 1.5},
        "params": {"rho_e": 2.0, "rho_u": 0.5, "rho_p": 1.0, "rho_dir": 3.0,
                   "penalty_h": "global", "dirichlet": "penalty"},
        "solver": {"method": "iterative", "tol": 1e-9, "max_iterations": 500, "restart": 50},
        "output": {"csv": "out.csv", "vtk": "out.vtk"},
        "kernels": "scalar"
    })");
    EXPECT_EQ(c.case_params.alpha, 24.0);
    EXPECT_EQ(c.case_params.beta, 4.0);
    EXPECT_FALSE(c.default_levels);
    ASSERT_EQ(c.levels.size(), 2u);
    EXPECT_EQ(c.levels[1].roots[0], 19);
    EXPECT_EQ(c.levels[1].band, 1.5);
    EXPECT_EQ(c.options.params.rho_e, 2.0);
    EXPECT_EQ(c.options.params.penalty_h, PenaltyScale::global);
    EXPECT_EQ(c.dirichlet, DirichletTreatment::penalty);
    EXPECT_EQ(c.options.solver.method, SolverMethod::iterative);
    EXPECT_EQ(c.options.solver.tolerance, 1e-9);
    EXPECT_EQ(c.options.solver.restart, 50);
    EXPECT_EQ(c.csv_path, "out.csv");
    EXPECT_EQ(c.vtk_path, "out.vtk");
    EXPECT_EQ(c.kernels, "scalar");
}

TEST(Config, RefinementListOnSingleLattice)
{
    const RunConfig c = parse(R"({"case": "sphere", "mesh": {"n0": 16, "refine_levels": [0, 1, 2]}})");
    const BenchmarkCase bc = make_case(c.case_name, c.case_params);
    const auto levels = resolve_levels(c, bc);
    ASSERT_EQ(levels.size(), 3u);
    EXPECT_EQ(levels[2].refine_levels, 2);
    EXPECT_EQ(levels[2].roots, (std::array<int, 3>{16, 16, 16}));
}

TEST(Config, CaseDirichletUnlessOverridden)
{
    const BenchmarkCase bc = case_network5();
    EXPECT_EQ(resolve_options(parse("{}"), bc).params.dirichlet, DirichletTreatment::penalty);
    const RunConfig c = parse(R"({"params": {"dirichlet": "nodal_face"}})");
    EXPECT_EQ(resolve_options(c, bc).params.dirichlet, DirichletTreatment::nodal_face);
    EXPECT_EQ(resolve_levels(parse("{}"), bc).size(), bc.levels.size());
}

TEST(Config, RootLattice)
{
    EXPECT_EQ(root_lattice(Box{Vec3(-1.6, -1.6, -0.8), Vec3(1.6, 1.6, 0.8)}, 10), (std::array<int, 3>{10, 10, 5}));
    EXPECT_THROW((void)root_lattice(Box{Vec3(-1.6, -1.6, -0.8), Vec3(1.6, 1.6, 0.8)}, 9), ConfigurationError);
}

TEST(Config, Rejections)
{
    EXPECT_THROW((void)parse(R"({"unknown": 1})"), ConfigurationError);
    EXPECT_THROW((void)parse(R"({"mesh": {"n": 3}})"), ConfigurationError);
    EXPECT_THROW((void)parse(R"({"params": {"rho_e": 0}})"), ConfigurationError);
    EXPECT_THROW((void)parse(R"({"params": {"penalty_h": "mean"}})"), ConfigurationError);
    EXPECT_THROW((void)parse(R"({"solver": {"method": "cg"}})"), ConfigurationError);
    EXPECT_THROW((void)parse(R"({"solver": {"tol": -1}})"), ConfigurationError);
    EXPECT_THROW((void)parse(R"({"kernels": "avx512"})"), ConfigurationError);
    EXPECT_THROW((void)parse("{ not json"), ConfigurationError);
    EXPECT_THROW((void)load_config("/nonexistent/config.json"), ConfigurationError);
}
