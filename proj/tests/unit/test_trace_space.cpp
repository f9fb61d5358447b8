#include "tracefem/harness.hpp"
#include "tracefem/manufactured.hpp"
#include "tracefem/trace_space.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace tracefem;

namespace {

const Box kUnit{Vec3::Zero(), Vec3::Ones()};

struct Built {
    explicit Built(const BenchmarkCase& c, OctreeMesh m, DirichletTreatment t = DirichletTreatment::nodal_normal)
        : bc(c), mesh(std::move(m)), geo(reconstruct(bc.network, mesh)),
          space(build_product_space(bc.network, mesh, geo, t))
    {
    }
    const BenchmarkCase& bc;
    OctreeMesh mesh;
    ReconstructedGeometry geo;
    ProductSpace space;
    [[nodiscard]] Discretization disc() const { return {bc.network, mesh, geo, space}; }
};

}  // namespace

TEST(TraceSpace, JunctionCellsCarryDistinctDofsPerComponent)
{
    const BenchmarkCase bc = case_crossing(20.0, 0.0, false);
    const Built b(bc, OctreeMesh::uniform(kUnit, 9));
    const auto& comps = b.space.components;
    int shared = 0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        for (std::size_t j = i + 1; j < comps.size(); ++j) {
            for (int c : comps[i].active_cells) {
                if (!comps[j].is_active(c)) {
                    continue;
                }
                ++shared;
                for (int v : b.mesh.cell_vertices(c)) {
                    const int di = comps[i].vertex_dof[v];
                    const int dj = comps[j].vertex_dof[v];
                    ASSERT_GE(di, 0);
                    ASSERT_GE(dj, 0);
                    EXPECT_NE(comps[i].offset + di, comps[j].offset + dj);
                }
            }
        }
    }
    EXPECT_GT(shared, 0);
}

TEST(TraceSpace, ComponentTraceDependsOnlyOnOwnDofs)
{
    const BenchmarkCase bc = case_crossing(24.0, 4.0, false);
    const Built b(bc, OctreeMesh::uniform(kUnit, 9));
    std::mt19937 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd x(b.space.num_unknowns());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        x[k] = n(rng);
    }
    const int comp = 1;
    const ComponentSpace& cs = b.space.components[comp];
    Eigen::VectorXd y = x;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        const int d = static_cast<int>(k / kFields);
        if (d < cs.offset || d >= cs.offset + cs.num_dofs()) {
            y[k] += n(rng);
        }
    }
    for (const CellPatch& p : b.geo.components[comp].patches) {
        for (const Triangle& t : p.triangles) {
            const Vec3 c = (t.v[0] + t.v[1] + t.v[2]) / 3.0;
            const TraceValue a = evaluate(b.disc(), x, comp, p.cell, c);
            const TraceValue e = evaluate(b.disc(), y, comp, p.cell, c);
            EXPECT_EQ(a.p, e.p);
            EXPECT_EQ(a.u, e.u);
        }
    }
}

TEST(TraceSpace, HangingVerticesCarryNoDofs)
{
    const BenchmarkCase bc = case_sphere();
    const Built b(bc, build_mesh(bc.network, bc.levels[1]));
    ASSERT_FALSE(b.mesh.constraints().empty());
    for (const ComponentSpace& cs : b.space.components) {
        for (int v : cs.dof_vertex) {
            EXPECT_FALSE(b.mesh.is_hanging(v));
        }
    }
}

TEST(TraceSpace, EssentialCountMatchesMarkedVertices)
{
    const BenchmarkCase bc = case_crossing(20.0, 0.0, false);
    const Built b(bc, OctreeMesh::uniform(kUnit, 19));
    int marked = 0;
    for (int c = 0; c < static_cast<int>(bc.network.size()); ++c) {
        marked += static_cast<int>(dirichlet_interpolation(bc.network, b.mesh, b.geo, c).size());
    }
    EXPECT_GT(marked, 0);
    EXPECT_EQ(b.space.num_essential(), marked);
    EXPECT_TRUE(b.space.pinned.empty());
}

TEST(TraceSpace, FaceTreatmentUsesClosestCurvePoint)
{
    const BenchmarkCase bc = case_crossing(20.0, 0.0, false);
    const OctreeMesh mesh = OctreeMesh::uniform(kUnit, 9);
    const ReconstructedGeometry geo = reconstruct(bc.network, mesh);
    for (int c = 0; c < static_cast<int>(bc.network.size()); ++c) {
        const FractureComponent& fc = bc.network.components()[c];
        const auto values = dirichlet_interpolation(bc.network, mesh, geo, c, DirichletTreatment::nodal_face);
        ASSERT_FALSE(values.empty());
        for (const auto& [v, value] : values) {
            bool match = false;
            for (int f = 0; f < kBoxFaces; ++f) {
                if (fc.box_faces[f].kind == BoundaryKind::dirichlet && !geo.components[c].box_curves[f].segments.empty()) {
                    const Vec3 y = closest_point(geo.components[c].box_curves[f].segments, mesh.vertex(v));
                    match = match || fc.box_faces[f].data(y) == value;
                }
            }
            EXPECT_TRUE(match) << "vertex " << v;
        }
    }
}

TEST(TraceSpace, NormalTreatmentUsesSurfaceProjection)
{
    const BenchmarkCase bc = case_crossing(20.0, 0.0, false);
    const OctreeMesh mesh = OctreeMesh::uniform(kUnit, 9);
    const ReconstructedGeometry geo = reconstruct(bc.network, mesh);
    const FractureComponent& fc = bc.network.components()[0];
    for (const auto& [v, value] : dirichlet_interpolation(bc.network, mesh, geo, 0)) {
        const Vec3 y = project_to_surface(fc.level_set, mesh.vertex(v));
        EXPECT_NEAR(fc.level_set.value(y), 0.0, 1e-14);
        EXPECT_NEAR(value, bc.exact_p[0](y), 1e-14);
    }
}

TEST(TraceSpace, ProjectionWithoutAnalyticGradient)
{
    LevelSetField ls = sphere_level_set(Vec3::Zero(), 1.0);
    ls.gradient = nullptr;
    const Vec3 y = project_to_surface(ls, Vec3(0.3, 0.9, -0.4));
    EXPECT_NEAR(y.norm(), 1.0, 1e-12);
    EXPECT_NEAR(y.normalized().dot(Vec3(0.3, 0.9, -0.4).normalized()), 1.0, 1e-9);
}

TEST(TraceSpace, VertexOnCurveTakesOwnValue)
{
    CurveSegment s;
    s.a = Vec3(0.0, 0.0, 0.0);
    s.b = Vec3(0.0, 0.0, 1.0);
    const Vec3 on(0.0, 0.0, 0.25);
    EXPECT_EQ(closest_point({s}, on), on);
    EXPECT_EQ(closest_point({s}, Vec3(0.3, 0.0, 2.0)), Vec3(0.0, 0.0, 1.0));
}

TEST(TraceSpace, ConstantInletDataMarksVerticesWithTwo)
{
    const BenchmarkCase bc = case_network5();
    const OctreeMesh mesh = OctreeMesh::uniform(bc.network.domain(), 16);
    const ReconstructedGeometry geo = reconstruct(bc.network, mesh);
    const auto values = dirichlet_interpolation(bc.network, mesh, geo, 0, DirichletTreatment::nodal_face);
    ASSERT_FALSE(values.empty());
    for (const auto& [v, value] : values) {
        EXPECT_EQ(value, 2.0);
    }
    EXPECT_TRUE(dirichlet_interpolation(bc.network, mesh, geo, 0, DirichletTreatment::penalty).empty());
}

TEST(TraceSpace, PureNeumannGroupsArePinned)
{
    // Two crossing planes with all box faces Neumann: one connected group.
    FractureNetwork net(kUnit);
    FractureComponent a;
    a.level_set = plane_level_set(Vec3::Constant(0.5), Vec3::UnitX());
    FractureComponent b;
    b.level_set = plane_level_set(Vec3::Constant(0.5), Vec3::UnitZ());
    FractureComponent c;
    c.level_set = plane_level_set(Vec3(0.2, 0.5, 0.5), Vec3::UnitY());
    c.trims.push_back({[](const Vec3& x) { return x[0] - 0.3; }, BoundaryKind::neumann, -1, {}});
    net.add_component(a);
    net.add_component(b);
    net.add_component(c);
    const OctreeMesh mesh = OctreeMesh::uniform(kUnit, 7);
    const ReconstructedGeometry geo = reconstruct(net, mesh);
    const ProductSpace space = build_product_space(net, mesh, geo);
    // No junctions declared: every component is its own group.
    EXPECT_EQ(space.pinned.size(), 3u);
    EXPECT_EQ(space.num_essential(), 3);
}

TEST(TraceSpace, DirichletFaceWithoutDataIsRejected)
{
    FractureNetwork net(kUnit);
    FractureComponent a;
    a.level_set = plane_level_set(Vec3::Constant(0.5), Vec3::UnitX());
    a.box_faces[2] = {BoundaryKind::dirichlet, {}};
    net.add_component(a);
    const OctreeMesh mesh = OctreeMesh::uniform(kUnit, 5);
    const ReconstructedGeometry geo = reconstruct(net, mesh);
    EXPECT_THROW((void)build_product_space(net, mesh, geo), ConfigurationError);
}

TEST(TraceSpace, TreatmentNamesRoundTrip)
{
    for (auto t : {DirichletTreatment::nodal_normal, DirichletTreatment::nodal_face, DirichletTreatment::penalty}) {
        EXPECT_EQ(parse_dirichlet_treatment(to_string(t)), t);
    }
    EXPECT_THROW((void)parse_dirichlet_treatment("weak"), ConfigurationError);
}
