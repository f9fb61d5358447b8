#include "tracefem/assembly.hpp"
#include "tracefem/harness.hpp"
#include "tracefem/manufactured.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <unsupported/Eigen/SparseExtra>

#include <random>

using namespace tracefem;

namespace {

const Box kUnit{Vec3::Zero(), Vec3::Ones()};

struct Assembled {
    Assembled(BenchmarkCase c, OctreeMesh m, FormParameters p)
        : bc(std::move(c)), mesh(std::move(m)), geo(reconstruct(bc.network, mesh)),
          space(build_product_space(bc.network, mesh, geo, p.dirichlet)), params(p),
          system(assemble(disc(), bc.data, params))
    {
    }
    BenchmarkCase bc;
    OctreeMesh mesh;
    ReconstructedGeometry geo;
    ProductSpace space;
    FormParameters params;
    LinearSystem system;
    [[nodiscard]] Discretization disc() const { return {bc.network, mesh, geo, space}; }
};

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937& rng)
{
    std::normal_distribution<double> d(0.0, 1.0);
    Eigen::VectorXd x(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        x[k] = d(rng);
    }
    return x;
}

FormParameters with_dirichlet(DirichletTreatment t)
{
    FormParameters p;
    p.dirichlet = t;
    return p;
}

}  // namespace

class CoercivityIdentity : public ::testing::TestWithParam<int> {
protected:
    static std::unique_ptr<Assembled> make(int which)
    {
        switch (which) {
        case 0:
            return std::make_unique<Assembled>(case_crossing(24.0, 4.0, false), OctreeMesh::uniform(kUnit, 9),
                                           with_dirichlet(DirichletTreatment::nodal_normal));
        case 1:
            return std::make_unique<Assembled>(case_crossing(20.0, 0.0, true), OctreeMesh::uniform(kUnit, 9),
                                           with_dirichlet(DirichletTreatment::penalty));
        case 2: {
            BenchmarkCase bc = case_sphere();
            OctreeMesh mesh = build_mesh(bc.network, bc.levels[1]);
            return std::make_unique<Assembled>(std::move(bc), std::move(mesh), FormParameters{});
        }
        default: {
            BenchmarkCase bc = case_network5();
            OctreeMesh mesh = OctreeMesh::uniform(bc.network.domain(), 12);
            return std::make_unique<Assembled>(std::move(bc), std::move(mesh),
                                           with_dirichlet(DirichletTreatment::penalty));
        }
        }
    }
};

TEST_P(CoercivityIdentity, QuadraticFormEqualsIndependentNorm)
{
    const auto s = make(GetParam());
    std::mt19937 rng(100 + GetParam());
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::VectorXd x = random_vector(s->space.num_unknowns(), rng);
        const double a = bilinear_form(s->system, x, x);
        const double n2 = energy_norm_squared(s->disc(), s->params, x);
        ASSERT_GT(n2, 0.0);
        EXPECT_LE(std::abs(a - n2), 1e-10 * n2);
    }
}

TEST_P(CoercivityIdentity, ContinuityBound)
{
    const auto s = make(GetParam());
    std::mt19937 rng(200 + GetParam());
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::VectorXd w = random_vector(s->space.num_unknowns(), rng);
        const Eigen::VectorXd y = random_vector(s->space.num_unknowns(), rng);
        const double a = bilinear_form(s->system, w, y);
        const double nw = std::sqrt(energy_norm_squared(s->disc(), s->params, w));
        const double ny = std::sqrt(energy_norm_squared(s->disc(), s->params, y));
        EXPECT_LE(std::abs(a), 2.0 * nw * ny);
    }
}

TEST_P(CoercivityIdentity, VelocityPressureBlocksAreSkew)
{
    const auto s = make(GetParam());
    const SparseMatrix& a = s->system.matrix;
    const SparseMatrix at = a.transpose();
    for (int col = 0; col < a.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            const int rf = static_cast<int>(it.row()) % kFields;
            const int cf = col % kFields;
            if ((rf == kPressure) != (cf == kPressure)) {
                EXPECT_EQ(it.value(), -at.coeff(it.row(), col)) << it.row() << "," << col;
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Geometries, CoercivityIdentity, ::testing::Values(0, 1, 2, 3));

TEST(Assembly, ZeroVectorHasZeroFormAndNorm)
{
    const Assembled s(case_crossing(20.0, 0.0, false), OctreeMesh::uniform(kUnit, 9), FormParameters{});
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(s.space.num_unknowns());
    EXPECT_EQ(bilinear_form(s.system, z, z), 0.0);
    EXPECT_EQ(energy_norm_squared(s.disc(), s.params, z), 0.0);
}

TEST(Assembly, MatrixIsLinearInJunctionPenalty)
{
    const BenchmarkCase bc = case_crossing(20.0, 0.0, false);
    std::vector<SparseMatrix> m;
    for (double rho : {1.0, 2.0, 3.0}) {
        FormParameters p;
        p.rho_e = rho;
        m.push_back(Assembled(bc, OctreeMesh::uniform(kUnit, 9), p).system.matrix);
    }
    const SparseMatrix d1 = m[1] - m[0];
    const SparseMatrix d2 = m[2] - m[1];
    EXPECT_GT(d1.norm(), 0.0);
    EXPECT_LE((d2 - d1).norm(), 1e-12 * d1.norm());
    // Only pressure-pressure couplings change.
    for (int col = 0; col < d1.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(d1, col); it; ++it) {
            if (std::abs(it.value()) > 1e-14) {
                EXPECT_EQ(it.row() % kFields, kPressure);
                EXPECT_EQ(col % kFields, kPressure);
            }
        }
    }
}

TEST(Assembly, InvalidParametersRejected)
{
    FormParameters p;
    p.rho_u = 0.0;
    EXPECT_THROW(p.validate(), ConfigurationError);
    p.rho_u = 1.0;
    p.rho_dir = -1.0;
    EXPECT_THROW(p.validate(), ConfigurationError);
}

TEST(Assembly, ReducedSystemDropsEssentialUnknowns)
{
    const Assembled s(case_crossing(20.0, 0.0, false), OctreeMesh::uniform(kUnit, 9), FormParameters{});
    EXPECT_EQ(s.system.reduced_matrix.rows(), s.space.num_free_unknowns());
    EXPECT_EQ(static_cast<int>(s.system.free_unknowns.size()), s.space.num_free_unknowns());
    const Eigen::VectorXd full = s.system.expand(Eigen::VectorXd::Zero(s.space.num_free_unknowns()));
    for (int d = 0; d < s.space.num_scalar_dofs(); ++d) {
        const int k = ProductSpace::unknown(d, kPressure);
        if (s.space.essential[d]) {
            EXPECT_EQ(full[k], s.space.essential_value[d]);
        } else {
            EXPECT_EQ(full[k], 0.0);
        }
    }
}

TEST(Assembly, PenaltyLengthScales)
{
    BenchmarkCase bc = case_sphere();
    OctreeMesh mesh = build_mesh(bc.network, bc.levels[1]);
    FormParameters local;
    FormParameters global;
    global.penalty_h = PenaltyScale::global;
    const Assembled s(std::move(bc), std::move(mesh), local);
    const int cell = s.space.components[0].active_cells.front();
    EXPECT_EQ(penalty_length(s.disc(), local, cell), s.mesh.cell_size(cell));
    EXPECT_EQ(penalty_length(s.disc(), global, cell), cut_cell_size(s.space, s.mesh));
}

TEST(Assembly, ConditioningInsensitiveToCutPosition)
{
    // Diagonally scaled condition number, plane patch at h = 1/5.
    auto cond = [](double x0) {
        const Assembled s(case_plane_patch(x0), OctreeMesh::uniform(kUnit, 5), FormParameters{});
        Eigen::MatrixXd a(s.system.reduced_matrix);
        const Eigen::VectorXd d = a.diagonal().cwiseAbs().cwiseSqrt().cwiseInverse();
        a = d.asDiagonal() * a * d.asDiagonal();
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
        return svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    };
    const double h = 0.2;
    const double base = cond(0.5);
    for (double delta : {1e-3 * h, 0.5 * h}) {
        const double c = cond(0.5 + delta);
        EXPECT_LT(c / base, 10.0) << "delta " << delta;
        EXPECT_GT(c / base, 0.1) << "delta " << delta;
    }
}

TEST(Assembly, MatrixMarketOutput)
{
    const Assembled s(case_plane_patch(0.5), OctreeMesh::uniform(kUnit, 3), FormParameters{});
    const std::string m = testing::TempDir() + "/tracefem_a.mtx";
    const std::string b = testing::TempDir() + "/tracefem_b.mtx";
    write_matrix_market(s.system, m, b);
    SparseMatrix back;
    ASSERT_TRUE(Eigen::loadMarket(back, m));
    EXPECT_EQ(back.rows(), s.system.reduced_matrix.rows());
    EXPECT_LE((back - s.system.reduced_matrix).norm(), 1e-14 * s.system.reduced_matrix.norm());
}
