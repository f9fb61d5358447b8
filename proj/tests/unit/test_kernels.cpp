#include "tracefem/common.hpp"
#include "tracefem/kernels.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

namespace k = tracefem::kernels;

namespace {

std::vector<double> random_points(int count, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> ref(3 * count);
    for (double& r : ref) {
        r = u(rng);
    }
    return ref;
}

}  // namespace

TEST(Kernels, ScalarBasisIsPartitionOfUnity)
{
    const auto ref = random_points(13, 1);
    std::vector<double> v(13 * 8), dx(13 * 8), dy(13 * 8), dz(13 * 8);
    k::scalar::trilinear_basis(ref, 4.0, v.data(), dx.data(), dy.data(), dz.data());
    for (int q = 0; q < 13; ++q) {
        double s = 0.0, gx = 0.0, gy = 0.0, gz = 0.0;
        for (int a = 0; a < 8; ++a) {
            s += v[q * 8 + a];
            gx += dx[q * 8 + a];
            gy += dy[q * 8 + a];
            gz += dz[q * 8 + a];
        }
        EXPECT_NEAR(s, 1.0, 1e-15);
        EXPECT_NEAR(gx, 0.0, 1e-13);
        EXPECT_NEAR(gy, 0.0, 1e-13);
        EXPECT_NEAR(gz, 0.0, 1e-13);
    }
}

TEST(Kernels, ScalarBasisReproducesLinearField)
{
    // f = 1 + 2x - 3y + 0.5z on a cell of size 0.25 anchored at 0.
    const double h = 0.25;
    std::array<double, 8> f{};
    for (int a = 0; a < 8; ++a) {
        const double x = h * (a & 1), y = h * ((a >> 1) & 1), z = h * ((a >> 2) & 1);
        f[a] = 1.0 + 2.0 * x - 3.0 * y + 0.5 * z;
    }
    const auto ref = random_points(5, 2);
    std::vector<double> v(40), dx(40), dy(40), dz(40);
    k::scalar::trilinear_basis(ref, 1.0 / h, v.data(), dx.data(), dy.data(), dz.data());
    for (int q = 0; q < 5; ++q) {
        double val = 0.0, gx = 0.0, gy = 0.0, gz = 0.0;
        for (int a = 0; a < 8; ++a) {
            val += f[a] * v[q * 8 + a];
            gx += f[a] * dx[q * 8 + a];
            gy += f[a] * dy[q * 8 + a];
            gz += f[a] * dz[q * 8 + a];
        }
        const double* r = &ref[3 * q];
        EXPECT_NEAR(val, 1.0 + 2.0 * h * r[0] - 3.0 * h * r[1] + 0.5 * h * r[2], 1e-14);
        EXPECT_NEAR(gx, 2.0, 1e-13);
        EXPECT_NEAR(gy, -3.0, 1e-13);
        EXPECT_NEAR(gz, 0.5, 1e-13);
    }
}

TEST(Kernels, ScalarGramMatchesNaiveSum)
{
    const int nq = 7;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(nq), lhs(nq * 8), rhs(nq * 8);
    for (double& x : w) x = u(rng);
    for (double& x : lhs) x = u(rng);
    for (double& x : rhs) x = u(rng);
    std::vector<double> out(64, 0.5);
    k::scalar::weighted_gram(w, lhs.data(), rhs.data(), out.data());
    for (int a = 0; a < 8; ++a) {
        for (int b = 0; b < 8; ++b) {
            double s = 0.5;
            for (int q = 0; q < nq; ++q) {
                s += w[q] * lhs[q * 8 + a] * rhs[q * 8 + b];
            }
            EXPECT_NEAR(out[a * 8 + b], s, 1e-14);
        }
    }
}

class KernelEquivalence : public ::testing::TestWithParam<int> {
protected:
    void SetUp() override
    {
        if (!k::avx2::compiled() || k::detect_isa() != k::Isa::avx2) {
            GTEST_SKIP() << "AVX2 variant not available on this machine";
        }
    }
};

TEST_P(KernelEquivalence, BasisAgreesWithScalar)
{
    const int nq = GetParam();
    const auto ref = random_points(nq, 10 + nq);
    std::vector<double> v0(nq * 8), x0(nq * 8), y0(nq * 8), z0(nq * 8);
    std::vector<double> v1(nq * 8), x1(nq * 8), y1(nq * 8), z1(nq * 8);
    k::scalar::trilinear_basis(ref, 16.0, v0.data(), x0.data(), y0.data(), z0.data());
    k::avx2::trilinear_basis(ref, 16.0, v1.data(), x1.data(), y1.data(), z1.data());
    for (int i = 0; i < nq * 8; ++i) {
        EXPECT_NEAR(v0[i], v1[i], 1e-15);
        EXPECT_NEAR(x0[i], x1[i], 1e-13);
        EXPECT_NEAR(y0[i], y1[i], 1e-13);
        EXPECT_NEAR(z0[i], z1[i], 1e-13);
    }
}

TEST_P(KernelEquivalence, GramAgreesWithScalar)
{
    const int nq = GetParam();
    std::mt19937 rng(20 + nq);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> w(nq), lhs(nq * 8), rhs(nq * 8);
    for (double& x : w) x = u(rng);
    for (double& x : lhs) x = u(rng);
    for (double& x : rhs) x = u(rng);
    std::vector<double> o0(64, 1.0), o1(64, 1.0);
    k::scalar::weighted_gram(w, lhs.data(), rhs.data(), o0.data());
    k::avx2::weighted_gram(w, lhs.data(), rhs.data(), o1.data());
    for (int i = 0; i < 64; ++i) {
        EXPECT_NEAR(o0[i], o1[i], 1e-13 * (1.0 + std::abs(o0[i])));
    }
}

INSTANTIATE_TEST_SUITE_P(PointCounts, KernelEquivalence, ::testing::Values(0, 1, 3, 4, 8, 9, 24, 27));

TEST(Kernels, DispatchHonoursSetIsa)
{
    const k::Isa before = k::active_isa();
    k::set_isa(k::Isa::scalar);
    EXPECT_EQ(k::active_isa(), k::Isa::scalar);
    if (k::avx2::compiled() && k::detect_isa() == k::Isa::avx2) {
        k::set_isa(k::Isa::avx2);
        EXPECT_EQ(k::active_isa(), k::Isa::avx2);
    } else {
        EXPECT_THROW(k::set_isa(k::Isa::avx2), tracefem::PreconditionError);
    }
    k::set_isa(before);
}
