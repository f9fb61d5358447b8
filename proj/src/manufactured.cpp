#include "tracefem/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace tracefem {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

ScalarField linear(const Vec3& a, double b)
{
    return [a, b](const Vec3& x) { return a.dot(x) + b; };
}

FaceCondition dirichlet(ScalarField data)
{
    return {BoundaryKind::dirichlet, std::move(data)};
}

std::vector<MeshLevel> uniform_levels(std::initializer_list<int> ns)
{
    std::vector<MeshLevel> out;
    for (int n : ns) {
        out.push_back({{n, n, n}, 0, 1.0});
    }
    return out;
}

std::vector<MeshLevel> graded_levels(std::array<int, 3> roots, int count)
{
    std::vector<MeshLevel> out;
    for (int k = 0; k < count; ++k) {
        out.push_back({roots, k, 1.0});
    }
    return out;
}

// Crossing network skeleton: four half-planes around the rotated z' axis
// through the cube centre, joined by one junction hosted on component 0.
// Component i lies on {x' = 0.5} (i = 0, 2) or {y' = 0.5} (i = 1, 3).
FractureNetwork crossing_network(const Mat3& q)
{
    const Vec3 c(0.5, 0.5, 0.5);
    const Vec3 ex = q.col(0);
    const Vec3 ey = q.col(1);
    FractureNetwork net(Box{Vec3::Zero(), Vec3::Ones()});
    // x' - 0.5 = ex.(x - c)
    const std::array<Vec3, 4> normal = {ex, ey, ex, ey};
    const std::array<Vec3, 4> trim = {ey, -ex, -ey, ex};
    for (int i = 0; i < 4; ++i) {
        FractureComponent comp;
        comp.name = "crossing-" + std::to_string(i + 1);
        comp.level_set = plane_level_set(c, normal[i]);
        comp.trims.push_back({linear(trim[i], -trim[i].dot(c)), BoundaryKind::junction, 0, {}});
        net.add_component(std::move(comp));
    }
    net.add_junction({{0, 1, 2, 3}, 0, 0});
    return net;
}

void check_angles(double alpha, double beta)
{
    if (!(std::abs(alpha) <= 30.0 && std::abs(beta) <= 30.0)) {
        throw ConfigurationError("crossing: rotation angles must lie in [-30, 30] degrees");
    }
}

}  // namespace

Mat3 crossing_rotation(double alpha_deg, double beta_deg)
{
    const Mat3 ry = Eigen::AngleAxisd(alpha_deg * kDeg, Vec3::UnitY()).toRotationMatrix();
    const Mat3 rz = Eigen::AngleAxisd(beta_deg * kDeg, Vec3::UnitZ()).toRotationMatrix();
    return rz * ry;
}

BenchmarkCase case_crossing(double alpha_deg, double beta_deg, bool immersed)
{
    check_angles(alpha_deg, beta_deg);
    const Mat3 q = crossing_rotation(alpha_deg, beta_deg);
    const Vec3 c(0.5, 0.5, 0.5);

    BenchmarkCase bc;
    bc.name = immersed ? "crossing-immersed" : "crossing";
    bc.network = crossing_network(q);
    bc.levels = uniform_levels({9, 19, 39, 79});

    static constexpr std::array<double, 4> dx = {0.0, 1.0, 0.0, -1.0};
    static constexpr std::array<double, 4> dy = {1.0, 0.0, -1.0, 0.0};
    static constexpr std::array<double, 4> t0 = {-0.5, -0.5, 0.5, 0.5};
    for (int i = 0; i < 4; ++i) {
        const Vec3 d(dx[i], dy[i], 1.0);
        const double shift = t0[i];
        // Reference coordinates x' = c + Q^T (x - c); t_i = d . x' + shift.
        auto t = [q, c, d, shift](const Vec3& x) { return d.dot(c + q.transpose() * (x - c)) + shift; };
        ScalarField p = [t](const Vec3& x) { return std::exp(std::cos(t(x))); };
        VectorField u = [t, q, d](const Vec3& x) {
            const double s = t(x);
            return Vec3(q * d * (std::sin(s) * std::exp(std::cos(s))));
        };
        ScalarField g = [t](const Vec3& x) {
            const double s = t(x);
            return 2.0 * (std::cos(s) - std::sin(s) * std::sin(s)) * std::exp(std::cos(s));
        };
        bc.exact_p.push_back(p);
        bc.exact_u.push_back(u);
        bc.data.source.push_back(g);
        bc.data.force.emplace_back();
        for (int f = 0; f < kBoxFaces; ++f) {
            bc.network.components()[i].box_faces[f] = dirichlet(p);
        }
    }
    if (immersed) {
        FractureComponent& c2 = bc.network.components()[1];
        c2.trims.push_back({linear(Vec3::UnitX(), -0.75), BoundaryKind::dirichlet, -1, bc.exact_p[1]});
    }
    bc.network.validate();
    return bc;
}

BenchmarkCase case_crossing_constant(double alpha_deg, double beta_deg, double value)
{
    check_angles(alpha_deg, beta_deg);
    BenchmarkCase bc;
    bc.name = "crossing-constant";
    bc.network = crossing_network(crossing_rotation(alpha_deg, beta_deg));
    bc.levels = uniform_levels({9, 19});
    ScalarField p = [value](const Vec3&) { return value; };
    VectorField u = [](const Vec3&) { return Vec3(Vec3::Zero()); };
    for (int i = 0; i < 4; ++i) {
        bc.exact_p.push_back(p);
        bc.exact_u.push_back(u);
        bc.data.source.emplace_back();
        bc.data.force.emplace_back();
        for (int f = 0; f < kBoxFaces; ++f) {
            bc.network.components()[i].box_faces[f] = dirichlet(p);
        }
    }
    bc.network.validate();
    return bc;
}

BenchmarkCase case_plane_patch(double x0)
{
    if (!(x0 > 0.0 && x0 < 1.0)) {
        throw ConfigurationError("plane-patch: plane position must lie inside (0, 1)");
    }
    BenchmarkCase bc;
    bc.name = "plane-patch";
    bc.network = FractureNetwork(Box{Vec3::Zero(), Vec3::Ones()});
    FractureComponent comp;
    comp.name = "plane";
    comp.level_set = plane_level_set(Vec3(x0, 0.0, 0.0), Vec3::UnitX());
    ScalarField p = [](const Vec3& x) { return 1.0 + 2.0 * x[1] - x[2]; };
    for (int f = 0; f < kBoxFaces; ++f) {
        comp.box_faces[f] = dirichlet(p);
    }
    bc.network.add_component(std::move(comp));
    bc.exact_p.push_back(p);
    bc.exact_u.push_back([](const Vec3&) { return Vec3(0.0, -2.0, 1.0); });
    bc.data.source.emplace_back();
    bc.data.force.emplace_back();
    bc.levels = uniform_levels({9, 19});
    bc.network.validate();
    return bc;
}

BenchmarkCase case_sphere()
{
    constexpr double a = 12.0;
    BenchmarkCase bc;
    bc.name = "sphere";
    bc.network = FractureNetwork(Box{Vec3::Constant(-2.0), Vec3::Constant(2.0)});
    FractureComponent comp;
    comp.name = "sphere";
    comp.level_set = sphere_level_set(Vec3::Zero(), 1.0);
    bc.network.add_component(std::move(comp));

    // p is homogeneous of degree 0, so its full gradient is tangential to
    // every sphere |x| = const.
    ScalarField p = [](const Vec3& x) {
        const double r = x.norm();
        return a * (3.0 * x[0] * x[0] * x[1] - x[1] * x[1] * x[1]) / (r * r * r);
    };
    VectorField u = [](const Vec3& x) {
        const double r2 = x.squaredNorm();
        const double r = std::sqrt(r2);
        const double q = 3.0 * x[0] * x[0] * x[1] - x[1] * x[1] * x[1];
        const Vec3 dq(6.0 * x[0] * x[1], 3.0 * x[0] * x[0] - 3.0 * x[1] * x[1], 0.0);
        return Vec3(-a * (dq / (r2 * r) - 3.0 * q * x / (r2 * r2 * r)));
    };
    bc.exact_p.push_back(p);
    bc.exact_u.push_back(u);
    bc.data.source.push_back([p](const Vec3& x) { return 12.0 * p(x); });
    bc.data.force.emplace_back();
    bc.levels = graded_levels({16, 16, 16}, 4);
    bc.network.validate();
    return bc;
}

BenchmarkCase case_torus()
{
    constexpr double R = 1.0;
    constexpr double r = 0.5;
    BenchmarkCase bc;
    bc.name = "torus";
    bc.network = FractureNetwork(Box{Vec3(-1.6, -1.6, -0.8), Vec3(1.6, 1.6, 0.8)});
    FractureComponent comp;
    comp.name = "torus";
    comp.level_set.value = [](const Vec3& x) {
        const double rho = std::hypot(x[0], x[1]);
        return std::hypot(rho - R, x[2]) - r;
    };
    comp.level_set.gradient = [](const Vec3& x) {
        const double rho = std::hypot(x[0], x[1]);
        const double d = std::hypot(rho - R, x[2]);
        return Vec3(Vec3((rho - R) * x[0] / rho, (rho - R) * x[1] / rho, x[2]) / d);
    };
    bc.network.add_component(std::move(comp));

    bc.exact_p.push_back([](const Vec3& x) { return x[2]; });
    bc.exact_u.push_back([](const Vec3& x) {
        const double rho = std::hypot(x[0], x[1]);
        return Vec3(2.0 * x[0] * x[2], -2.0 * x[1] * x[2],
                    2.0 * (x[0] * x[0] - x[1] * x[1]) * (R - rho) / rho);
    });
    bc.data.force.push_back([](const Vec3& x) {
        const double rho = std::hypot(x[0], x[1]);
        const double A = R * R + x[0] * x[0] + x[1] * x[1] - 2.0 * R * rho + x[2] * x[2];
        const double s = 1.0 - R / rho;
        return Vec3(x[0] * x[2] * (2.0 - s / A), x[1] * x[2] * (-2.0 - s / A),
                    1.0 - 2.0 * (x[0] * x[0] - x[1] * x[1]) * (rho - R) / rho - x[2] * x[2] / A);
    });
    bc.data.source.emplace_back();
    bc.levels = graded_levels({10, 10, 5}, 4);
    bc.network.validate();
    return bc;
}

BenchmarkCase case_network5()
{
    // Junction line J0 at (x0, y, z0): a horizontal plane (inlet side), an
    // inclined plane and a half cylinder meet there. Junction line J1 joins
    // the cylinder's two parts and a vertical plane at x = xs.
    constexpr double x0 = -0.02;
    constexpr double z0 = -0.05;
    constexpr double rc = 0.6;
    constexpr double xc = x0 + rc;
    constexpr double xs = 0.52;

    BenchmarkCase bc;
    bc.name = "network5";
    bc.network = FractureNetwork(Box{Vec3::Constant(-1.0), Vec3::Constant(1.0)});
    FractureNetwork& net = bc.network;
    const int j0 = 0;
    const int j1 = 1;

    ScalarField cyl = [](const Vec3& x) { return std::hypot(x[0] - xc, x[2] - z0) - rc; };
    VectorField cyl_grad = [](const Vec3& x) {
        const double d = std::hypot(x[0] - xc, x[2] - z0);
        return Vec3(Vec3(x[0] - xc, 0.0, x[2] - z0) / d);
    };
    ScalarField two = [](const Vec3&) { return 2.0; };
    ScalarField zero = [](const Vec3&) { return 0.0; };
    const ScalarField below = linear(-Vec3::UnitZ(), z0);  // -(z - z0)

    FractureComponent g1;
    g1.name = "inlet-plane";
    g1.level_set = plane_level_set(Vec3(0.0, 0.0, z0), Vec3::UnitZ());
    g1.trims.push_back({linear(Vec3::UnitX(), -x0), BoundaryKind::junction, j0, {}});
    g1.box_faces[0] = dirichlet(two);

    FractureComponent g2;
    g2.name = "inclined-plane";
    g2.level_set = plane_level_set(Vec3(x0, 0.0, z0), Vec3(-0.5, 0.0, 1.0).normalized());
    g2.trims.push_back({linear(-Vec3::UnitX(), x0), BoundaryKind::junction, j0, {}});
    g2.box_faces[1] = dirichlet(zero);

    FractureComponent g3;
    g3.name = "cylinder-left";
    g3.level_set = {cyl, cyl_grad};
    g3.trims.push_back({below, BoundaryKind::junction, j0, {}});
    g3.trims.push_back({linear(Vec3::UnitX(), -xs), BoundaryKind::junction, j1, {}});

    FractureComponent g4;
    g4.name = "cylinder-right";
    g4.level_set = {cyl, cyl_grad};
    g4.trims.push_back({linear(-Vec3::UnitX(), xs), BoundaryKind::junction, j1, {}});
    g4.trims.push_back({below, BoundaryKind::neumann, -1, {}});
    g4.box_faces[1] = dirichlet(zero);

    FractureComponent g5;
    g5.name = "vertical-plane";
    g5.level_set = plane_level_set(Vec3(xs, 0.0, 0.0), Vec3::UnitX());
    g5.trims.push_back({[cyl](const Vec3& x) { return -cyl(x); }, BoundaryKind::junction, j1, {}});
    g5.trims.push_back({below, BoundaryKind::neumann, -1, {}});
    g5.box_faces[5] = dirichlet(zero);

    net.add_component(std::move(g1));
    net.add_component(std::move(g2));
    net.add_component(std::move(g3));
    net.add_component(std::move(g4));
    net.add_component(std::move(g5));
    net.add_junction({{0, 1, 2}, 0, 0});
    net.add_junction({{2, 3, 4}, 2, 1});
    for (int i = 0; i < 5; ++i) {
        bc.data.force.emplace_back();
        bc.data.source.emplace_back();
    }
    bc.levels = {{{16, 16, 16}, 2, 1.0}};
    bc.dirichlet = DirichletTreatment::penalty;
    net.validate();
    return bc;
}

std::vector<std::string> case_names()
{
    return {"crossing", "crossing-immersed", "sphere", "torus", "network5", "plane-patch", "crossing-constant"};
}

BenchmarkCase make_case(const std::string& name, const CaseParameters& params)
{
    if (name == "crossing") {
        return case_crossing(params.alpha, params.beta, false);
    }
    if (name == "crossing-immersed") {
        return case_crossing(params.alpha, params.beta, true);
    }
    if (name == "sphere") {
        return case_sphere();
    }
    if (name == "torus") {
        return case_torus();
    }
    if (name == "network5") {
        return case_network5();
    }
    if (name == "plane-patch") {
        return case_plane_patch(params.x0);
    }
    if (name == "crossing-constant") {
        return case_crossing_constant(params.alpha, params.beta, 1.0);
    }
    throw ConfigurationError("unknown case '" + name + "'");
}

}  // namespace tracefem
