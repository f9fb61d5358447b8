#include "tracefem/assembly.hpp"

#include "tracefem/kernels.hpp"
#include "tracefem/quadrature.hpp"

#include <unsupported/Eigen/SparseExtra>

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

namespace tracefem {

void FormParameters::validate() const
{
    if (!(rho_e > 0.0 && rho_u > 0.0 && rho_p > 0.0 && rho_dir > 0.0)) {
        throw ConfigurationError("form parameters: all penalty and stabilization weights must be positive");
    }
}

namespace {

using Triplet = Eigen::Triplet<double, int>;

double global_cut_size(const Discretization& disc)
{
    double h = std::numeric_limits<double>::infinity();
    for (const ComponentSpace& cs : disc.space.components) {
        for (int c : cs.active_cells) {
            h = std::min(h, disc.mesh.cell_size(c));
        }
    }
    return h;
}

class PenaltyLength {
public:
    PenaltyLength(const Discretization& disc, const FormParameters& params)
        : disc_(disc), global_(params.penalty_h == PenaltyScale::global), h_(global_ ? global_cut_size(disc) : 0.0)
    {
    }
    double operator()(int cell) const { return global_ ? h_ : disc_.mesh.cell_size(cell); }

private:
    const Discretization& disc_;
    bool global_;
    double h_;
};

// Surface quadrature points of one cell patch.
struct PatchPoints {
    std::vector<double> ref;  // xyz triples in [0,1]^3
    std::vector<double> w;
    std::vector<Vec3> x;
};

void gather_patch(const CellPatch& patch, const Box& box, PatchPoints& out)
{
    out.ref.clear();
    out.w.clear();
    out.x.clear();
    const Vec3 ext = box.extent();
    for (const Triangle& t : patch.triangles) {
        for (const QuadPoint& q : triangle_rule(t.v[0], t.v[1], t.v[2])) {
            out.x.push_back(q.x);
            out.w.push_back(q.w);
            for (int a = 0; a < 3; ++a) {
                out.ref.push_back((q.x[a] - box.lo[a]) / ext[a]);
            }
        }
    }
}

struct BasisTable {
    std::vector<double> v, dx, dy, dz;

    void compute(const std::vector<double>& ref, double h)
    {
        const std::size_t n = ref.size() / 3 * 8;
        v.resize(n);
        dx.resize(n);
        dy.resize(n);
        dz.resize(n);
        kernels::trilinear_basis(ref, 1.0 / h, v.data(), dx.data(), dy.data(), dz.data());
    }
    [[nodiscard]] const double* grad(int c) const { return c == 0 ? dx.data() : (c == 1 ? dy.data() : dz.data()); }
};

struct LocalSystem {
    std::array<std::array<std::array<double, 64>, kFields>, kFields> block{};
    std::array<std::array<bool, kFields>, kFields> used{};
    std::array<std::array<double, 8>, kFields> rhs{};

    void clear()
    {
        for (auto& row : block) {
            for (auto& b : row) {
                b.fill(0.0);
            }
        }
        for (auto& row : used) {
            row.fill(false);
        }
        for (auto& r : rhs) {
            r.fill(0.0);
        }
    }
};

std::array<double, 8> basis_at(const Box& box, const Vec3& x)
{
    const Vec3 ext = box.extent();
    const std::array<double, 3> ref = {(x[0] - box.lo[0]) / ext[0], (x[1] - box.lo[1]) / ext[1],
                                       (x[2] - box.lo[2]) / ext[2]};
    std::array<double, 8> v{}, dx{}, dy{}, dz{};
    kernels::trilinear_basis(ref, 1.0 / ext[0], v.data(), dx.data(), dy.data(), dz.data());
    return v;
}

void scatter(const LocalSystem& local, const std::vector<CornerDof>& dofs, std::vector<Triplet>& triplets,
             Eigen::VectorXd& rhs)
{
    for (int f = 0; f < kFields; ++f) {
        for (int g = 0; g < kFields; ++g) {
            if (!local.used[f][g]) {
                continue;
            }
            const auto& b = local.block[f][g];
            for (const CornerDof& ea : dofs) {
                const int row = ProductSpace::unknown(ea.dof, f);
                for (const CornerDof& eb : dofs) {
                    const double val = ea.weight * eb.weight * b[ea.corner * 8 + eb.corner];
                    if (val != 0.0) {
                        triplets.emplace_back(row, ProductSpace::unknown(eb.dof, g), val);
                    }
                }
            }
        }
    }
    for (const CornerDof& ea : dofs) {
        for (int f = 0; f < kFields; ++f) {
            rhs[ProductSpace::unknown(ea.dof, f)] += ea.weight * local.rhs[f][ea.corner];
        }
    }
}

// Pressure-pressure coupling kappa * phi_a(k) phi_b(l) between two (possibly
// equal) component expansions.
void add_pressure_coupling(double kappa, const std::array<double, 8>& va, const std::vector<CornerDof>& ea,
                           const std::array<double, 8>& vb, const std::vector<CornerDof>& eb,
                           std::vector<Triplet>& triplets)
{
    for (const CornerDof& a : ea) {
        for (const CornerDof& b : eb) {
            const double val = kappa * a.weight * b.weight * va[a.corner] * vb[b.corner];
            if (val != 0.0) {
                triplets.emplace_back(ProductSpace::unknown(a.dof, kPressure), ProductSpace::unknown(b.dof, kPressure),
                                      val);
            }
        }
    }
}

std::unordered_map<int, const CellPatch*> patch_lookup(const ComponentGeometry& cg)
{
    std::unordered_map<int, const CellPatch*> out;
    out.reserve(cg.patches.size());
    for (const CellPatch& p : cg.patches) {
        out.emplace(p.cell, &p);
    }
    return out;
}

// Reference coordinates of the 2x2x2 Gauss points.
const std::vector<double>& gauss_ref()
{
    static const std::vector<double> ref = [] {
        const double g = 0.5 / std::sqrt(3.0);
        const double t[2] = {0.5 - g, 0.5 + g};
        std::vector<double> out;
        for (int q = 0; q < 8; ++q) {
            out.push_back(t[q & 1]);
            out.push_back(t[(q >> 1) & 1]);
            out.push_back(t[(q >> 2) & 1]);
        }
        return out;
    }();
    return ref;
}

Vec3 gauss_point(const Box& box, int q)
{
    const auto& ref = gauss_ref();
    return box.lo + Vec3(ref[3 * q], ref[3 * q + 1], ref[3 * q + 2]).cwiseProduct(box.extent());
}

}  // namespace

double penalty_length(const Discretization& disc, const FormParameters& params, int cell)
{
    return PenaltyLength(disc, params)(cell);
}

LinearSystem assemble(const Discretization& disc, const FlowData& data, const FormParameters& params)
{
    params.validate();
    const FractureNetwork& network = disc.network;
    const OctreeMesh& mesh = disc.mesh;
    const ProductSpace& space = disc.space;
    const int n = space.num_unknowns();
    const PenaltyLength hpen(disc, params);

    std::vector<Triplet> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    PatchPoints pts;
    BasisTable surf;
    BasisTable vol;
    std::vector<double> dn(64);
    std::vector<double> wq;
    LocalSystem local;
    std::array<double, 64> tmp{};

    for (int ci = 0; ci < static_cast<int>(network.size()); ++ci) {
        const FractureComponent& comp = network.components()[ci];
        const ComponentGeometry& cg = disc.geometry.components[ci];
        if (!(cg.area() > 0.0)) {
            throw ConfigurationError("assembly: component " + std::to_string(comp.id) + " has no surface measure");
        }
        const Mat3& K = comp.permeability;
        const Mat3 Kinv = K.inverse();
        const VectorField force = ci < static_cast<int>(data.force.size()) ? data.force[ci] : VectorField{};
        const ScalarField source = ci < static_cast<int>(data.source.size()) ? data.source[ci] : ScalarField{};
        const auto patches = patch_lookup(cg);

        for (int c : space.components[ci].active_cells) {
            local.clear();
            const Box box = mesh.cell_box(c);
            const double h = mesh.cell_size(c);

            auto it = patches.find(c);
            if (it != patches.end()) {
                gather_patch(*it->second, box, pts);
                surf.compute(pts.ref, h);
                const std::span<const double> w(pts.w);

                tmp.fill(0.0);
                kernels::weighted_gram(w, surf.v.data(), surf.v.data(), tmp.data());
                for (int f = 0; f < 3; ++f) {
                    for (int g = 0; g < 3; ++g) {
                        if (Kinv(f, g) == 0.0) {
                            continue;
                        }
                        for (int k = 0; k < 64; ++k) {
                            local.block[f][g][k] += Kinv(f, g) * tmp[k];
                        }
                        local.used[f][g] = true;
                    }
                }
                for (int f = 0; f < 3; ++f) {
                    tmp.fill(0.0);
                    kernels::weighted_gram(w, surf.v.data(), surf.grad(f), tmp.data());
                    for (int a = 0; a < 8; ++a) {
                        for (int b = 0; b < 8; ++b) {
                            local.block[f][kPressure][a * 8 + b] += tmp[a * 8 + b];
                            local.block[kPressure][f][b * 8 + a] -= tmp[a * 8 + b];
                        }
                    }
                    local.used[f][kPressure] = true;
                    local.used[kPressure][f] = true;
                }
                for (int f = 0; f < 3; ++f) {
                    for (int g = 0; g < 3; ++g) {
                        if (K(f, g) == 0.0) {
                            continue;
                        }
                        tmp.fill(0.0);
                        kernels::weighted_gram(w, surf.grad(f), surf.grad(g), tmp.data());
                        for (int k = 0; k < 64; ++k) {
                            local.block[kPressure][kPressure][k] += K(f, g) * tmp[k];
                        }
                    }
                }
                local.used[kPressure][kPressure] = true;

                if (force || source) {
                    for (std::size_t q = 0; q < pts.x.size(); ++q) {
                        const double* v = surf.v.data() + q * 8;
                        if (source) {
                            const double gq = 2.0 * source(pts.x[q]) * pts.w[q];
                            for (int a = 0; a < 8; ++a) {
                                local.rhs[kPressure][a] += gq * v[a];
                            }
                        }
                        if (force) {
                            const Vec3 fq = force(pts.x[q]) * pts.w[q];
                            const Vec3 kf = K * fq;
                            for (int a = 0; a < 8; ++a) {
                                for (int f = 0; f < 3; ++f) {
                                    local.rhs[f][a] += fq[f] * v[a];
                                }
                                local.rhs[kPressure][a] += kf[0] * surf.dx[q * 8 + a] + kf[1] * surf.dy[q * 8 + a] +
                                                           kf[2] * surf.dz[q * 8 + a];
                            }
                        }
                    }
                }
            }

            // Normal-derivative stabilization over the whole cell.
            vol.compute(gauss_ref(), h);
            wq.assign(8, box.volume() / 8.0);
            for (int q = 0; q < 8; ++q) {
                const Vec3 nq = extended_normal(comp, mesh, cg.phi, c, gauss_point(box, q));
                for (int a = 0; a < 8; ++a) {
                    dn[q * 8 + a] = nq[0] * vol.dx[q * 8 + a] + nq[1] * vol.dy[q * 8 + a] + nq[2] * vol.dz[q * 8 + a];
                }
            }
            tmp.fill(0.0);
            kernels::weighted_gram(wq, dn.data(), dn.data(), tmp.data());
            for (int f = 0; f < kFields; ++f) {
                const double rho = (f == kPressure ? params.rho_p : params.rho_u) * h;
                for (int k = 0; k < 64; ++k) {
                    local.block[f][f][k] += rho * tmp[k];
                }
                local.used[f][f] = true;
            }

            scatter(local, space.expand(mesh, ci, c), triplets, rhs);
        }

        // Boundary curves of this component.
        auto dirichlet_penalty = [&](const std::vector<CurveSegment>& segments, const ScalarField& data) {
            for (const CurveSegment& s : segments) {
                const Box box = mesh.cell_box(s.cell);
                const auto dofs = space.expand(mesh, ci, s.cell);
                const double hs = hpen(s.cell);
                for (const QuadPoint& q : segment_rule(s.a, s.b)) {
                    const double kappa = params.rho_dir / (hs * hs) * q.w;
                    const auto v = basis_at(box, q.x);
                    add_pressure_coupling(kappa, v, dofs, v, dofs, triplets);
                    const double pd = data(q.x);
                    for (const CornerDof& e : dofs) {
                        rhs[ProductSpace::unknown(e.dof, kPressure)] += kappa * pd * e.weight * v[e.corner];
                    }
                }
            }
        };
        auto neumann_flux = [&](const std::vector<CurveSegment>& segments, const ScalarField& data) {
            for (const CurveSegment& s : segments) {
                const Box box = mesh.cell_box(s.cell);
                const auto dofs = space.expand(mesh, ci, s.cell);
                for (const QuadPoint& q : segment_rule(s.a, s.b)) {
                    const auto v = basis_at(box, q.x);
                    const double psi = data(q.x) * q.w;
                    for (const CornerDof& e : dofs) {
                        rhs[ProductSpace::unknown(e.dof, kPressure)] -= 2.0 * psi * e.weight * v[e.corner];
                    }
                }
            }
        };
        for (std::size_t k = 0; k < comp.trims.size(); ++k) {
            const TrimConstraint& trim = comp.trims[k];
            const auto& segments = cg.trim_curves[k].segments;
            if (trim.kind == BoundaryKind::dirichlet) {
                if (segments.empty()) {
                    throw ConfigurationError("assembly: internal Dirichlet trim of component " +
                                             std::to_string(comp.id) + " produces no boundary curve");
                }
                if (!trim.data) {
                    throw ConfigurationError("assembly: internal Dirichlet trim of component " +
                                             std::to_string(comp.id) + " has no pressure data");
                }
                dirichlet_penalty(segments, trim.data);
            } else if (trim.kind == BoundaryKind::neumann && trim.data) {
                neumann_flux(segments, trim.data);
            }
        }
        for (int f = 0; f < kBoxFaces; ++f) {
            const FaceCondition& fc = comp.box_faces[f];
            const auto& segments = cg.box_curves[f].segments;
            if (fc.kind == BoundaryKind::neumann && fc.data) {
                neumann_flux(segments, fc.data);
            } else if (fc.kind == BoundaryKind::dirichlet && params.dirichlet == DirichletTreatment::penalty &&
                       !segments.empty()) {
                if (!fc.data) {
                    throw ConfigurationError("assembly: Dirichlet face of component " + std::to_string(comp.id) +
                                             " has no pressure data");
                }
                dirichlet_penalty(segments, fc.data);
            }
        }
    }

    // Junction over-penalty.
    for (std::size_t e = 0; e < network.junctions().size(); ++e) {
        const Junction& j = network.junctions()[e];
        const std::size_t m = j.members.size();
        for (const CurveSegment& s : disc.geometry.junctions[e].segments) {
            const Box box = mesh.cell_box(s.cell);
            const double hs = hpen(s.cell);
            std::vector<std::vector<CornerDof>> dofs(m);
            for (std::size_t k = 0; k < m; ++k) {
                dofs[k] = space.expand(mesh, j.members[k], s.cell);
            }
            for (const QuadPoint& q : segment_rule(s.a, s.b)) {
                const double kappa = params.rho_e / (hs * hs) * q.w;
                const auto v = basis_at(box, q.x);
                for (std::size_t k = 0; k < m; ++k) {
                    for (std::size_t l = k + 1; l < m; ++l) {
                        add_pressure_coupling(kappa, v, dofs[k], v, dofs[k], triplets);
                        add_pressure_coupling(kappa, v, dofs[l], v, dofs[l], triplets);
                        add_pressure_coupling(-kappa, v, dofs[k], v, dofs[l], triplets);
                        add_pressure_coupling(-kappa, v, dofs[l], v, dofs[k], triplets);
                    }
                }
            }
        }
    }

    LinearSystem sys;
    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.matrix.makeCompressed();
    triplets.clear();
    triplets.shrink_to_fit();
    sys.rhs = std::move(rhs);

    sys.essential.assign(n, 0);
    sys.essential_values = Eigen::VectorXd::Zero(n);
    for (int d = 0; d < space.num_scalar_dofs(); ++d) {
        if (space.essential[d]) {
            const int u = ProductSpace::unknown(d, kPressure);
            sys.essential[u] = 1;
            sys.essential_values[u] = space.essential_value[d];
        }
    }
    std::vector<int> reduced_index(n, -1);
    for (int u = 0; u < n; ++u) {
        if (!sys.essential[u]) {
            reduced_index[u] = static_cast<int>(sys.free_unknowns.size());
            sys.free_unknowns.push_back(u);
        }
    }
    const int nr = static_cast<int>(sys.free_unknowns.size());
    sys.reduced_rhs.resize(nr);
    for (int r = 0; r < nr; ++r) {
        sys.reduced_rhs[r] = sys.rhs[sys.free_unknowns[r]];
    }
    std::vector<Triplet> reduced;
    reduced.reserve(static_cast<std::size_t>(sys.matrix.nonZeros()));
    for (int col = 0; col < n; ++col) {
        for (SparseMatrix::InnerIterator it(sys.matrix, col); it; ++it) {
            const int row = reduced_index[it.row()];
            if (row < 0) {
                continue;
            }
            if (sys.essential[col]) {
                sys.reduced_rhs[row] -= it.value() * sys.essential_values[col];
            } else {
                reduced.emplace_back(row, reduced_index[col], it.value());
            }
        }
    }
    sys.reduced_matrix.resize(nr, nr);
    sys.reduced_matrix.setFromTriplets(reduced.begin(), reduced.end());
    sys.reduced_matrix.makeCompressed();
    return sys;
}

Eigen::VectorXd LinearSystem::expand(const Eigen::VectorXd& reduced) const
{
    Eigen::VectorXd full = essential_values;
    for (std::size_t r = 0; r < free_unknowns.size(); ++r) {
        full[free_unknowns[r]] = reduced[static_cast<Eigen::Index>(r)];
    }
    return full;
}

double bilinear_form(const LinearSystem& system, const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    return y.dot(system.matrix * x);
}

double energy_norm_squared(const Discretization& disc, const FormParameters& params, const Eigen::VectorXd& x)
{
    const FractureNetwork& network = disc.network;
    const OctreeMesh& mesh = disc.mesh;
    const PenaltyLength hpen(disc, params);
    double total = 0.0;

    for (int ci = 0; ci < static_cast<int>(network.size()); ++ci) {
        const FractureComponent& comp = network.components()[ci];
        const ComponentGeometry& cg = disc.geometry.components[ci];
        const Mat3& K = comp.permeability;
        const Mat3 Kinv = K.inverse();
        const auto patches = patch_lookup(cg);
        for (int c : disc.space.components[ci].active_cells) {
            const Box box = mesh.cell_box(c);
            const double h = mesh.cell_size(c);
            auto it = patches.find(c);
            if (it != patches.end()) {
                for (const Triangle& t : it->second->triangles) {
                    for (const QuadPoint& q : triangle_rule(t.v[0], t.v[1], t.v[2])) {
                        const TraceValue tv = evaluate(disc, x, ci, c, q.x);
                        total += q.w * (tv.u.dot(Kinv * tv.u) + tv.grad_p.dot(K * tv.grad_p));
                    }
                }
            }
            for (const QuadPoint& q : box_rule(box)) {
                const TraceValue tv = evaluate(disc, x, ci, c, q.x);
                const Vec3 nq = extended_normal(comp, mesh, cg.phi, c, q.x);
                const Vec3 du = tv.grad_u * nq;
                const double dp = tv.grad_p.dot(nq);
                total += q.w * h * (params.rho_u * du.squaredNorm() + params.rho_p * dp * dp);
            }
        }
        auto dirichlet_term = [&](const std::vector<CurveSegment>& segments) {
            for (const CurveSegment& s : segments) {
                const double hs = hpen(s.cell);
                for (const QuadPoint& q : segment_rule(s.a, s.b)) {
                    const double p = evaluate(disc, x, ci, s.cell, q.x).p;
                    total += params.rho_dir / (hs * hs) * q.w * p * p;
                }
            }
        };
        for (std::size_t k = 0; k < comp.trims.size(); ++k) {
            if (comp.trims[k].kind == BoundaryKind::dirichlet) {
                dirichlet_term(cg.trim_curves[k].segments);
            }
        }
        if (params.dirichlet == DirichletTreatment::penalty) {
            for (int f = 0; f < kBoxFaces; ++f) {
                if (comp.box_faces[f].kind == BoundaryKind::dirichlet) {
                    dirichlet_term(cg.box_curves[f].segments);
                }
            }
        }
    }
    for (std::size_t e = 0; e < network.junctions().size(); ++e) {
        const Junction& j = network.junctions()[e];
        for (const CurveSegment& s : disc.geometry.junctions[e].segments) {
            const double hs = hpen(s.cell);
            for (const QuadPoint& q : segment_rule(s.a, s.b)) {
                std::vector<double> p;
                for (int m : j.members) {
                    p.push_back(evaluate(disc, x, m, s.cell, q.x).p);
                }
                for (std::size_t k = 0; k < p.size(); ++k) {
                    for (std::size_t l = k + 1; l < p.size(); ++l) {
                        total += params.rho_e / (hs * hs) * q.w * (p[k] - p[l]) * (p[k] - p[l]);
                    }
                }
            }
        }
    }
    return total;
}

void write_matrix_market(const LinearSystem& system, const std::string& matrix_path, const std::string& rhs_path)
{
    if (!Eigen::saveMarket(system.reduced_matrix, matrix_path)) {
        throw Error("cannot write matrix to " + matrix_path);
    }
    if (!Eigen::saveMarketVector(system.reduced_rhs, rhs_path)) {
        throw Error("cannot write vector to " + rhs_path);
    }
}

}  // namespace tracefem
