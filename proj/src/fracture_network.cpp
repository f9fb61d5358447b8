#include "tracefem/fracture_network.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>

namespace tracefem {

std::string to_string(BoundaryKind kind)
{
    switch (kind) {
    case BoundaryKind::junction:
        return "junction";
    case BoundaryKind::dirichlet:
        return "dirichlet";
    case BoundaryKind::neumann:
        return "neumann";
    }
    return "unknown";
}

int FractureNetwork::add_component(FractureComponent component)
{
    if (component.id == 0) {
        component.id = static_cast<int>(components_.size()) + 1;
    }
    components_.push_back(std::move(component));
    return static_cast<int>(components_.size()) - 1;
}

int FractureNetwork::add_junction(Junction junction)
{
    junctions_.push_back(std::move(junction));
    return static_cast<int>(junctions_.size()) - 1;
}

void FractureNetwork::validate() const
{
    if (components_.empty()) {
        throw ConfigurationError("network: no fracture components");
    }
    for (const FractureComponent& c : components_) {
        const std::string who = "network: component " + std::to_string(c.id);
        if (!c.level_set.value) {
            throw ConfigurationError(who + " has no level-set function");
        }
        const Mat3& k = c.permeability;
        if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * k.cwiseAbs().maxCoeff()) {
            throw ConfigurationError(who + " has a non-symmetric permeability");
        }
        Eigen::SelfAdjointEigenSolver<Mat3> eig(k);
        if (eig.eigenvalues().minCoeff() <= 0.0) {
            throw ConfigurationError(who + " has a permeability that is not positive definite");
        }
        for (const TrimConstraint& t : c.trims) {
            if (!t.function) {
                throw ConfigurationError(who + " has a trim without a function");
            }
            if (t.kind == BoundaryKind::junction &&
                (t.junction < 0 || t.junction >= static_cast<int>(junctions_.size()))) {
                throw ConfigurationError(who + " refers to an unknown junction");
            }
        }
        for (const FaceCondition& f : c.box_faces) {
            if (f.kind == BoundaryKind::junction) {
                throw ConfigurationError(who + " tags a box face as a junction");
            }
        }
    }
    for (std::size_t e = 0; e < junctions_.size(); ++e) {
        const Junction& j = junctions_[e];
        const std::string who = "network: junction " + std::to_string(e);
        if (j.members.size() < 2) {
            throw ConfigurationError(who + " has fewer than two members");
        }
        for (int m : j.members) {
            if (m < 0 || m >= static_cast<int>(components_.size())) {
                throw ConfigurationError(who + " has an invalid member");
            }
        }
        if (std::find(j.members.begin(), j.members.end(), j.host) == j.members.end()) {
            throw ConfigurationError(who + " host is not a member");
        }
        const auto& trims = components_[j.host].trims;
        if (j.host_trim < 0 || j.host_trim >= static_cast<int>(trims.size()) ||
            trims[j.host_trim].kind != BoundaryKind::junction ||
            trims[j.host_trim].junction != static_cast<int>(e)) {
            throw ConfigurationError(who + " host trim does not describe this junction");
        }
    }
}

std::vector<std::vector<int>> FractureNetwork::connected_groups() const
{
    std::vector<int> parent(components_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const Junction& j : junctions_) {
        for (std::size_t k = 1; k < j.members.size(); ++k) {
            const int a = find(j.members[0]);
            const int b = find(j.members[k]);
            if (a != b) {
                parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    std::vector<std::vector<int>> groups;
    std::vector<int> slot(components_.size(), -1);
    for (int i = 0; i < static_cast<int>(components_.size()); ++i) {
        const int r = find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[slot[r]].push_back(i);
    }
    return groups;
}

LevelSetField plane_level_set(const Vec3& point, const Vec3& normal)
{
    const Vec3 n = normal.normalized();
    return {[point, n](const Vec3& x) { return n.dot(x - point); }, [n](const Vec3&) { return n; }};
}

LevelSetField sphere_level_set(const Vec3& center, double radius)
{
    return {[center, radius](const Vec3& x) { return (x - center).norm() - radius; },
            [center](const Vec3& x) { return Vec3((x - center).normalized()); }};
}

double evaluate_or_zero(const ScalarField& f, const Vec3& x) { return f ? f(x) : 0.0; }

}  // namespace tracefem
