#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace tracefem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or inconsistent geometric input (level-set evaluation, degenerate cuts).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// The problem setup is incomplete or contradicts itself.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

struct Box {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Ones();

    [[nodiscard]] Vec3 extent() const { return hi - lo; }
    [[nodiscard]] double volume() const { return extent().prod(); }
    [[nodiscard]] bool contains(const Vec3& x, double tol = 0.0) const
    {
        return (x.array() >= lo.array() - tol).all() && (x.array() <= hi.array() + tol).all();
    }
};

}  // namespace tracefem
