#pragma once

#include "tracefem/common.hpp"

#include <array>

namespace tracefem {

struct QuadPoint {
    Vec3 x;
    double w = 0.0;
};

/// Three-point rule, exact for total degree <= 2. Degenerate input gets
/// zero weights.
[[nodiscard]] std::array<QuadPoint, 3> triangle_rule(const Vec3& a, const Vec3& b, const Vec3& c);

/// Two-point Gauss rule, exact for degree <= 3.
[[nodiscard]] std::array<QuadPoint, 2> segment_rule(const Vec3& a, const Vec3& b);

/// Tensor 2x2x2 Gauss rule over an axis-aligned box.
[[nodiscard]] std::array<QuadPoint, 8> box_rule(const Box& box);

}  // namespace tracefem
