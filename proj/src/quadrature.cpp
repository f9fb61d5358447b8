#include "tracefem/quadrature.hpp"

#include <cmath>

namespace tracefem {

std::array<QuadPoint, 3> triangle_rule(const Vec3& a, const Vec3& b, const Vec3& c)
{
    const double area = 0.5 * (b - a).cross(c - a).norm();
    const double w = area / 3.0;
    constexpr double lo = 1.0 / 6.0;
    constexpr double hi = 2.0 / 3.0;
    return {QuadPoint{hi * a + lo * b + lo * c, w}, QuadPoint{lo * a + hi * b + lo * c, w},
            QuadPoint{lo * a + lo * b + hi * c, w}};
}

std::array<QuadPoint, 2> segment_rule(const Vec3& a, const Vec3& b)
{
    const double len = (b - a).norm();
    const double g = 0.5 / std::sqrt(3.0);
    return {QuadPoint{(0.5 - g) * b + (0.5 + g) * a, 0.5 * len},
            QuadPoint{(0.5 + g) * b + (0.5 - g) * a, 0.5 * len}};
}

std::array<QuadPoint, 8> box_rule(const Box& box)
{
    const double g = 0.5 / std::sqrt(3.0);
    const double t[2] = {0.5 - g, 0.5 + g};
    const Vec3 ext = box.extent();
    const double w = box.volume() / 8.0;
    std::array<QuadPoint, 8> out;
    for (int q = 0; q < 8; ++q) {
        out[q].x = box.lo + Vec3(t[q & 1] * ext[0], t[(q >> 1) & 1] * ext[1], t[(q >> 2) & 1] * ext[2]);
        out[q].w = w;
    }
    return out;
}

}  // namespace tracefem
