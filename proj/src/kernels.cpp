#include "tracefem/kernels.hpp"

#include "tracefem/common.hpp"

#include <atomic>
#include <string>

namespace tracefem::kernels {

namespace scalar {

void trilinear_basis(std::span<const double> ref, double inv_h, double* values, double* dx,
                     double* dy, double* dz)
{
    const std::size_t nq = ref.size() / 3;
    for (std::size_t q = 0; q < nq; ++q) {
        const double x = ref[3 * q];
        const double y = ref[3 * q + 1];
        const double z = ref[3 * q + 2];
        const double lx[2] = {1.0 - x, x};
        const double ly[2] = {1.0 - y, y};
        const double lz[2] = {1.0 - z, z};
        const double sgn[2] = {-inv_h, inv_h};
        for (int a = 0; a < kCorners; ++a) {
            const int bx = a & 1;
            const int by = (a >> 1) & 1;
            const int bz = (a >> 2) & 1;
            values[q * 8 + a] = lx[bx] * ly[by] * lz[bz];
            dx[q * 8 + a] = sgn[bx] * ly[by] * lz[bz];
            dy[q * 8 + a] = lx[bx] * sgn[by] * lz[bz];
            dz[q * 8 + a] = lx[bx] * ly[by] * sgn[bz];
        }
    }
}

void weighted_gram(std::span<const double> w, const double* lhs, const double* rhs, double* out)
{
    for (std::size_t q = 0; q < w.size(); ++q) {
        const double* l = lhs + q * 8;
        const double* r = rhs + q * 8;
        for (int a = 0; a < kCorners; ++a) {
            const double wl = w[q] * l[a];
            for (int b = 0; b < kCorners; ++b) {
                out[a * 8 + b] += wl * r[b];
            }
        }
    }
}

}  // namespace scalar

namespace {

bool cpu_has_avx2()
{
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<int>& isa_slot()
{
    static std::atomic<int> slot{static_cast<int>(detect_isa())};
    return slot;
}

}  // namespace

std::string_view to_string(Isa isa)
{
    switch (isa) {
    case Isa::scalar:
        return "scalar";
    case Isa::avx2:
        return "avx2";
    }
    return "unknown";
}

Isa detect_isa()
{
    if (avx2::compiled() && cpu_has_avx2()) {
        return Isa::avx2;
    }
    return Isa::scalar;
}

Isa active_isa() { return static_cast<Isa>(isa_slot().load(std::memory_order_relaxed)); }

void set_isa(Isa isa)
{
    if (isa == Isa::avx2 && !(avx2::compiled() && cpu_has_avx2())) {
        throw PreconditionError("kernels: AVX2/FMA variant is not available on this build or CPU");
    }
    isa_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

void trilinear_basis(std::span<const double> ref, double inv_h, double* values, double* dx,
                     double* dy, double* dz)
{
    if (active_isa() == Isa::avx2) {
        avx2::trilinear_basis(ref, inv_h, values, dx, dy, dz);
    } else {
        scalar::trilinear_basis(ref, inv_h, values, dx, dy, dz);
    }
}

void weighted_gram(std::span<const double> w, const double* lhs, const double* rhs, double* out)
{
    if (active_isa() == Isa::avx2) {
        avx2::weighted_gram(w, lhs, rhs, out);
    } else {
        scalar::weighted_gram(w, lhs, rhs, out);
    }
}

}  // namespace tracefem::kernels
