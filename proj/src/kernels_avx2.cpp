// AVX2/FMA variants of the Q1 element kernels. This file is compiled with
// -mavx2 -mfma; nothing here may run before the dispatcher checked the CPU.

#include "tracefem/kernels.hpp"

#if defined(TRACEFEM_BUILD_AVX2)
#include <immintrin.h>
#endif

namespace tracefem::kernels::avx2 {

#if defined(TRACEFEM_BUILD_AVX2)

bool compiled() { return true; }

// Lanes 0..3 hold corners a = 0..3 (bz = 0), lanes 4..7 are the bz = 1 half.
void trilinear_basis(std::span<const double> ref, double inv_h, double* values, double* dx,
                     double* dy, double* dz)
{
    const std::size_t nq = ref.size() / 3;
    // x pattern over a = 0..3: (1-x, x, 1-x, x); y pattern: (1-y, 1-y, y, y).
    // Built as c + s*t, which rounds exactly like the scalar 1 - t.
    const __m256d cx = _mm256_set_pd(0.0, 1.0, 0.0, 1.0);
    const __m256d kx = _mm256_set_pd(1.0, -1.0, 1.0, -1.0);
    const __m256d cy = _mm256_set_pd(0.0, 0.0, 1.0, 1.0);
    const __m256d ky = _mm256_set_pd(1.0, 1.0, -1.0, -1.0);
    const __m256d sx = _mm256_set_pd(inv_h, -inv_h, inv_h, -inv_h);
    const __m256d sy = _mm256_set_pd(inv_h, inv_h, -inv_h, -inv_h);
    const __m256d sz_lo = _mm256_set1_pd(-inv_h);
    const __m256d sz_hi = _mm256_set1_pd(inv_h);

    for (std::size_t q = 0; q < nq; ++q) {
        const __m256d x = _mm256_set1_pd(ref[3 * q]);
        const __m256d y = _mm256_set1_pd(ref[3 * q + 1]);
        const double zs = ref[3 * q + 2];
        const __m256d z_lo = _mm256_set1_pd(1.0 - zs);
        const __m256d z_hi = _mm256_set1_pd(zs);

        const __m256d lx = _mm256_add_pd(cx, _mm256_mul_pd(kx, x));
        const __m256d ly = _mm256_add_pd(cy, _mm256_mul_pd(ky, y));
        const __m256d lxy = _mm256_mul_pd(lx, ly);

        double* v = values + q * 8;
        _mm256_storeu_pd(v, _mm256_mul_pd(lxy, z_lo));
        _mm256_storeu_pd(v + 4, _mm256_mul_pd(lxy, z_hi));

        const __m256d gx = _mm256_mul_pd(sx, ly);
        _mm256_storeu_pd(dx + q * 8, _mm256_mul_pd(gx, z_lo));
        _mm256_storeu_pd(dx + q * 8 + 4, _mm256_mul_pd(gx, z_hi));

        const __m256d gy = _mm256_mul_pd(lx, sy);
        _mm256_storeu_pd(dy + q * 8, _mm256_mul_pd(gy, z_lo));
        _mm256_storeu_pd(dy + q * 8 + 4, _mm256_mul_pd(gy, z_hi));

        _mm256_storeu_pd(dz + q * 8, _mm256_mul_pd(lxy, sz_lo));
        _mm256_storeu_pd(dz + q * 8 + 4, _mm256_mul_pd(lxy, sz_hi));
    }
}

void weighted_gram(std::span<const double> w, const double* lhs, const double* rhs, double* out)
{
    __m256d acc[16];
    for (int a = 0; a < 8; ++a) {
        acc[2 * a] = _mm256_loadu_pd(out + a * 8);
        acc[2 * a + 1] = _mm256_loadu_pd(out + a * 8 + 4);
    }
    for (std::size_t q = 0; q < w.size(); ++q) {
        const __m256d r_lo = _mm256_loadu_pd(rhs + q * 8);
        const __m256d r_hi = _mm256_loadu_pd(rhs + q * 8 + 4);
        const double* l = lhs + q * 8;
        for (int a = 0; a < 8; ++a) {
            const __m256d wl = _mm256_set1_pd(w[q] * l[a]);
            acc[2 * a] = _mm256_fmadd_pd(wl, r_lo, acc[2 * a]);
            acc[2 * a + 1] = _mm256_fmadd_pd(wl, r_hi, acc[2 * a + 1]);
        }
    }
    for (int a = 0; a < 8; ++a) {
        _mm256_storeu_pd(out + a * 8, acc[2 * a]);
        _mm256_storeu_pd(out + a * 8 + 4, acc[2 * a + 1]);
    }
}

#else

bool compiled() { return false; }

void trilinear_basis(std::span<const double> ref, double inv_h, double* values, double* dx,
                     double* dy, double* dz)
{
    scalar::trilinear_basis(ref, inv_h, values, dx, dy, dz);
}

void weighted_gram(std::span<const double> w, const double* lhs, const double* rhs, double* out)
{
    scalar::weighted_gram(w, lhs, rhs, out);
}

#endif

}  // namespace tracefem::kernels::avx2
