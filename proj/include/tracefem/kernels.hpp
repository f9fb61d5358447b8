#pragma once

// Element-level arithmetic kernels for the trilinear (Q1) hexahedral basis.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The variant is chosen once at runtime from the CPU
// feature bits; `set_isa` overrides the choice (tests, reproducibility runs).
//
// Corner numbering is a = bx + 2*by + 4*bz, where (bx, by, bz) in {0,1}^3 is
// the corner position in the unit reference cube.

#include <cstddef>
#include <span>
#include <string_view>

namespace tracefem::kernels {

inline constexpr int kCorners = 8;

enum class Isa { scalar, avx2 };

[[nodiscard]] std::string_view to_string(Isa isa);

/// Best instruction set supported by both the build and the running CPU.
[[nodiscard]] Isa detect_isa();

/// Instruction set currently used by the dispatched entry points.
[[nodiscard]] Isa active_isa();

/// Selects the kernel variant. Throws PreconditionError if `isa` is not
/// supported here.
void set_isa(Isa isa);

/// Trilinear basis at reference points.
///
/// `ref` holds Q points as xyz triples in [0,1]^3. Writes values[q*8 + a] and
/// physical gradients dx/dy/dz[q*8 + a] for a cell of edge length 1/inv_h.
void trilinear_basis(std::span<const double> ref, double inv_h, double* values, double* dx,
                     double* dy, double* dz);

/// out[a*8 + b] += sum_q w[q] * lhs[q*8 + a] * rhs[q*8 + b]
void weighted_gram(std::span<const double> w, const double* lhs, const double* rhs, double* out);

namespace scalar {
void trilinear_basis(std::span<const double> ref, double inv_h, double* values, double* dx,
                     double* dy, double* dz);
void weighted_gram(std::span<const double> w, const double* lhs, const double* rhs, double* out);
}  // namespace scalar

namespace avx2 {
/// True when the AVX2 variant was compiled into this build.
[[nodiscard]] bool compiled();
void trilinear_basis(std::span<const double> ref, double inv_h, double* values, double* dx,
                     double* dy, double* dz);
void weighted_gram(std::span<const double> w, const double* lhs, const double* rhs, double* out);
}  // namespace avx2

}  // namespace tracefem::kernels
