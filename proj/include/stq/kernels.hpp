#pragma once

// Runtime-dispatched inner-loop kernels. The scalar variants are the
// reference semantics; the AVX2 variants must produce bit-identical output
// (enforced by tests/test_kernels.cpp). Everything else in the propagation
// path is plain elementwise arithmetic and lives in shared code.

#include <cstddef>
#include <cstdint>

#include "stq/rng.hpp"

namespace stq {

struct KernelOps {
  const char* name;
  // out[i] = standard-normal draw (first_draw + i) of the keyed stream.
  void (*gauss_fill)(PhiloxKey key, uint64_t first_draw, std::size_t n, double* out);
  // out[i] = exp(x[i])
  void (*exp_block)(const double* x, std::size_t n, double* out);
  // s[i], c[i] = sin(x[i]), cos(x[i]); caller guarantees |x| < 1e6.
  void (*sincos_block)(const double* x, std::size_t n, double* s, double* c);
};

enum class KernelKind { scalar, avx2 };

bool cpu_has_avx2();
const KernelOps& kernel_ops(KernelKind kind);

// Active kernel: AVX2 when the CPU supports it, overridable with the
// STQ_KERNEL environment variable ("scalar" | "avx2") or set_active_kernel.
const KernelOps& active_kernel_ops();
void set_active_kernel(KernelKind kind);
KernelKind active_kernel_kind();

}  // namespace stq
