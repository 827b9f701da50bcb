#include "stq/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace stq {

namespace detail {
void gauss_fill_scalar(PhiloxKey, uint64_t, std::size_t, double*);
void exp_block_scalar(const double*, std::size_t, double*);
void sincos_block_scalar(const double*, std::size_t, double*, double*);
#if defined(__x86_64__) || defined(__i386__)
void gauss_fill_avx2(PhiloxKey, uint64_t, std::size_t, double*);
void exp_block_avx2(const double*, std::size_t, double*);
void sincos_block_avx2(const double*, std::size_t, double*, double*);
#endif
}  // namespace detail

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelOps& kernel_ops(KernelKind kind) {
  static const KernelOps scalar_ops{"scalar", detail::gauss_fill_scalar,
                                    detail::exp_block_scalar, detail::sincos_block_scalar};
#if defined(__x86_64__) || defined(__i386__)
  static const KernelOps avx2_ops{"avx2", detail::gauss_fill_avx2,
                                  detail::exp_block_avx2, detail::sincos_block_avx2};
  if (kind == KernelKind::avx2) return avx2_ops;
#else
  if (kind == KernelKind::avx2) throw std::runtime_error("avx2 kernels not built on this arch");
#endif
  (void)kind;
  return scalar_ops;
}

namespace {

KernelKind detect_kernel() {
  if (const char* env = std::getenv("STQ_KERNEL")) {
    if (std::strcmp(env, "scalar") == 0) return KernelKind::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!cpu_has_avx2()) throw std::runtime_error("STQ_KERNEL=avx2 but CPU lacks AVX2/FMA");
      return KernelKind::avx2;
    }
    throw std::runtime_error("STQ_KERNEL must be 'scalar' or 'avx2'");
  }
  return cpu_has_avx2() ? KernelKind::avx2 : KernelKind::scalar;
}

KernelKind g_active = detect_kernel();

}  // namespace

const KernelOps& active_kernel_ops() { return kernel_ops(g_active); }

void set_active_kernel(KernelKind kind) {
  if (kind == KernelKind::avx2 && !cpu_has_avx2())
    throw std::runtime_error("CPU lacks AVX2/FMA");
  g_active = kind;
}

KernelKind active_kernel_kind() { return g_active; }

}  // namespace stq
