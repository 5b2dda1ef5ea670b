#pragma once

#include <cstddef>
#include <string>

namespace mgdual::kernels {

// Elementwise / reduction kernels for the Monte Carlo inner loops. Every entry
// has a scalar reference implementation and (on x86) an AVX2+FMA variant; the
// active table is picked at runtime from CPU features. Variants are
// equivalence-tested against the scalar reference.
//
// All arrays are contiguous doubles of length n; `out`-style arguments must
// not alias inputs unless noted in the signature comment.
struct KernelTable {
    const char* name;

    // x[i] += a + b*z[i]
    void (*axpb)(double* x, const double* z, double a, double b, std::size_t n);
    // x[i] = c0 + c1*x[i] + c2*z[i]   (exact OU transition step)
    void (*affine2)(double* x, const double* z, double c0, double c1, double c2, std::size_t n);
    // out[i] += c*x[i]*y[i]
    void (*fma_arrays)(double* out, const double* x, const double* y, double c, std::size_t n);
    // out[i] += c*x[i]
    void (*fma_scalar)(double* out, const double* x, double c, std::size_t n);
    // out[i] += c*x[i]*x[i]
    void (*sq_accum)(double* out, const double* x, double c, std::size_t n);
    // out[i] = exp(x[i]); out may equal x
    void (*vexp)(double* out, const double* x, std::size_t n);
    // logx[i] += rh + psi[i]*theta[i]*h - 0.5*psi[i]^2*h + psi[i]*sqrth*dw[i]
    // (log-wealth step under a vol-scaled risky fraction psi)
    void (*log_wealth_step)(double* logx, const double* psi, const double* theta,
                            const double* dw, double h, double rh, double sqrth, std::size_t n);
    // Neumaier-compensated reductions
    double (*reduce_sum)(const double* x, std::size_t n);
    double (*reduce_dot)(const double* w, const double* x, std::size_t n);
    void (*reduce_sum2)(const double* x, std::size_t n, double* sum, double* sumsq);
};

enum class Backend { automatic, scalar, avx2 };

bool avx2_available();
const KernelTable& table(Backend b);   // throws std::runtime_error if unavailable
const KernelTable& active();
void select(Backend b);                // process-wide override, used by tests
std::string active_name();

namespace detail {
extern const KernelTable scalar_table;
#ifdef MGDUAL_X86
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace mgdual::kernels
