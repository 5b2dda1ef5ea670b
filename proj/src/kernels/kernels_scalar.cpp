#include "mgdual/kernels.hpp"

#include <cmath>

namespace mgdual::kernels::detail {
namespace {

void axpb(double* x, const double* z, double a, double b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] += a + b * z[i];
}

void affine2(double* x, const double* z, double c0, double c1, double c2, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = c0 + c1 * x[i] + c2 * z[i];
}

void fma_arrays(double* out, const double* x, const double* y, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += c * x[i] * y[i];
}

void fma_scalar(double* out, const double* x, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += c * x[i];
}

void sq_accum(double* out, const double* x, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += c * x[i] * x[i];
}

void vexp(double* out, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void log_wealth_step(double* logx, const double* psi, const double* theta,
                     const double* dw, double h, double rh, double sqrth, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double p = psi[i];
        logx[i] += rh + p * theta[i] * h - 0.5 * p * p * h + p * sqrth * dw[i];
    }
}

double reduce_sum(const double* x, std::size_t n) {
    // Neumaier compensation: keeps estimator accumulation stable at 1e5+ paths.
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = s + x[i];
        if (std::abs(s) >= std::abs(x[i]))
            c += (s - t) + x[i];
        else
            c += (x[i] - t) + s;
        s = t;
    }
    return s + c;
}

double reduce_dot(const double* w, const double* x, std::size_t n) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = w[i] * x[i];
        const double t = s + v;
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    return s + c;
}

void reduce_sum2(const double* x, std::size_t n, double* sum, double* sumsq) {
    double s = 0.0, cs = 0.0, q = 0.0, cq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x[i];
        double t = s + v;
        if (std::abs(s) >= std::abs(v))
            cs += (s - t) + v;
        else
            cs += (v - t) + s;
        s = t;
        const double v2 = v * v;
        t = q + v2;
        if (std::abs(q) >= std::abs(v2))
            cq += (q - t) + v2;
        else
            cq += (v2 - t) + q;
        q = t;
    }
    *sum = s + cs;
    *sumsq = q + cq;
}

}  // namespace

const KernelTable scalar_table = {
    "scalar", axpb,       affine2,    fma_arrays, fma_scalar, sq_accum,
    vexp,     log_wealth_step, reduce_sum, reduce_dot, reduce_sum2,
};

}  // namespace mgdual::kernels::detail
