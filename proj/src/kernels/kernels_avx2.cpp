// AVX2+FMA kernel variants. This TU is compiled with -mavx2 -mfma; callers
// reach it only through the dispatch table after a cpuid check.
#include "mgdual/kernels.hpp"

#ifdef MGDUAL_X86

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace mgdual::kernels::detail {
namespace {

inline __m256d abs_pd(__m256d v) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    return _mm256_andnot_pd(sign, v);
}

// exp(x) for 4 doubles, Cephes-style: x = k*ln2 + r, exp(r) by a rational
// approximation on |r| <= ln2/2, then scale by 2^k through the exponent bits.
// Max observed error vs std::exp is ~1 ulp.
inline __m256d exp4(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
    const __m256d hi = _mm256_set1_pd(709.782712893383996843);
    const __m256d lo = _mm256_set1_pd(-708.396418532264106224);

    const __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
    const __m256d over = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
    const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

    __m256d k = _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, c1, xc);
    r = _mm256_fnmadd_pd(k, c2, r);

    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d px = _mm256_fmadd_pd(p0, rr, p1);
    px = _mm256_fmadd_pd(px, rr, p2);
    px = _mm256_mul_pd(px, r);
    __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
    qx = _mm256_fmadd_pd(qx, rr, q2);
    qx = _mm256_fmadd_pd(qx, rr, q3);
    const __m256d e = _mm256_fmadd_pd(_mm256_set1_pd(2.0),
                                      _mm256_div_pd(px, _mm256_sub_pd(qx, px)),
                                      _mm256_set1_pd(1.0));

    const __m128i ki32 = _mm256_cvtpd_epi32(k);
    __m256i ki = _mm256_cvtepi32_epi64(ki32);
    ki = _mm256_add_epi64(ki, _mm256_set1_epi64x(1023));
    const __m256d pow2k = _mm256_castsi256_pd(_mm256_slli_epi64(ki, 52));

    __m256d res = _mm256_mul_pd(e, pow2k);
    res = _mm256_blendv_pd(res, _mm256_setzero_pd(), under);
    res = _mm256_blendv_pd(res, _mm256_set1_pd(HUGE_VAL), over);
    res = _mm256_blendv_pd(res, x, nan_mask);
    return res;
}

void axpb(double* x, const double* z, double a, double b, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        vx = _mm256_add_pd(vx, _mm256_fmadd_pd(vb, _mm256_loadu_pd(z + i), va));
        _mm256_storeu_pd(x + i, vx);
    }
    for (; i < n; ++i) x[i] += a + b * z[i];
}

void affine2(double* x, const double* z, double c0, double c1, double c2, std::size_t n) {
    const __m256d v0 = _mm256_set1_pd(c0), v1 = _mm256_set1_pd(c1), v2 = _mm256_set1_pd(c2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vz = _mm256_loadu_pd(z + i);
        _mm256_storeu_pd(x + i, _mm256_fmadd_pd(v1, vx, _mm256_fmadd_pd(v2, vz, v0)));
    }
    for (; i < n; ++i) x[i] = c0 + c1 * x[i] + c2 * z[i];
}

void fma_arrays(double* out, const double* x, const double* y, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vc, xy, _mm256_loadu_pd(out + i)));
    }
    for (; i < n; ++i) out[i] += c * x[i] * y[i];
}

void fma_scalar(double* out, const double* x, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_fmadd_pd(vc, _mm256_loadu_pd(x + i), _mm256_loadu_pd(out + i)));
    for (; i < n; ++i) out[i] += c * x[i];
}

void sq_accum(double* out, const double* x, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(out + i,
                         _mm256_fmadd_pd(vc, _mm256_mul_pd(vx, vx), _mm256_loadu_pd(out + i)));
    }
    for (; i < n; ++i) out[i] += c * x[i] * x[i];
}

void vexp(double* out, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp4(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = std::exp(x[i]);
}

void log_wealth_step(double* logx, const double* psi, const double* theta,
                     const double* dw, double h, double rh, double sqrth, std::size_t n) {
    const __m256d vh = _mm256_set1_pd(h), vrh = _mm256_set1_pd(rh);
    const __m256d vs = _mm256_set1_pd(sqrth), vhalf = _mm256_set1_pd(-0.5 * h);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_loadu_pd(psi + i);
        __m256d acc = _mm256_fmadd_pd(_mm256_mul_pd(p, _mm256_loadu_pd(theta + i)), vh, vrh);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(p, p), vhalf, acc);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(p, vs), _mm256_loadu_pd(dw + i), acc);
        _mm256_storeu_pd(logx + i, _mm256_add_pd(_mm256_loadu_pd(logx + i), acc));
    }
    for (; i < n; ++i) {
        const double p = psi[i];
        logx[i] += rh + p * theta[i] * h - 0.5 * p * p * h + p * sqrth * dw[i];
    }
}

// 4-lane Neumaier accumulation, lanes combined with a scalar Neumaier pass.
// Lane structure is fixed, so results are deterministic for a given n.
struct VecNeumaier {
    __m256d s = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd();
    inline void add(__m256d v) {
        const __m256d t = _mm256_add_pd(s, v);
        const __m256d big = _mm256_cmp_pd(abs_pd(s), abs_pd(v), _CMP_GE_OQ);
        const __m256d e1 = _mm256_add_pd(_mm256_sub_pd(s, t), v);
        const __m256d e2 = _mm256_add_pd(_mm256_sub_pd(v, t), s);
        c = _mm256_add_pd(c, _mm256_blendv_pd(e2, e1, big));
        s = t;
    }
    double finish(const double* tail, std::size_t n_tail) const {
        double vals[9];
        _mm256_storeu_pd(vals, s);
        _mm256_storeu_pd(vals + 4, c);
        vals[8] = 0.0;
        double acc = 0.0, comp = 0.0;
        auto feed = [&](double v) {
            const double t = acc + v;
            if (std::abs(acc) >= std::abs(v))
                comp += (acc - t) + v;
            else
                comp += (v - t) + acc;
            acc = t;
        };
        for (int k = 0; k < 8; ++k) feed(vals[k]);
        for (std::size_t k = 0; k < n_tail; ++k) feed(tail[k]);
        return acc + comp;
    }
};

double reduce_sum(const double* x, std::size_t n) {
    VecNeumaier acc;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc.add(_mm256_loadu_pd(x + i));
    return acc.finish(x + i, n - i);
}

double reduce_dot(const double* w, const double* x, std::size_t n) {
    VecNeumaier acc;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc.add(_mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i)));
    double tail[3];
    std::size_t nt = 0;
    for (; i < n; ++i) tail[nt++] = w[i] * x[i];
    return acc.finish(tail, nt);
}

void reduce_sum2(const double* x, std::size_t n, double* sum, double* sumsq) {
    VecNeumaier a1, a2;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        a1.add(v);
        a2.add(_mm256_mul_pd(v, v));
    }
    double tail2[3];
    std::size_t nt = 0;
    for (std::size_t j = i; j < n; ++j) tail2[nt++] = x[j] * x[j];
    *sum = a1.finish(x + i, n - i);
    *sumsq = a2.finish(tail2, nt);
}

}  // namespace

const KernelTable avx2_table = {
    "avx2", axpb,       affine2,    fma_arrays, fma_scalar, sq_accum,
    vexp,   log_wealth_step, reduce_sum, reduce_dot, reduce_sum2,
};

}  // namespace mgdual::kernels::detail

#endif  // MGDUAL_X86
