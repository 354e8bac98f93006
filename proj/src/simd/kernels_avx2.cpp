// Compiled with -mavx2 (and without FMA) when LPCM_ENABLE_AVX2 is set. The
// functions here are only reached after a runtime CPU check.

#include "lpcm/simd/kernels.hpp"

#if defined(LPCM_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

// glibc vector libm: four-lane pow, accurate to a few ulps.
extern "C" __m256d _ZGVdN4vv_pow(__m256d x, __m256d y);

namespace lpcm::simd::detail {

namespace {

inline __m256d pow_pd(__m256d x, __m256d y)
{
    return _ZGVdN4vv_pow(x, y);
}

inline __m256d abs_pd(__m256d x)
{
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

inline double horizontal_sum(__m256d v)
{
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    const __m128d swapped = _mm_unpackhi_pd(pair, pair);
    return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

void average_target(const double* s, const double* us, const double* e, const double* ue,
                    double rho, double* y, std::size_t n)
{
    const __m256d r = _mm256_set1_pd(rho);
    const __m256d half = _mm256_set1_pd(0.5);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_add_pd(_mm256_loadu_pd(s + i),
                                        _mm256_div_pd(_mm256_loadu_pd(us + i), r));
        const __m256d b = _mm256_add_pd(_mm256_loadu_pd(e + i),
                                        _mm256_div_pd(_mm256_loadu_pd(ue + i), r));
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_add_pd(a, b), half));
    }
    for (; i < n; ++i) y[i] = ((s[i] + us[i] / rho) + (e[i] + ue[i] / rho)) * 0.5;
}

void dual_step(double* u, const double* x, const double* z, double rho, std::size_t n)
{
    const __m256d r = _mm256_set1_pd(rho);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(z + i));
        _mm256_storeu_pd(u + i, _mm256_sub_pd(_mm256_loadu_pd(u + i), _mm256_mul_pd(r, diff)));
    }
    for (; i < n; ++i) u[i] = u[i] - rho * (x[i] - z[i]);
}

void shifted(const double* x, const double* u, double rho, double* q, std::size_t n)
{
    const __m256d r = _mm256_set1_pd(rho);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(q + i, _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                              _mm256_div_pd(_mm256_loadu_pd(u + i), r)));
    }
    for (; i < n; ++i) q[i] = x[i] - u[i] / rho;
}

double squared_distance(const double* a, const double* b, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
    }
    double sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

double squared_norm(const double* a, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d x0 = _mm256_loadu_pd(a + i);
        const __m256d x1 = _mm256_loadu_pd(a + i + 4);
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(x0, x0));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(x1, x1));
    }
    double sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) sum += a[i] * a[i];
    return sum;
}

void soft_threshold(const double* q, const double* w, double* out, std::size_t n)
{
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(q + i);
        const __m256d a = _mm256_sub_pd(abs_pd(x), _mm256_loadu_pd(w + i));
        const __m256d keep = _mm256_cmp_pd(a, zero, _CMP_GT_OQ);
        const __m256d signed_a = _mm256_or_pd(a, _mm256_and_pd(x, sign_mask));
        _mm256_storeu_pd(out + i, _mm256_and_pd(keep, signed_a));
    }
    for (; i < n; ++i) {
        const double a = std::abs(q[i]) - w[i];
        out[i] = a > 0.0 ? std::copysign(a, q[i]) : 0.0;
    }
}

std::size_t hard_gate(const double* q, const double* thr, double* out, std::size_t n)
{
    std::size_t kept = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(q + i);
        const __m256d keep = _mm256_cmp_pd(abs_pd(x), _mm256_loadu_pd(thr + i), _CMP_GT_OQ);
        _mm256_storeu_pd(out + i, _mm256_and_pd(keep, x));
        kept += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(keep)));
    }
    for (; i < n; ++i) {
        if (std::abs(q[i]) > thr[i]) {
            out[i] = q[i];
            ++kept;
        } else {
            out[i] = 0.0;
        }
    }
    return kept;
}

void lp_root(const double* a, const double* wp, double p, int fixed_point_iters, int newton_steps,
             double* s, double* sp, std::size_t n)
{
    const double e = p - 1.0;
    const __m256d ev = _mm256_set1_pd(e);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d av = _mm256_loadu_pd(a + i);
        const __m256d w = _mm256_loadu_pd(wp + i);
        __m256d x = av;
        for (int it = 0; it < fixed_point_iters; ++it) {
            x = _mm256_sub_pd(av, _mm256_mul_pd(w, pow_pd(x, ev)));
        }
        for (int it = 0; it < newton_steps; ++it) {
            const __m256d t = pow_pd(x, ev);
            const __m256d h = _mm256_add_pd(_mm256_sub_pd(x, av), _mm256_mul_pd(w, t));
            const __m256d dh =
                _mm256_add_pd(one, _mm256_div_pd(_mm256_mul_pd(_mm256_mul_pd(w, ev), t), x));
            const __m256d next = _mm256_sub_pd(x, _mm256_div_pd(h, dh));
            x = _mm256_blendv_pd(x, next, _mm256_cmp_pd(next, zero, _CMP_GT_OQ));
        }
        _mm256_storeu_pd(s + i, x);
        _mm256_storeu_pd(sp + i, pow_pd(x, ev));
    }
    for (; i < n; ++i) {
        double x = a[i];
        for (int it = 0; it < fixed_point_iters; ++it) x = a[i] - wp[i] * std::pow(x, e);
        for (int it = 0; it < newton_steps; ++it) {
            const double t = std::pow(x, e);
            const double h = x - a[i] + wp[i] * t;
            const double dh = 1.0 + wp[i] * e * t / x;
            const double next = x - h / dh;
            if (next > 0.0) x = next;
        }
        s[i] = x;
        sp[i] = std::pow(x, e);
    }
}

double weighted_abs_pow_sum(const double* x, const double* w, double p, std::size_t n)
{
    const __m256d pv = _mm256_set1_pd(p);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = pow_pd(abs_pd(_mm256_loadu_pd(x + i)), pv);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), v));
    }
    double sum = horizontal_sum(acc);
    for (; i < n; ++i) sum += w[i] * std::pow(std::abs(x[i]), p);
    return sum;
}

} // namespace

const KernelTable* avx2_table()
{
    static const KernelTable table{
        average_target, dual_step, shifted, squared_distance,
        squared_norm,   soft_threshold, hard_gate,        lp_root,
        weighted_abs_pow_sum,
    };
    return &table;
}

} // namespace lpcm::simd::detail

#else

namespace lpcm::simd::detail {
const KernelTable* avx2_table()
{
    return nullptr;
}
} // namespace lpcm::simd::detail

#endif
