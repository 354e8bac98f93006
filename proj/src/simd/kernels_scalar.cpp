#include "lpcm/simd/kernels.hpp"

#include <cmath>

namespace lpcm::simd::detail {

namespace {

void average_target(const double* s, const double* us, const double* e, const double* ue,
                    double rho, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = ((s[i] + us[i] / rho) + (e[i] + ue[i] / rho)) * 0.5;
    }
}

void dual_step(double* u, const double* x, const double* z, double rho, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) u[i] = u[i] - rho * (x[i] - z[i]);
}

void shifted(const double* x, const double* u, double rho, double* q, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) q[i] = x[i] - u[i] / rho;
}

double squared_distance(const double* a, const double* b, std::size_t n)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

double squared_norm(const double* a, std::size_t n)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * a[i];
    return sum;
}

void soft_threshold(const double* q, const double* w, double* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::abs(q[i]) - w[i];
        out[i] = a > 0.0 ? std::copysign(a, q[i]) : 0.0;
    }
}

std::size_t hard_gate(const double* q, const double* thr, double* out, std::size_t n)
{
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
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
    for (std::size_t i = 0; i < n; ++i) s[i] = a[i];
    for (int it = 0; it < fixed_point_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) s[i] = a[i] - wp[i] * std::pow(s[i], e);
    }
    for (int it = 0; it < newton_steps; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            const double t = std::pow(s[i], e);
            const double h = s[i] - a[i] + wp[i] * t;
            const double dh = 1.0 + wp[i] * e * t / s[i];
            const double next = s[i] - h / dh;
            if (next > 0.0) s[i] = next;
        }
    }
    for (std::size_t i = 0; i < n; ++i) sp[i] = std::pow(s[i], e);
}

double weighted_abs_pow_sum(const double* x, const double* w, double p, std::size_t n)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += w[i] * std::pow(std::abs(x[i]), p);
    return sum;
}

} // namespace

const KernelTable& scalar_table()
{
    static const KernelTable table{
        average_target, dual_step, shifted, squared_distance,
        squared_norm,   soft_threshold, hard_gate,        lp_root,
        weighted_abs_pow_sum,
    };
    return table;
}

} // namespace lpcm::simd::detail
