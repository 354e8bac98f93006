#pragma once

// Elementwise kernels behind the ADMM inner loop. Each kernel has a scalar
// reference and an AVX2 variant; the variant is picked once at runtime from
// CPU support and the LPCM_SIMD environment variable (scalar | avx2).
//
// Elementwise kernels are bit-identical across levels (no FMA contraction);
// reductions differ only in summation order. The kernels built on pow
// (lp_root, weighted_abs_pow_sum) use the vector libm on AVX2 and agree with
// the scalar reference to a few ulps.

#include <cstddef>
#include <string>
#include <vector>

namespace lpcm::simd {

enum class Level { Scalar, Avx2 };

std::string to_string(Level level);
Level parse_level(const std::string& name);

/// Best level the running CPU supports.
Level detected_level();
/// Level used by kernels(); defaults to detected_level() unless overridden.
Level active_level();
/// Overrides the active level. Requests above detected_level() are clamped.
Level set_active_level(Level level);

std::vector<Level> available_levels();

struct KernelTable
{
    // y = ((s + us/rho) + (e + ue/rho)) * 0.5
    void (*average_target)(const double* s, const double* us, const double* e,
                           const double* ue, double rho, double* y, std::size_t n);
    // u = u - rho * (x - z)
    void (*dual_step)(double* u, const double* x, const double* z, double rho, std::size_t n);
    // q = x - u/rho
    void (*shifted)(const double* x, const double* u, double rho, double* q, std::size_t n);
    // sum (a_i - b_i)^2
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    // sum a_i^2
    double (*squared_norm)(const double* a, std::size_t n);
    // out_i = sign(q_i) max(|q_i| - w_i, 0), with +0 for zeroed entries
    void (*soft_threshold)(const double* q, const double* w, double* out, std::size_t n);
    // out_i = |q_i| > thr_i ? q_i : 0; returns the number of kept entries
    std::size_t (*hard_gate)(const double* q, const double* thr, double* out, std::size_t n);
    // Root of s - a_i + wp_i s^(p-1) = 0 from s = a_i: fixed_point_iters rounds
    // of s <- a_i - wp_i s^(p-1), then newton_steps Newton steps (a step that
    // would leave s > 0 is skipped). sp_i = s_i^(p-1) at the returned s_i.
    void (*lp_root)(const double* a, const double* wp, double p, int fixed_point_iters,
                    int newton_steps, double* s, double* sp, std::size_t n);
    // sum w_i |x_i|^p
    double (*weighted_abs_pow_sum)(const double* x, const double* w, double p, std::size_t n);
};

const KernelTable& kernels();
const KernelTable& kernels(Level level);

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table(); // nullptr when not compiled in
} // namespace detail

} // namespace lpcm::simd
