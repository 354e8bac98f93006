#pragma once

namespace lpcm {

/// Threshold below which the Lp proximal map returns zero:
/// (2w(1-p))^(1/(2-p)) + w p (2w(1-p))^((p-1)/(2-p)). Equals w for p = 1.
double lp_threshold(double w, double p);

/// f(s) = w |s|^p + (s - q)^2 / 2
double prox_objective(double s, double q, double w, double p);

/// Minimiser of prox_objective over s for 0 < p <= 1, w >= 0.
///
/// For p = 1 this is soft thresholding. For p < 1 it returns zero when
/// |q| <= lp_threshold(w, p); otherwise it runs `fixed_point_iters` rounds
/// of s <- |q| - w p s^(p-1) from s = |q|, polishes the root of
/// s - |q| + w p s^(p-1) with Newton steps and falls back to bisection on the
/// bracket [(2w(1-p))^(1/(2-p)), |q|] if the objective went up.
double prox_lp_scalar(double q, double w, double p, int fixed_point_iters = 8);

/// Root part of prox_lp_scalar for a magnitude a already known to exceed the
/// threshold. Returns the non-negative minimiser magnitude.
double prox_lp_magnitude(double a, double w, double p, int fixed_point_iters);

} // namespace lpcm
