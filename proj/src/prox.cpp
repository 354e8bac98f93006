#include "lpcm/prox.hpp"

#include <algorithm>
#include <cmath>

namespace lpcm {

double lp_threshold(double w, double p)
{
    if (p >= 1.0) return w;
    if (w <= 0.0) return 0.0;
    const double base = 2.0 * w * (1.0 - p);
    return std::pow(base, 1.0 / (2.0 - p)) + w * p * std::pow(base, (p - 1.0) / (2.0 - p));
}

double prox_objective(double s, double q, double w, double p)
{
    const double a = std::abs(s);
    const double penalty = a == 0.0 ? 0.0 : (p == 1.0 ? a : std::pow(a, p));
    return w * penalty + 0.5 * (s - q) * (s - q);
}

double prox_lp_magnitude(double a, double w, double p, int fixed_point_iters)
{
    const double wp = w * p;
    double s = a;
    for (int it = 0; it < fixed_point_iters; ++it) {
        s = a - wp * std::pow(s, p - 1.0);
    }
    const double f_fixed = prox_objective(s, a, w, p);

    // h(s) = s - a + wp s^(p-1) is convex and increasing right of the lower
    // bracket end, so Newton from above converges monotonically.
    double polished = s;
    for (int it = 0; it < 50; ++it) {
        const double sp = std::pow(polished, p - 1.0);
        const double h = polished - a + wp * sp;
        const double dh = 1.0 + wp * (p - 1.0) * sp / polished;
        const double step = h / dh;
        const double next = polished - step;
        if (!(next > 0.0) || !std::isfinite(next)) break;
        polished = next;
        if (std::abs(step) <= 1e-15 * polished) break;
    }

    const double lower = std::pow(2.0 * w * (1.0 - p), 1.0 / (2.0 - p));
    const bool bracketed = polished >= lower && polished <= a;
    if (bracketed && prox_objective(polished, a, w, p) <= f_fixed) return polished;

    double lo = lower;
    double hi = a;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double h = mid - a + wp * std::pow(mid, p - 1.0);
        (h > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double prox_lp_scalar(double q, double w, double p, int fixed_point_iters)
{
    const double a = std::abs(q);
    if (w <= 0.0) return q;
    if (p >= 1.0) {
        const double r = a - w;
        return r > 0.0 ? std::copysign(r, q) : 0.0;
    }
    if (a <= lp_threshold(w, p)) return 0.0;
    const double s = prox_lp_magnitude(a, w, p, fixed_point_iters);
    // The threshold marks where f(s*) = f(0); guard against rounding there.
    if (prox_objective(s, a, w, p) > prox_objective(0.0, a, w, p)) return 0.0;
    return std::copysign(s, q);
}

} // namespace lpcm
