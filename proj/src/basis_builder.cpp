#include "lpcm/basis_builder.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <ostream>
#include <stdexcept>

namespace lpcm {

std::vector<std::vector<char>> mode_supports(const ModeSet& modes, double relative_floor)
{
    std::vector<std::vector<char>> out;
    out.reserve(static_cast<size_t>(modes.num_modes()));
    for (int k = 0; k < modes.num_modes(); ++k) out.push_back(column_support(modes.Psi, k, relative_floor));
    return out;
}

CoverageReport coverage(const ModeSet& modes, double relative_floor)
{
    const int n = modes.num_vertices();
    std::vector<char> covered(static_cast<size_t>(n), 0);
    for (const auto& mask : mode_supports(modes, relative_floor)) {
        for (int i = 0; i < n; ++i) covered[i] |= mask[i];
    }
    CoverageReport report;
    for (int i = 0; i < n; ++i) {
        if (!covered[i]) report.uncovered_vertices.push_back(i);
    }
    report.covered_fraction =
        n == 0 ? 1.0 : static_cast<double>(n - static_cast<int>(report.uncovered_vertices.size())) / n;
    return report;
}

namespace {

RoundRecord run_round(const MeshOperators& ops, int round, int N, const SolverConfig& cfg,
                      BuildResult& result)
{
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult solved = solve(ops, N, cfg);
    const auto t1 = std::chrono::steady_clock::now();

    RoundRecord rec;
    rec.round = round;
    rec.num_modes = N;
    rec.mu = cfg.mu;
    rec.iters = solved.modes.iters;
    rec.converged = solved.modes.converged;
    rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    rec.covered_fraction = coverage(solved.modes).covered_fraction;
    rec.supports = mode_supports(solved.modes);
    for (const auto& mask : rec.supports) {
        int count = 0;
        for (char c : mask) count += c;
        rec.support_sizes.push_back(count);
    }
    spdlog::info("round {}: N={} mu={} covered={:.4f} iters={}{}", round, N, cfg.mu,
                 rec.covered_fraction, rec.iters, rec.converged ? "" : " (not converged)");
    result.modes = std::move(solved.modes);
    result.history = std::move(solved.state.history);
    return rec;
}

} // namespace

BuildResult build_grow_N(const MeshOperators& ops, double mu, SolverConfig cfg,
                         const GrowNOptions& options)
{
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (options.n_start < 1 || options.n_max < options.n_start) {
        throw std::invalid_argument("invalid mode count range");
    }
    cfg.mu = mu;
    BuildResult result;
    const int n_max = std::min(options.n_max, ops.dimension());
    for (int N = options.n_start, round = 1; N <= n_max; ++N, ++round) {
        RoundRecord rec = run_round(ops, round, N, cfg, result);
        const bool full = rec.covered_fraction >= 1.0;
        result.rounds.push_back(std::move(rec));
        if (full) {
            result.covered = true;
            break;
        }
    }
    if (!result.covered) spdlog::warn("mode count cap {} reached without full coverage", n_max);
    return result;
}

BuildResult build_grow_mu(const MeshOperators& ops, int N, SolverConfig cfg,
                          const GrowMuOptions& options)
{
    if (N < 1) throw std::invalid_argument("mode count must be positive");
    if (!(options.mu_start > 0.0) || !(options.mu_factor > 1.0)) {
        throw std::invalid_argument("mu schedule needs mu_start > 0 and mu_factor > 1");
    }
    BuildResult result;
    double mu = options.mu_start;
    for (int round = 1;; ++round) {
        mu *= options.mu_factor;
        if (mu > options.mu_max) {
            spdlog::warn("mu cap {} exceeded without full coverage", options.mu_max);
            break;
        }
        cfg.mu = mu;
        RoundRecord rec = run_round(ops, round, N, cfg, result);
        const bool full = rec.covered_fraction >= 1.0;
        result.rounds.push_back(std::move(rec));
        if (full) {
            result.covered = true;
            break;
        }
    }
    return result;
}

std::vector<std::pair<int, int>> match_modes(const std::vector<std::vector<char>>& from,
                                             const std::vector<std::vector<char>>& to)
{
    const int a = static_cast<int>(from.size());
    const int b = static_cast<int>(to.size());
    std::vector<std::vector<int>> overlap(a, std::vector<int>(b, 0));
    for (int i = 0; i < a; ++i) {
        for (int j = 0; j < b; ++j) {
            const size_t n = std::min(from[i].size(), to[j].size());
            for (size_t v = 0; v < n; ++v) overlap[i][j] += from[i][v] && to[j][v];
        }
    }
    std::vector<char> used_a(a, 0), used_b(b, 0);
    std::vector<std::pair<int, int>> pairs;
    for (int step = 0; step < std::min(a, b); ++step) {
        int best_i = -1, best_j = -1, best = -1;
        for (int i = 0; i < a; ++i) {
            if (used_a[i]) continue;
            for (int j = 0; j < b; ++j) {
                if (!used_b[j] && overlap[i][j] > best) {
                    best = overlap[i][j];
                    best_i = i;
                    best_j = j;
                }
            }
        }
        used_a[best_i] = used_b[best_j] = 1;
        pairs.emplace_back(best_i, best_j);
    }
    return pairs;
}

SupportTrend support_growth_trend(const std::vector<RoundRecord>& rounds)
{
    SupportTrend trend;
    for (size_t r = 1; r < rounds.size(); ++r) {
        const auto& prev = rounds[r - 1];
        const auto& next = rounds[r];
        for (const auto& [i, j] : match_modes(prev.supports, next.supports)) {
            ++trend.matched_pairs;
            const auto before = std::count(prev.supports[i].begin(), prev.supports[i].end(), 1);
            const auto after = std::count(next.supports[j].begin(), next.supports[j].end(), 1);
            if (after >= before) ++trend.non_decreasing;
        }
    }
    return trend;
}

void write_round_log_csv(std::ostream& out, const std::vector<RoundRecord>& rounds)
{
    out << "round,num_modes,mu,covered_fraction,iters,converged\n";
    const auto old_precision = out.precision(17);
    for (const auto& r : rounds) {
        out << r.round << ',' << r.num_modes << ',' << r.mu << ',' << r.covered_fraction << ','
            << r.iters << ',' << (r.converged ? 1 : 0) << '\n';
    }
    out.precision(old_precision);
}

} // namespace lpcm
