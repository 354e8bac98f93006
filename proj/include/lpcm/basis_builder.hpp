#pragma once

#include "lpcm/admm.hpp"

#include <iosfwd>
#include <vector>

namespace lpcm {

struct CoverageReport
{
    std::vector<int> uncovered_vertices;
    double covered_fraction = 0.0;

    bool full() const { return uncovered_vertices.empty(); }
};

/// Vertex j is covered when some mode has j in its support.
CoverageReport coverage(const ModeSet& modes, double relative_floor = kSupportRelativeFloor);

/// Support mask per mode, column by column.
std::vector<std::vector<char>> mode_supports(const ModeSet& modes,
                                             double relative_floor = kSupportRelativeFloor);

struct RoundRecord
{
    int round = 0;
    int num_modes = 0;
    double mu = 0.0;
    double covered_fraction = 0.0;
    int iters = 0;
    bool converged = false;
    double wall_seconds = 0.0;
    std::vector<int> support_sizes;
    std::vector<std::vector<char>> supports;
};

struct BuildResult
{
    ModeSet modes;
    std::vector<IterationRecord> history; // of the final round
    std::vector<RoundRecord> rounds;
    bool covered = false;
};

struct GrowNOptions
{
    int n_start = 2;
    int n_max = 64;
};

struct GrowMuOptions
{
    double mu_start = 2.0;
    double mu_factor = 4.0;
    double mu_max = 2.0 * 1048576.0; // 2 * 4^10
};

/// Step 1a: fixed mu, N = n_start, n_start + 1, ... with a fresh solve per
/// round until every vertex is covered or n_max is reached.
BuildResult build_grow_N(const MeshOperators& ops, double mu, SolverConfig cfg,
                         const GrowNOptions& options = {});

/// Step 1b: fixed N, mu multiplied by mu_factor before each solve (so the
/// first solved value is mu_start * mu_factor) until coverage or mu_max.
BuildResult build_grow_mu(const MeshOperators& ops, int N, SolverConfig cfg,
                          const GrowMuOptions& options = {});

/// Pairs (a, b) of mode indices matched by greedy maximal support overlap.
/// Ties go to the lowest (a, b) in lexicographic order.
std::vector<std::pair<int, int>> match_modes(const std::vector<std::vector<char>>& from,
                                             const std::vector<std::vector<char>>& to);

struct SupportTrend
{
    int matched_pairs = 0;
    int non_decreasing = 0;

    double fraction() const
    {
        return matched_pairs == 0 ? 1.0 : static_cast<double>(non_decreasing) / matched_pairs;
    }
};

/// Matches modes of consecutive rounds and counts pairs whose support did
/// not shrink.
SupportTrend support_growth_trend(const std::vector<RoundRecord>& rounds);

/// round,num_modes,mu,covered_fraction,iters,converged
void write_round_log_csv(std::ostream& out, const std::vector<RoundRecord>& rounds);

} // namespace lpcm
