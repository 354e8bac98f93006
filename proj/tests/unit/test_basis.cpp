#include "doctest.h"

#include "lpcm/basis_builder.hpp"
#include "lpcm/shapes.hpp"

#include <sstream>

using namespace lpcm;

namespace {

std::vector<char> mask(std::initializer_list<int> bits)
{
    return std::vector<char>(bits.begin(), bits.end());
}

} // namespace

TEST_CASE("coverage")
{
    ModeSet modes;
    modes.Psi = Matrix::Zero(5, 2);
    modes.Psi(0, 0) = 1.0;
    modes.Psi(1, 0) = 0.5;
    modes.Psi(3, 1) = -2.0;
    modes.Psi(4, 1) = 1e-5; // below the relative floor
    const CoverageReport c = coverage(modes);
    CHECK_FALSE(c.full());
    CHECK(c.uncovered_vertices == std::vector<int>{2, 4});
    CHECK(c.covered_fraction == doctest::Approx(0.6));
    CHECK(mode_supports(modes)[1] == mask({0, 0, 0, 1, 0}));
    modes.Psi(2, 0) = 0.1;
    modes.Psi(4, 0) = 0.1;
    CHECK(coverage(modes).full());
}

TEST_CASE("mode matching")
{
    const std::vector<std::vector<char>> from = {mask({1, 1, 0, 0, 0}), mask({0, 0, 0, 1, 1})};
    const std::vector<std::vector<char>> to = {mask({0, 0, 1, 1, 1}), mask({1, 1, 1, 0, 0}),
                                               mask({0, 0, 0, 0, 0})};
    const auto pairs = match_modes(from, to);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == std::pair<int, int>{0, 1});
    CHECK(pairs[1] == std::pair<int, int>{1, 0});
}

TEST_CASE("support growth trend")
{
    std::vector<RoundRecord> rounds(3);
    rounds[0].supports = {mask({1, 0, 0, 0, 0, 0}), mask({0, 0, 0, 1, 0, 0})};
    rounds[1].supports = {mask({1, 1, 0, 0, 0, 0}), mask({0, 0, 0, 1, 1, 0})};
    rounds[2].supports = {mask({1, 1, 1, 0, 0, 0}), mask({0, 0, 0, 0, 1, 0})};
    const SupportTrend t = support_growth_trend(rounds);
    CHECK(t.matched_pairs == 4);
    CHECK(t.non_decreasing == 3);
    CHECK(t.fraction() == doctest::Approx(0.75));
    CHECK(SupportTrend{}.fraction() == 1.0);
}

TEST_CASE("mu schedule multiplies before each solve")
{
    const MeshOperators ops = assemble_operators(shapes::icosphere(4));
    SolverConfig cfg;
    cfg.max_iter = 300;
    GrowMuOptions opt;
    opt.mu_start = 2.0;
    opt.mu_factor = 4.0;
    opt.mu_max = 512.0;
    const BuildResult r = build_grow_mu(ops, 2, cfg, opt);
    REQUIRE_FALSE(r.rounds.empty());
    for (size_t k = 0; k < r.rounds.size(); ++k) {
        CHECK(r.rounds[k].round == static_cast<int>(k) + 1);
        CHECK(r.rounds[k].mu == doctest::Approx(8.0 * std::pow(4.0, static_cast<double>(k))));
        CHECK(r.rounds[k].num_modes == 2);
    }
    CHECK(r.rounds.back().mu <= 512.0);
    CHECK(r.covered == coverage(r.modes).full());
    if (r.covered) CHECK(r.rounds.back().covered_fraction == 1.0);
    for (size_t k = 0; k + 1 < r.rounds.size(); ++k) CHECK(r.rounds[k].covered_fraction < 1.0);

    std::ostringstream csv;
    write_round_log_csv(csv, r.rounds);
    CHECK(csv.str().rfind("round,num_modes,mu,covered_fraction,iters,converged\n", 0) == 0);
}

TEST_CASE("grow N adds one mode per round")
{
    const MeshOperators ops = assemble_operators(shapes::icosphere(4));
    SolverConfig cfg;
    cfg.max_iter = 300;
    GrowNOptions opt;
    opt.n_start = 2;
    opt.n_max = 4;
    const BuildResult r = build_grow_N(ops, 1.0, cfg, opt);
    REQUIRE_FALSE(r.rounds.empty());
    for (size_t k = 0; k < r.rounds.size(); ++k) {
        CHECK(r.rounds[k].num_modes == 2 + static_cast<int>(k));
        CHECK(r.rounds[k].mu == 1.0);
    }
    CHECK(r.rounds.size() <= 3);
    CHECK(r.modes.num_modes() == r.rounds.back().num_modes);
}
