// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.
//
//   acceptance [--workdir DIR] [--only 3,7,...]

#include "lpcm/admm.hpp"
#include "lpcm/basis_builder.hpp"
#include "lpcm/cli.hpp"
#include "lpcm/mesh_io.hpp"
#include "lpcm/prox.hpp"
#include "lpcm/segmentation.hpp"
#include "lpcm/shapes.hpp"
#include "lpcm/spectral.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace lpcm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

struct Context
{
    fs::path workdir;

    fs::path dir(const std::string& name) const
    {
        const fs::path d = workdir / name;
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }
};

int cli(const std::vector<std::string>& args)
{
    std::vector<std::string> full{"lpcm"};
    full.insert(full.end(), args.begin(), args.end());
    return run_cli(full);
}

TriMesh scaled(const TriMesh& mesh, double factor)
{
    std::vector<Vec3> v = mesh.vertices();
    for (auto& x : v) x *= factor;
    return TriMesh(std::move(v), mesh.triangles());
}

// Five-finger star at three times the unit size, so that the first schedule
// values already give localized modes.
TriMesh star_fixture()
{
    return scaled(shapes::star(10, 5), 3.0);
}

// ---------------------------------------------------------------------------

// Minimiser of f(s) = w|s|^p + (s-q)^2/2 by a 10^5-point grid over [0, |q|]
// followed by bisection on f' around the best grid point.
double oracle_prox(double q, double w, double p)
{
    const double a = std::abs(q);
    const int points = 100000;
    const double h = a / points;
    int best = 0;
    double fbest = prox_objective(0.0, a, w, p);
    for (int k = 1; k <= points; ++k) {
        const double f = prox_objective(k * h, a, w, p);
        if (f < fbest) {
            fbest = f;
            best = k;
        }
    }
    if (best == 0) return 0.0;
    auto slope = [&](double s) { return w * p * std::pow(s, p - 1.0) + s - a; };
    double lo = (best - 1) * h, hi = std::min(a, (best + 1) * h);
    double s = best * h;
    if (lo > 0.0 && slope(lo) < 0.0 && slope(hi) > 0.0) {
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) > 0.0 ? hi : lo) = mid;
        }
        s = 0.5 * (lo + hi);
    }
    if (prox_objective(0.0, a, w, p) < prox_objective(s, a, w, p)) s = 0.0;
    return std::copysign(s, q);
}

Outcome prox_oracle(Context&)
{
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uq(-10.0, 10.0);
    std::uniform_real_distribution<double> uw(0.0, 5.0);
    const double ps[] = {0.5, 0.8, 1.0};
    double worst = 0.0;
    int soft_mismatch = 0;
    for (int k = 0; k < 1000; ++k) {
        const double q = uq(rng);
        double w = uw(rng);
        while (w == 0.0) w = uw(rng);
        const double p = ps[k % 3];
        const double s = prox_lp_scalar(q, w, p);
        if (p == 1.0) {
            const double r = std::abs(q) - w;
            const double soft = r > 0.0 ? std::copysign(r, q) : 0.0;
            if (s != soft) ++soft_mismatch;
        }
        worst = std::max(worst, std::abs(s - oracle_prox(q, w, p)));
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-5 && soft_mismatch == 0 && elapsed < 5.0,
            fmt("max |prox - oracle| = %.2e, soft-threshold mismatches = %d, %.2f s", worst,
                soft_mismatch, elapsed)};
}

Outcome orthonormality(Context&)
{
    const MeshOperators ops = assemble_operators(shapes::icosphere(8));
    SolverConfig cfg;
    cfg.mu = 100.0;
    cfg.max_iter = 200;
    cfg.tol_rel_change = std::numeric_limits<double>::min();
    double worst = 0.0;
    int updates = 0;
    solve(ops, 4, cfg, [&](const AdmmState& st) {
        ++updates;
        worst = std::max(worst, orthonormality_error(st.Psi, ops.mass));
    });
    return {updates == 200 && worst <= 1e-8,
            fmt("n=%d, %d Psi-updates, max ||Psi^T D Psi - I||_inf = %.2e", ops.dimension(),
                updates, worst)};
}

Outcome admm_convergence(Context&)
{
    const auto start = Clock::now();
    const MeshOperators ops = assemble_operators(shapes::icosphere(8));
    SolverConfig cfg;
    cfg.mu = 100.0;
    cfg.p = 0.8;
    cfg.rho = 1.0;
    cfg.seed = 1;
    cfg.max_iter = 2000;
    const SolveResult r = solve(ops, 4, cfg);
    const double elapsed = seconds_since(start);
    const auto& h = r.state.history;
    const bool below = h.back().err_psi < 1e-3;
    const bool residual_down = h.back().primal_residual_sq < h.front().primal_residual_sq;
    return {below && residual_down && elapsed < 60.0,
            fmt("iters=%d, final err_psi=%.2e, primal residual^2 %.3e -> %.3e, %.1f s",
                r.modes.iters, h.back().err_psi, h.front().primal_residual_sq,
                h.back().primal_residual_sq, elapsed)};
}

Outcome e_solve(Context&)
{
    double worst_residual = 0.0;
    int calls = 0;
    // Residual on every call of full solves on three meshes.
    const std::vector<std::pair<TriMesh, double>> cases = {
        {shapes::icosphere(8), 1.0},
        {shapes::quadruped(10), 1.0},
        {shapes::torus(1.0, 0.35, 32, 16), 5.0},
    };
    for (const auto& [mesh, rho] : cases) {
        const MeshOperators ops = assemble_operators(mesh);
        const ESolver esolver(ops.stiffness, rho);
        SolverConfig cfg;
        cfg.mu = 50.0;
        cfg.rho = rho;
        cfg.max_iter = 100;
        solve(ops, 4, cfg, [&](const AdmmState& st) {
            esolver.solve(st.Psi, st.U_E);
            worst_residual = std::max(worst_residual, esolver.last_relative_residual());
            ++calls;
        });
    }
    // Dense agreement on fixtures with n <= 100.
    double worst_dense = 0.0;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (const TriMesh& mesh :
         {shapes::octahedron(), shapes::icosphere(3), shapes::grid(6, 6), shapes::torus(1.0, 0.4, 10, 6),
          shapes::disk(3, 8)}) {
        const MeshOperators ops = assemble_operators(mesh);
        const int n = ops.dimension();
        for (double rho : {0.1, 1.0, 10.0}) {
            const ESolver esolver(ops.stiffness, rho);
            Matrix Psi(n, 3), U(n, 3);
            for (Eigen::Index i = 0; i < Psi.size(); ++i) {
                Psi.data()[i] = normal(rng);
                U.data()[i] = normal(rng);
            }
            const Matrix E = esolver.solve(Psi, U);
            worst_residual = std::max(worst_residual, esolver.last_relative_residual());
            ++calls;
            const Matrix A = rho * Matrix::Identity(n, n) + 2.0 * Matrix(ops.stiffness.matrix());
            const Matrix dense = A.partialPivLu().solve(rho * Psi - U);
            worst_dense = std::max(worst_dense,
                                   (E - dense).cwiseAbs().maxCoeff() / dense.cwiseAbs().maxCoeff());
        }
    }
    return {worst_residual <= 1e-10 && worst_dense <= 1e-9,
            fmt("%d calls, max relative residual %.2e, max deviation from dense %.2e", calls,
                worst_residual, worst_dense)};
}

Outcome brute_force(Context&)
{
    const MeshOperators ops = assemble_operators(shapes::octahedron());
    const int n = ops.dimension();
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    std::vector<Vector> samples;
    for (int k = 0; k < 10000; ++k) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = normal(rng);
        v /= std::sqrt(v.dot(ops.mass.d.cwiseProduct(v)));
        samples.push_back(std::move(v));
    }
    bool pass = true;
    std::string detail;
    for (double mu : {0.5, 2.0, 8.0}) {
        SolverConfig cfg;
        cfg.mu = mu;
        cfg.p = 1.0;
        cfg.rho = 20.0;
        cfg.tol_rel_change = 1e-10;
        cfg.max_iter = 20000;
        const SolveResult r = solve(ops, 1, cfg);
        const double admm = admm_objective(r.modes.Psi, ops, mu, 1.0);
        double best = std::numeric_limits<double>::infinity();
        for (const Vector& v : samples) best = std::min(best, admm_objective(Matrix(v), ops, mu, 1.0));
        pass = pass && admm <= best + 1e-8;
        detail += fmt("%smu=%g: admm %.6f vs sampled min %.6f", detail.empty() ? "" : "; ", mu, admm,
                      best);
    }
    return {pass, detail};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path)
{
    std::ifstream in(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(std::move(row));
    }
    return rows;
}

Outcome mu_schedule(Context& ctx)
{
    const fs::path dir = ctx.dir("schedule");
    const std::string mesh = (dir / "quadruped.ply").string();
    if (cli({"generate", "quadruped", mesh, "--resolution", "14"}) != 0) return {false, "generate failed"};
    const int rc = cli({"modes", mesh, "-o", (dir / "out").string(), "--num-modes", "6"});
    const auto rows = read_csv(dir / "out" / "rounds.csv");
    if (rc != 0 || rows.size() < 2) return {false, fmt("modes exit code %d", rc)};
    bool exact = true, covered_last = false, covered_early = false;
    std::string seq;
    for (size_t k = 1; k < rows.size(); ++k) {
        const double mu = std::stod(rows[k][2]);
        const double cov = std::stod(rows[k][3]);
        exact = exact && mu == 8.0 * std::pow(4.0, static_cast<double>(k - 1));
        seq += (k > 1 ? ", " : "") + rows[k][2];
        if (k + 1 < rows.size() && cov >= 1.0) covered_early = true;
        if (k + 1 == rows.size()) covered_last = cov >= 1.0;
    }
    return {exact && covered_last && !covered_early,
            "logged mu: " + seq + (covered_last ? " (covered)" : " (not covered)")};
}

Outcome support_trend(Context&)
{
    const MeshOperators ops = assemble_operators(star_fixture());
    SolverConfig cfg;
    cfg.rho = 30.0;
    const BuildResult r = build_grow_mu(ops, 5, cfg);
    const SupportTrend t = support_growth_trend(r.rounds);
    std::string sizes;
    for (const auto& round : r.rounds) {
        sizes += fmt("%smu=%g:", sizes.empty() ? "" : " ", round.mu);
        for (const auto& s : round.supports) {
            sizes += fmt(" %d", static_cast<int>(std::count(s.begin(), s.end(), 1)));
        }
    }
    return {r.rounds.size() >= 2 && t.fraction() >= 0.8,
            fmt("%d/%d matched pairs non-decreasing (", t.non_decreasing, t.matched_pairs) + sizes +
                ")"};
}

Outcome bump_localization(Context&)
{
    const auto start = Clock::now();
    const shapes::BumpyEllipsoid fixture =
        shapes::bumpy_ellipsoid(20, Vec3(2.5, 1.5, 1.5), 0.6, 0.35);
    const MeshOperators ops = assemble_operators(fixture.mesh);
    SolverConfig cfg;
    cfg.mu = 125.0;
    cfg.p = 0.8;
    const SolveResult r = solve(ops, 5, cfg);
    const auto supports = mode_supports(r.modes);
    const double bump_count = static_cast<double>(fixture.bump_vertices.size());
    int localized = 0;
    std::string fractions;
    for (const auto& s : supports) {
        int inside = 0;
        for (int v : fixture.bump_vertices) inside += s[v];
        const double f = inside / bump_count;
        if (f >= 0.9) ++localized;
        fractions += fmt("%s%.2f", fractions.empty() ? "" : "/", f);
    }
    const EigenBasis mhb_basis = mhb(ops, 5);
    double worst_mass = 0.0;
    for (int k = 0; k < 5; ++k) {
        const Vector phi = mhb_basis.Phi.col(k);
        const Vector w = ops.mass.d.cwiseProduct(phi.cwiseAbs2());
        double in_bump = 0.0;
        for (int v : fixture.bump_vertices) in_bump += w[v];
        worst_mass = std::max(worst_mass, in_bump / w.sum());
    }
    const double elapsed = seconds_since(start);
    return {localized == 1 && worst_mass <= 0.5 && elapsed < 300.0,
            fmt("n=%d, %d modes hold >=90%% of the bump (bump fractions %s, iters=%d%s), "
                "max eigenvector bump mass %.3f, %.1f s",
                ops.dimension(), localized, fractions.c_str(), r.modes.iters,
                r.modes.converged ? "" : " not converged", worst_mass, elapsed)};
}

struct CoverCase
{
    std::string name;
    TriMesh mesh;
    int num_modes;
    double rho;
};

Outcome segmentation_cover(Context&)
{
    const std::vector<CoverCase> cases = {
        {"icosphere", shapes::icosphere(8), 4, 1.0},
        {"star", star_fixture(), 5, 30.0},
        {"torus", shapes::torus(1.0, 0.35, 40, 20), 4, 1.0},
        {"quadruped", shapes::quadruped(14), 6, 1.0},
        {"ellipsoid", shapes::bumpy_ellipsoid(12, Vec3(2.5, 1.5, 1.5), 0.6, 0.35).mesh, 5, 1.0},
    };
    bool pass = true;
    std::string detail;
    for (const auto& c : cases) {
        const MeshOperators ops = assemble_operators(c.mesh);
        SolverConfig cfg;
        cfg.rho = c.rho;
        const BuildResult built = build_grow_mu(ops, c.num_modes, cfg);
        std::string status;
        bool ok = false;
        if (!built.covered) {
            status = "not covered";
        } else {
            try {
                const Partition p = region_grow(c.mesh, built.modes);
                int unassigned = 0;
                for (int label : p.labels) unassigned += label == kUnassigned;
                int total = 0;
                for (const auto& part : p.parts) total += part.triangle_count;
                const bool connected = parts_edge_connected(c.mesh, p);
                ok = unassigned == 0 && connected && total == c.mesh.num_triangles();
                status = fmt("%d parts, %d unassigned, sum %d/%d%s", p.num_parts(), unassigned, total,
                             c.mesh.num_triangles(), connected ? "" : ", disconnected");
            } catch (const std::exception& e) {
                status = e.what();
            }
        }
        pass = pass && ok;
        detail += (detail.empty() ? "" : "; ") + c.name + ": " + status;
    }
    return {pass, detail};
}

Outcome patch_topology(Context& ctx)
{
    const fs::path dir = ctx.dir("patch");
    const std::string mesh = (dir / "torus.off").string();
    if (cli({"generate", "torus", mesh, "--resolution", "10"}) != 0) return {false, "generate failed"};
    const int rc = cli({"patch", mesh, "-o", (dir / "out").string(), "--num-modes", "4"});
    std::ifstream in(dir / "out" / "patches.json");
    if (!in) return {false, fmt("patch exit code %d, no patches.json", rc)};
    const json doc = json::parse(in);
    bool all = !doc["parts"].empty();
    int worst_loops = 0, worst_genus = 0;
    for (const auto& part : doc["parts"]) {
        const int genus = part["genus"].get<int>();
        const int loops = part["boundary_loops"].get<int>();
        worst_genus = std::max(worst_genus, genus);
        worst_loops = std::max(worst_loops, loops);
        all = all && genus == 0 && loops <= 2;
    }
    return {rc == 0 && all,
            fmt("exit code %d, %d patches, max genus %d, max boundary loops %d", rc,
                static_cast<int>(doc["parts"].size()), worst_genus, worst_loops)};
}

Outcome reconstruction(Context&)
{
    const TriMesh mesh = shapes::quadruped(14);
    const MeshOperators ops = assemble_operators(mesh);
    Matrix X(mesh.num_vertices(), 3);
    for (int i = 0; i < mesh.num_vertices(); ++i) X.row(i) = mesh.vertex(i).transpose();
    const EigenBasis full = mhb(ops, ops.dimension());
    double errors[3];
    const int sizes[3] = {8, 15, 30};
    for (int k = 0; k < 3; ++k) {
        const Matrix B = full.Phi.leftCols(sizes[k]);
        errors[k] = relative_error(X, reconstruct(B, ops.mass, X), ops.mass);
    }
    const double full_error = relative_error(X, reconstruct(full.Phi, ops.mass, X), ops.mass);
    return {errors[0] > errors[1] && errors[1] > errors[2] && full_error <= 1e-8,
            fmt("n=%d, error N=8 %.4f, N=15 %.4f, N=30 %.4f, full %.2e", ops.dimension(), errors[0],
                errors[1], errors[2], full_error)};
}

Outcome timing(Context&)
{
    const TriMesh mesh = shapes::quadruped(28);
    const MeshOperators ops = assemble_operators(mesh);
    auto start = Clock::now();
    const BuildResult built = build_grow_mu(ops, 6, SolverConfig{});
    const double step1 = seconds_since(start);
    double step2 = std::numeric_limits<double>::infinity();
    std::string note;
    if (built.covered) {
        start = Clock::now();
        const Partition p = region_grow(mesh, built.modes);
        step2 = seconds_since(start);
        note = fmt(", %d parts", p.num_parts());
    } else {
        note = ", modes did not cover";
    }
    return {step1 < 95.9 && step2 < 38.1,
            fmt("n=%d, Step 1b %.1f s (budget 95.9, %d rounds), Step 2 %.2f s (budget 38.1)%s",
                ops.dimension(), step1, static_cast<int>(built.rounds.size()), step2, note.c_str())};
}

Outcome determinism(Context& ctx)
{
    const fs::path dir = ctx.dir("determinism");
    const std::string mesh = (dir / "star.ply").string();
    if (cli({"generate", "star", mesh, "--resolution", "8"}) != 0) return {false, "generate failed"};
    const std::string first = (dir / "first").string();
    if (cli({"segment", mesh, "-o", first, "--num-modes", "5", "--rho", "10", "--seed", "7"}) != 0) {
        return {false, "first run failed"};
    }
    const std::string manifest = first + "/manifest.json";
    for (const char* name : {"second", "third"}) {
        if (cli({"segment", mesh, "-o", (dir / name).string(), "--config", manifest}) != 0) {
            return {false, std::string(name) + " run failed"};
        }
    }
    int compared = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(first)) {
        const std::string ext = entry.path().extension().string();
        if (ext != ".ply" && ext != ".csv") continue;
        const std::string reference = sha256_file(entry.path().string());
        for (const char* name : {"second", "third"}) {
            const fs::path other = dir / name / entry.path().filename();
            ++compared;
            if (!fs::exists(other) || sha256_file(other.string()) != reference) ++differing;
        }
    }
    return {compared > 0 && differing == 0,
            fmt("%d PLY/CSV comparisons, %d differ", compared, differing)};
}

struct Criterion
{
    int id;
    const char* title;
    std::function<Outcome(Context&)> run;
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria runner"};
    std::string workdir = (fs::temp_directory_path() / "lpcm_acceptance").string();
    std::vector<int> only;
    app.add_option("--workdir", workdir, "Scratch directory for CLI runs");
    app.add_option("--only", only, "Criterion ids to run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);
    // Keep the output to one line per criterion unless asked otherwise.
    setenv("LPCM_LOG", "warn", 0);
    spdlog::set_level(spdlog::level::warn);

    const std::vector<Criterion> criteria = {
        {1, "prox oracle suite", prox_oracle},
        {2, "orthonormality after every Psi-update", orthonormality},
        {3, "ADMM convergence on the icosphere", admm_convergence},
        {4, "E-solve residual and dense agreement", e_solve},
        {5, "octahedron brute-force comparison", brute_force},
        {6, "Step 1b mu schedule", mu_schedule},
        {7, "support growth across the mu schedule", support_trend},
        {8, "bump localization on the ellipsoid", bump_localization},
        {9, "segmentation cover", segmentation_cover},
        {10, "torus patch topology", patch_topology},
        {11, "MHB reconstruction monotonicity", reconstruction},
        {12, "Step 1b / Step 2 wall time on ~8000 vertices", timing},
        {13, "determinism of repeated runs", determinism},
    };

    Context ctx{fs::path(workdir)};
    fs::create_directories(ctx.workdir);
    const std::set<int> selected(only.begin(), only.end());
    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = Clock::now();
        Outcome out;
        try {
            out = c.run(ctx);
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.pass) ++failures;
        std::printf("[%s] criterion %2d  %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", c.id, c.title,
                    out.detail.c_str(), seconds_since(start));
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
