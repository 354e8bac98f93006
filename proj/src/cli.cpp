#include "lpcm/cli.hpp"

#include "lpcm/basis_builder.hpp"
#include "lpcm/mesh_io.hpp"
#include "lpcm/segmentation.hpp"
#include "lpcm/shapes.hpp"
#include "lpcm/simd/kernels.hpp"
#include "lpcm/spectral.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#ifndef LPCM_VERSION
#define LPCM_VERSION "0.0.0"
#endif

namespace lpcm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Failures that map to the solver exit code without being exceptions of the
// numerical layers (e.g. incomplete coverage).
class PipelineError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class TopologyFailure : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig
{
    std::optional<double> mu;
    std::optional<int> num_modes;
    double p = 0.8;
    double rho = 1.0;
    double epsilon = 0.01;
    double tol = 1e-3;
    int max_iter = 5000;
    int newton_iters = 8;
    std::uint64_t seed = 1;
    std::string mass_lumping = "full";
    int jobs = 1;
    std::string format = "ply";
    std::string simd;
    int n_max = 64;
    double mu_max = 2.0 * 1048576.0;
    int max_depth = 8;
    std::string basis = "both";
    std::vector<int> reconstruct_n;

    SolverConfig solver() const
    {
        SolverConfig cfg;
        cfg.mu = mu.value_or(1.0);
        cfg.p = p;
        cfg.rho = rho;
        cfg.tol_rel_change = tol;
        cfg.max_iter = max_iter;
        cfg.newton_iters = newton_iters;
        cfg.seed = seed;
        cfg.jobs = jobs;
        return cfg;
    }

    json to_json() const
    {
        json j = {
            {"p", p},
            {"rho", rho},
            {"epsilon", epsilon},
            {"tol", tol},
            {"max_iter", max_iter},
            {"newton_iters", newton_iters},
            {"seed", seed},
            {"mass_lumping", mass_lumping},
            {"jobs", jobs},
            {"format", format},
            {"simd", simd},
            {"n_max", n_max},
            {"mu_max", mu_max},
            {"max_depth", max_depth},
        };
        j["mu"] = mu ? json(*mu) : json(nullptr);
        j["num_modes"] = num_modes ? json(*num_modes) : json(nullptr);
        if (!reconstruct_n.empty()) {
            j["basis"] = basis;
            j["N"] = reconstruct_n;
        }
        return j;
    }
};

// Raw flag storage; a flag only overrides the config when it was given.
struct Flags
{
    std::string input;
    std::string output = ".";
    std::string config;
    double mu = 0.0;
    int num_modes = 0;
    double p = 0.0, rho = 0.0, epsilon = 0.0, tol = 0.0;
    int max_iter = 0, newton_iters = 0, jobs = 0;
    std::uint64_t seed = 0;
    std::string mass_lumping, format, simd, basis;
    std::vector<int> reconstruct_n;
    bool write_geometry = false;
};

void add_solver_flags(CLI::App* sub, Flags& f)
{
    sub->add_option("input", f.input, "Input mesh (OFF, OBJ or PLY)")->required();
    sub->add_option("-o,--output", f.output, "Output directory")->capture_default_str();
    sub->add_option("--config", f.config, "JSON config file (flat object or a run manifest)");
    sub->add_option("--mu", f.mu, "Sparsity weight mu (fixes mu: grow N)")->check(CLI::PositiveNumber);
    sub->add_option("--num-modes", f.num_modes, "Number of modes N (fixes N: grow mu)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--p", f.p, "Lp exponent in (0, 1] (default 0.8)");
    sub->add_option("--rho", f.rho, "ADMM penalty (default 1)")->check(CLI::PositiveNumber);
    sub->add_option("--tol", f.tol, "Relative-change stopping tolerance (default 1e-3)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", f.max_iter, "ADMM iteration cap (default 5000)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--newton-iters", f.newton_iters, "Prox fixed-point iterations (default 8)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", f.seed, "Seed of the initial iterate (default 1)");
    sub->add_option("--mass-lumping", f.mass_lumping, "Mass lumping: full or third")
        ->check(CLI::IsMember({"full", "third"}));
    sub->add_option("--jobs", f.jobs, "Worker threads (default 1)")->check(CLI::PositiveNumber);
    sub->add_option("--format", f.format, "Mesh output format: ply or vtk")
        ->check(CLI::IsMember({"ply", "vtk"}));
    sub->add_option("--simd", f.simd, "Kernel level: scalar or avx2 (default: detected)")
        ->check(CLI::IsMember({"scalar", "avx2"}));
}

template <typename T>
void take(const json& j, const char* key, T& out)
{
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

template <typename T>
void take(const json& j, const char* key, std::optional<T>& out)
{
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

void apply_config_file(const std::string& path, RunConfig& rc)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
    const json& j = doc.contains("config") && doc["config"].is_object() ? doc["config"] : doc;
    if (!j.is_object()) throw UsageError("config '" + path + "' is not a JSON object");
    try {
        take(j, "mu", rc.mu);
        take(j, "num_modes", rc.num_modes);
        take(j, "p", rc.p);
        take(j, "rho", rc.rho);
        take(j, "epsilon", rc.epsilon);
        take(j, "tol", rc.tol);
        take(j, "max_iter", rc.max_iter);
        take(j, "newton_iters", rc.newton_iters);
        take(j, "seed", rc.seed);
        take(j, "mass_lumping", rc.mass_lumping);
        take(j, "jobs", rc.jobs);
        take(j, "format", rc.format);
        take(j, "simd", rc.simd);
        take(j, "n_max", rc.n_max);
        take(j, "mu_max", rc.mu_max);
        take(j, "max_depth", rc.max_depth);
        take(j, "basis", rc.basis);
        take(j, "N", rc.reconstruct_n);
    } catch (const json::exception& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
}

RunConfig resolve(const CLI::App* sub, const Flags& f)
{
    RunConfig rc;
    if (!f.config.empty()) apply_config_file(f.config, rc);
    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--mu")) rc.mu = f.mu;
    if (given("--num-modes")) rc.num_modes = f.num_modes;
    if (given("--p")) rc.p = f.p;
    if (given("--rho")) rc.rho = f.rho;
    if (given("--tol")) rc.tol = f.tol;
    if (given("--max-iter")) rc.max_iter = f.max_iter;
    if (given("--newton-iters")) rc.newton_iters = f.newton_iters;
    if (given("--seed")) rc.seed = f.seed;
    if (given("--mass-lumping")) rc.mass_lumping = f.mass_lumping;
    if (given("--jobs")) rc.jobs = f.jobs;
    if (given("--format")) rc.format = f.format;
    if (given("--simd")) rc.simd = f.simd;
    if (sub->get_option_no_throw("--epsilon") && given("--epsilon")) rc.epsilon = f.epsilon;
    if (sub->get_option_no_throw("--basis") && given("--basis")) rc.basis = f.basis;
    if (sub->get_option_no_throw("--N") && given("--N")) rc.reconstruct_n = f.reconstruct_n;

    try {
        validate(rc.solver());
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (rc.format != "ply" && rc.format != "vtk") throw UsageError("format must be ply or vtk");
    if (!(rc.epsilon >= 0.0)) throw UsageError("epsilon must be non-negative");
    try {
        (void)parse_mass_lumping(rc.mass_lumping);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (rc.simd.empty()) rc.simd = simd::to_string(simd::detected_level());
    try {
        simd::set_active_level(simd::parse_level(rc.simd));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    rc.simd = simd::to_string(simd::active_level());
    return rc;
}

class StageClock
{
public:
    void start(std::string name)
    {
        m_name = std::move(name);
        m_t0 = std::chrono::steady_clock::now();
    }
    void stop()
    {
        m_times[m_name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - m_t0).count();
    }
    json to_json() const { return json(m_times); }

private:
    std::string m_name;
    std::chrono::steady_clock::time_point m_t0;
    std::map<std::string, double> m_times;
};

struct Run
{
    std::string subcommand;
    Flags flags;
    RunConfig config;
    StageClock clock;
    json results = json::object();
    std::vector<std::string> outputs;
    fs::path out_dir;

    std::string path(const std::string& name)
    {
        outputs.push_back(name);
        return (out_dir / name).string();
    }

    std::string mesh_path(const std::string& stem) { return path(stem + "." + config.format); }

    void write_mesh(const std::string& file, const std::vector<Vec3>& vertices,
                    const std::vector<Triangle>& triangles, const MeshFields& fields)
    {
        if (config.format == "vtk") {
            write_vtk(file, vertices, triangles, fields);
        } else {
            write_ply(file, vertices, triangles, fields);
        }
    }

    void write_manifest()
    {
        json manifest = {
            {"tool", "lpcm"},
            {"version", LPCM_VERSION},
            {"subcommand", subcommand},
            {"input", {{"path", flags.input}, {"sha256", sha256_file(flags.input)}}},
            {"config", config.to_json()},
            {"results", results},
            {"outputs", outputs},
            {"wall_seconds", clock.to_json()},
        };
        std::ofstream out((out_dir / "manifest.json").string());
        out << manifest.dump(2) << '\n';
    }
};

struct LoadedInput
{
    TriMesh mesh;
    MeshOperators ops;
};

LoadedInput load_input(Run& run)
{
    run.clock.start("load");
    LoadedInput in;
    in.mesh = load_mesh(run.flags.input);
    run.clock.stop();
    const TopologySummary topo = topology(in.mesh);
    run.results["mesh"] = {
        {"vertices", in.mesh.num_vertices()},
        {"triangles", in.mesh.num_triangles()},
        {"genus", topo.genus},
        {"boundary_loops", topo.boundary_loop_count},
        {"components", topo.connected_component_count},
    };
    run.clock.start("operators");
    in.ops = assemble_operators(in.mesh, parse_mass_lumping(run.config.mass_lumping));
    run.clock.stop();
    return in;
}

// Step 1: grow N for fixed mu, grow mu for fixed N, or a single solve.
BuildResult compute_modes(Run& run, const LoadedInput& in)
{
    const RunConfig& rc = run.config;
    if (!rc.mu && !rc.num_modes) throw UsageError("give --mu, --num-modes, or both");
    run.clock.start("step1");
    BuildResult built;
    if (rc.mu && rc.num_modes) {
        SolverConfig cfg = rc.solver();
        const auto t0 = std::chrono::steady_clock::now();
        SolveResult solved = solve(in.ops, *rc.num_modes, cfg);
        RoundRecord rec;
        rec.round = 1;
        rec.num_modes = *rc.num_modes;
        rec.mu = cfg.mu;
        rec.iters = solved.modes.iters;
        rec.converged = solved.modes.converged;
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const CoverageReport cov = coverage(solved.modes);
        rec.covered_fraction = cov.covered_fraction;
        built.covered = cov.full();
        built.modes = std::move(solved.modes);
        built.history = std::move(solved.state.history);
        built.rounds.push_back(std::move(rec));
    } else if (rc.mu) {
        built = build_grow_N(in.ops, *rc.mu, rc.solver(), GrowNOptions{2, rc.n_max});
    } else {
        GrowMuOptions schedule;
        schedule.mu_max = rc.mu_max;
        built = build_grow_mu(in.ops, *rc.num_modes, rc.solver(), schedule);
    }
    run.clock.stop();

    const CoverageReport cov = coverage(built.modes);
    json rounds = json::array();
    for (const auto& r : built.rounds) {
        rounds.push_back({{"round", r.round}, {"N", r.num_modes}, {"mu", r.mu},
                          {"covered_fraction", r.covered_fraction}, {"iters", r.iters},
                          {"converged", r.converged}, {"wall_seconds", r.wall_seconds}});
    }
    run.results["step1"] = {
        {"N", built.modes.num_modes()},
        {"mu", built.modes.mu},
        {"converged", built.modes.converged},
        {"iters", built.modes.iters},
        {"covered_fraction", cov.covered_fraction},
        {"uncovered", cov.uncovered_vertices.size()},
        {"stationarity_residual",
         stationarity_residual(built.modes, in.ops, built.modes.mu, built.modes.p)},
        {"rounds", rounds},
    };
    spdlog::info("modes: N={} mu={} coverage={:.4f}", built.modes.num_modes(), built.modes.mu,
                 cov.covered_fraction);

    std::ofstream hist(run.path("history.csv"));
    write_history_csv(hist, built.history);
    std::ofstream rlog(run.path("rounds.csv"));
    write_round_log_csv(rlog, built.rounds);
    return built;
}

void write_modes(Run& run, const LoadedInput& in, const ModeSet& modes)
{
    MeshFields fields;
    for (int k = 0; k < modes.num_modes(); ++k) fields.add_vertex_field("mode_" + std::to_string(k), modes.Psi.col(k));
    run.write_mesh(run.mesh_path("modes"), in.mesh.vertices(), in.mesh.triangles(), fields);
}

void require_coverage(const BuildResult& built)
{
    const CoverageReport cov = coverage(built.modes);
    if (!cov.full()) {
        throw PipelineError(std::to_string(cov.uncovered_vertices.size()) +
                            " vertices not covered by any mode");
    }
}

json partition_summary(const Partition& partition)
{
    json j = json::array();
    for (const auto& p : partition.parts) {
        j.push_back({{"label", p.label}, {"seed", p.seed}, {"triangle_count", p.triangle_count},
                     {"genus", p.topology.genus}, {"boundary_loops", p.topology.boundary_loop_count}});
    }
    return j;
}

void write_partition(Run& run, const LoadedInput& in, const Partition& partition, const std::string& stem,
                     const PatchReport* report)
{
    MeshFields fields;
    fields.face_labels = partition.labels;
    run.write_mesh(run.mesh_path(stem), in.mesh.vertices(), in.mesh.triangles(), fields);
    std::ofstream js(run.path(stem + ".json"));
    write_parts_json(js, partition, report);
}

Partition segment(Run& run, const LoadedInput& in, const BuildResult& built)
{
    require_coverage(built);
    run.clock.start("step2");
    Partition partition = region_grow(in.mesh, built.modes, run.config.epsilon);
    run.clock.stop();
    run.results["step2"] = {
        {"parts", partition.num_parts()},
        {"edge_connected", parts_edge_connected(in.mesh, partition)},
        {"summary", partition_summary(partition)},
    };
    return partition;
}

int cmd_modes(Run& run)
{
    const LoadedInput in = load_input(run);
    const BuildResult built = compute_modes(run, in);
    write_modes(run, in, built.modes);
    if (!built.covered) {
        spdlog::error("coverage incomplete: {} vertices uncovered", coverage(built.modes).uncovered_vertices.size());
        return kExitSolver;
    }
    return kExitSuccess;
}

int cmd_segment(Run& run)
{
    const LoadedInput in = load_input(run);
    const BuildResult built = compute_modes(run, in);
    write_modes(run, in, built.modes);
    const Partition partition = segment(run, in, built);
    write_partition(run, in, partition, "segmentation", nullptr);
    return kExitSuccess;
}

int cmd_patch(Run& run)
{
    const LoadedInput in = load_input(run);
    const BuildResult built = compute_modes(run, in);
    write_modes(run, in, built.modes);
    const Partition partition = segment(run, in, built);
    write_partition(run, in, partition, "segmentation", nullptr);

    RefineOptions options;
    options.solver = run.config.solver();
    options.schedule.mu_max = run.config.mu_max;
    options.lumping = parse_mass_lumping(run.config.mass_lumping);
    options.epsilon = run.config.epsilon;
    options.max_depth = run.config.max_depth;
    run.clock.start("step3");
    const RefineResult refined = refine_patches(in.mesh, partition, options);
    run.clock.stop();
    write_partition(run, in, refined.partition, "patches", &refined.report);
    json statuses = json::array();
    for (const auto& s : refined.report.parts) {
        statuses.push_back({{"label", s.label}, {"genus", s.genus},
                            {"boundary_loops", s.boundary_loop_count}, {"passes", s.passes()},
                            {"unresolved", s.unresolved}});
    }
    run.results["step3"] = {
        {"parts", refined.partition.num_parts()},
        {"splits", refined.splits},
        {"all_pass", refined.report.all_pass()},
        {"report", statuses},
    };
    if (!refined.report.all_pass()) throw TopologyFailure("some patches are not genus 0 with at most two boundaries");
    return kExitSuccess;
}

int cmd_reconstruct(Run& run)
{
    const RunConfig& rc = run.config;
    if (rc.reconstruct_n.empty()) throw UsageError("--N is required");
    if (rc.basis != "mhb" && rc.basis != "lpcm" && rc.basis != "both") {
        throw UsageError("--basis must be mhb, lpcm or both");
    }
    const bool use_mhb = rc.basis != "lpcm";
    const bool use_lpcm = rc.basis != "mhb";
    if (use_lpcm && !rc.mu) throw UsageError("the lpcm basis needs --mu");
    const LoadedInput in = load_input(run);
    const int n = in.mesh.num_vertices();
    int n_top = 0;
    for (int N : rc.reconstruct_n) {
        if (N < 0 || N > n) throw UsageError("N=" + std::to_string(N) + " outside [0, " + std::to_string(n) + "]");
        n_top = std::max(n_top, N);
    }
    Matrix X(n, 3);
    for (int i = 0; i < n; ++i) X.row(i) = in.mesh.vertex(i).transpose();

    std::vector<ReconstructionRow> rows;
    auto record = [&](const std::string& name, int N, const Matrix& basis) {
        const Matrix Xr = reconstruct(basis, in.ops.mass, X);
        rows.push_back({name, N, relative_error(X, Xr, in.ops.mass)});
        if (run.flags.write_geometry) {
            std::vector<Vec3> verts(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) verts[i] = Xr.row(i).transpose();
            run.write_mesh(run.mesh_path("recon_" + name + "_" + std::to_string(N)), verts,
                           in.mesh.triangles(), {});
        }
    };
    if (use_mhb && n_top > 0) {
        run.clock.start("mhb");
        const EigenBasis eb = mhb(in.ops, n_top);
        run.clock.stop();
        for (int N : rc.reconstruct_n) record("mhb", N, eb.Phi.leftCols(N));
    } else if (use_mhb) {
        for (int N : rc.reconstruct_n) record("mhb", N, Matrix(n, 0));
    }
    if (use_lpcm) {
        run.clock.start("lpcm");
        for (int N : rc.reconstruct_n) {
            if (N == 0) {
                record("lpcm", 0, Matrix(n, 0));
                continue;
            }
            const SolveResult solved = solve(in.ops, N, rc.solver());
            record("lpcm", N, solved.modes.Psi);
        }
        run.clock.stop();
    }
    std::ofstream csv(run.path("reconstruction.csv"));
    write_reconstruction_csv(csv, rows);
    json table = json::array();
    for (const auto& r : rows) table.push_back({{"basis", r.basis}, {"N", r.num_modes}, {"rel_error", r.relative_error}});
    run.results["reconstruction"] = table;
    return kExitSuccess;
}

int cmd_eigs(Run& run)
{
    if (!run.config.num_modes) throw UsageError("--num-modes is required");
    const LoadedInput in = load_input(run);
    if (*run.config.num_modes > in.mesh.num_vertices()) throw UsageError("--num-modes exceeds vertex count");
    run.clock.start("mhb");
    const EigenBasis eb = mhb(in.ops, *run.config.num_modes);
    run.clock.stop();
    MeshFields fields;
    for (int k = 0; k < eb.size(); ++k) fields.add_vertex_field("phi_" + std::to_string(k), eb.Phi.col(k));
    run.write_mesh(run.mesh_path("eigs"), in.mesh.vertices(), in.mesh.triangles(), fields);
    std::ofstream csv(run.path("eigenvalues.csv"));
    csv << "k,lambda\n" << std::setprecision(17);
    for (int k = 0; k < eb.size(); ++k) csv << k << ',' << eb.lambdas[k] << '\n';
    run.results["eigenvalues"] = std::vector<double>(eb.lambdas.data(), eb.lambdas.data() + eb.size());
    return kExitSuccess;
}

void configure_logging()
{
    if (!spdlog::get("lpcm")) {
        auto logger = spdlog::stderr_color_mt("lpcm");
        spdlog::set_default_logger(logger);
    }
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("LPCM_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

} // namespace

std::string sha256_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

int run_cli(int argc, char** argv)
{
    configure_logging();
    CLI::App app{"Lp compressed modes on triangle meshes"};
    app.set_version_flag("--version", LPCM_VERSION);
    app.require_subcommand(1);

    Flags flags;
    std::map<std::string, CLI::App*> subs;
    subs["modes"] = app.add_subcommand("modes", "Compute compressed modes (grow N or grow mu)");
    subs["segment"] = app.add_subcommand("segment", "Modes, then region-growing segmentation");
    subs["patch"] = app.add_subcommand("patch", "Segmentation refined into genus-0 patches");
    subs["reconstruct"] = app.add_subcommand("reconstruct", "Geometry reconstruction error table");
    subs["eigs"] = app.add_subcommand("eigs", "Manifold harmonics (smallest eigenpairs)");
    for (auto& [name, sub] : subs) add_solver_flags(sub, flags);
    for (const char* name : {"segment", "patch"}) {
        subs[name]->add_option("--epsilon", flags.epsilon, "Overlap-band tolerance (default 0.01)");
    }
    subs["reconstruct"]->add_option("--basis", flags.basis, "mhb, lpcm or both")
        ->check(CLI::IsMember({"mhb", "lpcm", "both"}));
    subs["reconstruct"]->add_option("--N", flags.reconstruct_n, "Comma-separated basis sizes")->delimiter(',');
    subs["reconstruct"]->add_flag("--write-geometry", flags.write_geometry, "Write reconstructed meshes");

    std::string shape_name, shape_out;
    int resolution = 8;
    CLI::App* gen = app.add_subcommand("generate", "Write a procedural test mesh");
    gen->add_option("shape", shape_name, "octahedron, icosphere, torus, disk, grid, cylinder, star, ellipsoid, quadruped")
        ->required();
    gen->add_option("output", shape_out, "Output mesh path (.off, .obj or .ply)")->required();
    gen->add_option("--resolution", resolution, "Subdivision level")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const TriMesh mesh = shapes::by_name(shape_name, resolution);
            const auto fmt = format_from_extension(shape_out).value_or(MeshFormat::Off);
            if (fmt == MeshFormat::Ply) {
                write_ply(shape_out, mesh);
            } else {
                write_off(shape_out, mesh);
            }
            spdlog::info("wrote {} ({} vertices, {} triangles)", shape_out, mesh.num_vertices(), mesh.num_triangles());
            return kExitSuccess;
        }
        Run run;
        CLI::App* sub = nullptr;
        for (auto& [name, s] : subs) {
            if (s->parsed()) {
                run.subcommand = name;
                sub = s;
            }
        }
        run.flags = flags;
        run.config = resolve(sub, flags);
        run.out_dir = flags.output;
        fs::create_directories(run.out_dir);

        int code = kExitSuccess;
        std::string failure;
        try {
            if (run.subcommand == "modes") code = cmd_modes(run);
            if (run.subcommand == "segment") code = cmd_segment(run);
            if (run.subcommand == "patch") code = cmd_patch(run);
            if (run.subcommand == "reconstruct") code = cmd_reconstruct(run);
            if (run.subcommand == "eigs") code = cmd_eigs(run);
        } catch (const TopologyFailure& e) {
            code = kExitTopology;
            failure = e.what();
        } catch (const PipelineError& e) {
            code = kExitSolver;
            failure = e.what();
        }
        run.results["exit_code"] = code;
        if (!failure.empty()) {
            run.results["failure"] = failure;
            spdlog::error("{}", failure);
        }
        run.write_manifest();
        return code;
    } catch (const UsageError& e) {
        spdlog::error("usage: {}", e.what());
        return kExitUsage;
    } catch (const MeshError& e) {
        spdlog::error("mesh: {}", e.what());
        return kExitTopology;
    } catch (const TopologyError& e) {
        spdlog::error("topology: {}", e.what());
        return kExitTopology;
    } catch (const SolverError& e) {
        spdlog::error("solver: {}", e.what());
        return kExitSolver;
    } catch (const EigenSolverError& e) {
        spdlog::error("eigensolver: {}", e.what());
        return kExitSolver;
    } catch (const SegmentationError& e) {
        spdlog::error("segmentation: {}", e.what());
        return kExitSolver;
    } catch (const std::invalid_argument& e) {
        spdlog::error("usage: {}", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitFailure;
    }
}

int run_cli(const std::vector<std::string>& args)
{
    std::vector<std::string> storage = args;
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    argv.push_back(nullptr);
    return run_cli(static_cast<int>(storage.size()), argv.data());
}

} // namespace lpcm
