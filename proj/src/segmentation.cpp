#include "lpcm/segmentation.hpp"

#include "json.hpp"
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <tuple>

namespace lpcm {

std::vector<int> select_seeds(const ModeSet& modes)
{
    std::vector<int> seeds;
    for (int k = 0; k < modes.num_modes(); ++k) {
        const auto col = modes.Psi.col(k);
        int best = -1;
        double best_value = 0.0;
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            const double a = std::abs(col[i]);
            if (a > best_value) {
                best_value = a;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) throw SegmentationError("mode " + std::to_string(k) + " is identically zero");
        seeds.push_back(best);
    }
    return seeds;
}

double mode_on_triangle(const TriMesh& mesh, const ModeSet& modes, int k, int t)
{
    const Triangle& tri = mesh.triangle(t);
    return (modes.Psi(tri[0], k) + modes.Psi(tri[1], k) + modes.Psi(tri[2], k)) / 3.0;
}

std::vector<std::vector<int>> part_triangles(const std::vector<int>& labels, int num_parts)
{
    std::vector<std::vector<int>> parts(static_cast<size_t>(std::max(num_parts, 0)));
    for (size_t t = 0; t < labels.size(); ++t) {
        if (labels[t] >= 0 && labels[t] < num_parts) parts[labels[t]].push_back(static_cast<int>(t));
    }
    return parts;
}

namespace {

double edge_length(const TriMesh& mesh, int e)
{
    const auto& [a, b] = mesh.edges()[e];
    return (mesh.vertex(a) - mesh.vertex(b)).norm();
}

// Assigns unlabelled triangles in waves: each takes the label of the
// neighbouring part with the longest shared edge length (lowest label on
// ties), judged against the labels at the start of the wave.
void sweep_orphans(const TriMesh& mesh, std::vector<int>& labels)
{
    for (;;) {
        std::vector<std::pair<int, int>> updates;
        bool pending = false;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            if (labels[t] != kUnassigned) continue;
            pending = true;
            std::map<int, double> shared;
            for (int k = 0; k < 3; ++k) {
                const int e = mesh.triangle_edge(t, k);
                const auto& et = mesh.edge_triangles()[e];
                const int other = et[0] == t ? et[1] : et[0];
                if (other >= 0 && labels[other] != kUnassigned) shared[labels[other]] += edge_length(mesh, e);
            }
            int best = kUnassigned;
            double best_len = -1.0;
            for (const auto& [label, len] : shared) {
                if (len > best_len) {
                    best_len = len;
                    best = label;
                }
            }
            if (best != kUnassigned) updates.emplace_back(t, best);
        }
        if (!pending) return;
        if (updates.empty()) {
            throw SegmentationError("triangles unreachable from any seed (component without a seed)");
        }
        for (const auto& [t, label] : updates) labels[t] = label;
    }
}

// Edge-connected components of the triangles carrying `label`.
std::vector<std::vector<int>> label_components(const TriMesh& mesh, const std::vector<int>& labels,
                                               const std::vector<int>& triangles, int label)
{
    std::vector<std::vector<int>> comps;
    std::vector<char> seen(static_cast<size_t>(mesh.num_triangles()), 0);
    for (int start : triangles) {
        if (seen[start]) continue;
        std::vector<int> comp{start};
        seen[start] = 1;
        for (size_t head = 0; head < comp.size(); ++head) {
            for (int nb : mesh.triangle_neighbors(comp[head])) {
                if (!seen[nb] && labels[nb] == label) {
                    seen[nb] = 1;
                    comp.push_back(nb);
                }
            }
        }
        comps.push_back(std::move(comp));
    }
    return comps;
}

// Keeps one component per part: the one touching the seed vertex, else the
// largest. Returns true when anything was released.
bool release_detached(const TriMesh& mesh, const std::vector<int>& seeds, std::vector<int>& labels)
{
    bool released = false;
    const auto parts = part_triangles(labels, static_cast<int>(seeds.size()));
    for (int label = 0; label < static_cast<int>(parts.size()); ++label) {
        auto comps = label_components(mesh, labels, parts[label], label);
        if (comps.size() <= 1) continue;
        size_t keep = 0;
        bool seeded = false;
        for (size_t c = 0; c < comps.size(); ++c) {
            const bool touches_seed = std::any_of(comps[c].begin(), comps[c].end(), [&](int t) {
                const Triangle& tri = mesh.triangle(t);
                return std::find(tri.begin(), tri.end(), seeds[label]) != tri.end();
            });
            if (touches_seed && !seeded) {
                keep = c;
                seeded = true;
            } else if (!seeded && comps[c].size() > comps[keep].size()) {
                keep = c;
            }
        }
        for (size_t c = 0; c < comps.size(); ++c) {
            if (c == keep) continue;
            for (int t : comps[c]) labels[t] = kUnassigned;
            released = true;
        }
    }
    return released;
}

} // namespace

Partition region_grow(const TriMesh& mesh, const ModeSet& modes, double epsilon)
{
    if (modes.num_vertices() != mesh.num_vertices()) {
        throw std::invalid_argument("mode set and mesh differ in vertex count");
    }
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
    const CoverageReport cov = coverage(modes);
    if (!cov.full()) {
        throw SegmentationError(std::to_string(cov.uncovered_vertices.size()) +
                                " vertices are not covered by any mode");
    }
    const int N = modes.num_modes();
    const int m = mesh.num_triangles();

    // |psi_k(t)| per triangle and its maximum over k.
    Matrix magnitude(m, N);
    Vector top(m);
    for (int t = 0; t < m; ++t) {
        for (int k = 0; k < N; ++k) magnitude(t, k) = std::abs(mode_on_triangle(mesh, modes, k, t));
        top[t] = magnitude.row(t).maxCoeff();
    }

    Partition out;
    out.epsilon = epsilon;
    out.seeds = select_seeds(modes);
    out.labels.assign(m, kUnassigned);
    std::vector<std::deque<int>> buffers(N);
    for (int k = 0; k < N; ++k) {
        const auto& star = mesh.vertex_triangles(out.seeds[k]);
        buffers[k].assign(star.begin(), star.end());
    }

    bool active = true;
    while (active) {
        active = false;
        for (int k = 0; k < N; ++k) {
            if (buffers[k].empty()) continue;
            active = true;
            const int t = buffers[k].front();
            buffers[k].pop_front();
            if (out.labels[t] != kUnassigned) continue;
            if (std::abs(magnitude(t, k) - top[t]) > epsilon) continue;
            out.labels[t] = k;
            for (int nb : mesh.triangle_neighbors(t)) {
                if (out.labels[nb] == kUnassigned) buffers[k].push_back(nb);
            }
        }
    }

    const auto orphans = std::count(out.labels.begin(), out.labels.end(), kUnassigned);
    if (orphans > 0) spdlog::debug("region growing left {} triangles for the sweep", orphans);
    sweep_orphans(mesh, out.labels);
    for (int pass = 0; pass < 16 && release_detached(mesh, out.seeds, out.labels); ++pass) {
        sweep_orphans(mesh, out.labels);
    }
    summarize_parts(mesh, out);
    return out;
}

void summarize_parts(const TriMesh& mesh, Partition& partition)
{
    const int N = partition.num_parts();
    const auto parts = part_triangles(partition.labels, N);
    partition.parts.clear();
    for (int k = 0; k < N; ++k) {
        PartSummary s;
        s.label = k;
        s.seed = partition.seeds[k];
        s.triangle_count = static_cast<int>(parts[k].size());
        if (!parts[k].empty()) s.topology = topology(submesh(mesh, parts[k]).mesh);
        partition.parts.push_back(s);
    }
}

bool parts_edge_connected(const TriMesh& mesh, const Partition& partition)
{
    const auto parts = part_triangles(partition.labels, partition.num_parts());
    for (int k = 0; k < static_cast<int>(parts.size()); ++k) {
        if (label_components(mesh, partition.labels, parts[k], k).size() > 1) return false;
    }
    return true;
}

bool interfaces_simple(const TriMesh& mesh, const std::vector<int>& labels)
{
    // Interface edges keyed by (vertex, label pair) -> count.
    std::map<std::tuple<int, int, int>, int> incidence;
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const auto& et = mesh.edge_triangles()[e];
        if (et[1] < 0) continue;
        const int a = labels[et[0]], b = labels[et[1]];
        if (a == b) continue;
        const int lo = std::min(a, b), hi = std::max(a, b);
        ++incidence[{mesh.edges()[e].first, lo, hi}];
        ++incidence[{mesh.edges()[e].second, lo, hi}];
    }
    for (const auto& [key, count] : incidence) {
        if (count <= 2) continue;
        const int v = std::get<0>(key);
        std::vector<int> around;
        for (int t : mesh.vertex_triangles(v)) {
            if (std::find(around.begin(), around.end(), labels[t]) == around.end()) around.push_back(labels[t]);
        }
        if (around.size() < 3) return false;
    }
    return true;
}

bool PatchReport::all_pass() const
{
    return std::all_of(parts.begin(), parts.end(),
                       [](const PatchStatus& s) { return s.passes() && !s.unresolved; });
}

PatchReport patch_report(const Partition& partition)
{
    PatchReport report;
    for (const auto& p : partition.parts) {
        if (p.triangle_count == 0) continue;
        PatchStatus s;
        s.label = p.label;
        s.genus = p.topology.genus;
        s.boundary_loop_count = p.topology.boundary_loop_count;
        s.passes_genus = s.genus == 0;
        s.passes_boundaries = s.boundary_loop_count <= 2;
        report.parts.push_back(s);
    }
    return report;
}

namespace {

bool part_passes(const PartSummary& p)
{
    return p.triangle_count == 0 || (p.topology.genus == 0 && p.topology.boundary_loop_count <= 2);
}

} // namespace

RefineResult refine_patches(const TriMesh& mesh, const Partition& partition,
                            const RefineOptions& options)
{
    RefineResult result;
    Partition& part = result.partition;
    part = partition;
    summarize_parts(mesh, part);

    std::deque<std::pair<int, int>> queue; // (label, depth)
    for (const auto& p : part.parts) {
        if (!part_passes(p)) queue.emplace_back(p.label, 0);
    }
    std::vector<int> unresolved;
    while (!queue.empty()) {
        const auto [label, depth] = queue.front();
        queue.pop_front();
        if (depth >= options.max_depth) {
            unresolved.push_back(label);
            continue;
        }
        const auto tris = part_triangles(part.labels, part.num_parts())[label];
        const SubMesh sub = submesh(mesh, tris);
        spdlog::info("refining part {} ({} triangles, genus {}, {} boundaries) at depth {}", label,
                     tris.size(), part.parts[label].topology.genus,
                     part.parts[label].topology.boundary_loop_count, depth);
        const MeshOperators ops = assemble_operators(sub.mesh, options.lumping);
        const BuildResult built = build_grow_mu(ops, 2, options.solver, options.schedule);
        if (!built.covered) {
            spdlog::warn("part {} could not be covered by two modes", label);
            unresolved.push_back(label);
            continue;
        }
        const Partition child = region_grow(sub.mesh, built.modes, options.epsilon);
        const auto child_parts = part_triangles(child.labels, 2);
        if (child_parts[0].empty() || child_parts[1].empty()) {
            // No split happened; retrying would repeat the same solve.
            unresolved.push_back(label);
            continue;
        }
        const int new_label = part.num_parts();
        for (int t : child_parts[1]) part.labels[sub.triangle_to_parent[t]] = new_label;
        part.seeds[label] = sub.vertex_to_parent[child.seeds[0]];
        part.seeds.push_back(sub.vertex_to_parent[child.seeds[1]]);
        ++result.splits;
        summarize_parts(mesh, part);
        for (int l : {label, new_label}) {
            if (!part_passes(part.parts[l])) queue.emplace_back(l, depth + 1);
        }
    }

    result.report = patch_report(part);
    for (auto& s : result.report.parts) {
        s.unresolved = std::find(unresolved.begin(), unresolved.end(), s.label) != unresolved.end();
    }
    if (!unresolved.empty()) spdlog::warn("{} parts left unresolved", unresolved.size());
    return result;
}

void write_parts_json(std::ostream& out, const Partition& partition, const PatchReport* report)
{
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : partition.parts) {
        nlohmann::json j = {
            {"label", p.label},
            {"seed", p.seed},
            {"triangle_count", p.triangle_count},
            {"genus", p.topology.genus},
            {"boundary_loops", p.topology.boundary_loop_count},
            {"euler_characteristic", p.topology.euler_characteristic},
        };
        if (report) {
            for (const auto& s : report->parts) {
                if (s.label != p.label) continue;
                j["passes_genus"] = s.passes_genus;
                j["passes_boundaries"] = s.passes_boundaries;
                j["unresolved"] = s.unresolved;
            }
        }
        parts.push_back(std::move(j));
    }
    nlohmann::json doc = {{"epsilon", partition.epsilon}, {"parts", std::move(parts)}};
    out << doc.dump(2) << '\n';
}

} // namespace lpcm
