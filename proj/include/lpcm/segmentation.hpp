#pragma once

#include "lpcm/basis_builder.hpp"
#include "lpcm/mesh.hpp"

#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace lpcm {

inline constexpr int kUnassigned = -1;

class SegmentationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct PartSummary
{
    int label = 0;
    int seed = -1;
    int triangle_count = 0;
    TopologySummary topology;
};

struct Partition
{
    std::vector<int> labels;   // per triangle
    std::vector<int> seeds;    // per part, vertex index
    std::vector<PartSummary> parts;
    double epsilon = 0.0;

    int num_parts() const { return static_cast<int>(seeds.size()); }
};

/// s_k = argmax_i |psi_k(X_i)|, lowest index on ties. Throws
/// SegmentationError for an all-zero column.
std::vector<int> select_seeds(const ModeSet& modes);

/// Mean of the three vertex values of mode k on triangle t.
double mode_on_triangle(const TriMesh& mesh, const ModeSet& modes, int k, int t);

/// Round-robin region growing from the seed stars. A triangle popped from
/// buffer k joins part k when ||psi_k(t)| - max_i |psi_i(t)|| <= epsilon.
/// Leftover triangles are then swept into the adjacent part sharing the
/// longest boundary, and parts are made edge-connected.
/// Throws SegmentationError when the modes do not cover the mesh.
Partition region_grow(const TriMesh& mesh, const ModeSet& modes, double epsilon = 0.01);

/// Recomputes parts[] (triangle counts and topology) from labels and seeds.
void summarize_parts(const TriMesh& mesh, Partition& partition);

/// Triangle ids per label, ascending.
std::vector<std::vector<int>> part_triangles(const std::vector<int>& labels, int num_parts);

/// Every part is a single edge-connected triangle set (empty parts pass).
bool parts_edge_connected(const TriMesh& mesh, const Partition& partition);

/// Interfaces between two parts are simple paths: away from junction
/// vertices (touching three or more parts) a vertex has at most two edges on
/// any one interface.
bool interfaces_simple(const TriMesh& mesh, const std::vector<int>& labels);

struct PatchStatus
{
    int label = 0;
    int genus = 0;
    int boundary_loop_count = 0;
    bool passes_genus = false;      // genus 0
    bool passes_boundaries = false; // at most two boundary loops
    bool unresolved = false;

    bool passes() const { return passes_genus && passes_boundaries; }
};

struct PatchReport
{
    std::vector<PatchStatus> parts;

    bool all_pass() const;
};

PatchReport patch_report(const Partition& partition);

struct RefineOptions
{
    SolverConfig solver;
    GrowMuOptions schedule;
    MassLumping lumping = MassLumping::Full;
    double epsilon = 0.01;
    int max_depth = 8;
};

struct RefineResult
{
    Partition partition;
    PatchReport report;
    int splits = 0;
};

/// Splits every part that is not genus 0 with at most two boundary loops by
/// running the mu schedule with two modes on its submesh and growing two
/// regions there. The first child keeps the parent label, the second gets the
/// next free label. Parts still failing at max_depth are flagged unresolved.
RefineResult refine_patches(const TriMesh& mesh, const Partition& partition,
                            const RefineOptions& options);

/// JSON array of {label, seed, triangle_count, genus, boundary_loops,
/// euler_characteristic}.
void write_parts_json(std::ostream& out, const Partition& partition,
                      const PatchReport* report = nullptr);

} // namespace lpcm
