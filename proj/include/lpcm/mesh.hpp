#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lpcm {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;

/// Raised for malformed or unsupported mesh input (bad indices, non-manifold
/// edges, degenerate or inconsistently orientable triangles).
class MeshError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the Euler characteristic does not yield an integral,
/// non-negative genus.
class TopologyError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct TopologySummary
{
    int euler_characteristic = 0;
    int boundary_loop_count = 0;
    int genus = 0;
    int connected_component_count = 0;

    bool operator==(const TopologySummary&) const = default;
};

/// Immutable, validated triangle mesh with derived connectivity.
///
/// Construction checks index bounds, rejects degenerate triangles and edges
/// with more than two incident faces, and makes the orientation consistent
/// by flipping triangles per connected component. Non-orientable input is
/// rejected.
class TriMesh
{
public:
    TriMesh() = default;
    TriMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

    int num_vertices() const { return static_cast<int>(m_vertices.size()); }
    int num_triangles() const { return static_cast<int>(m_triangles.size()); }
    int num_edges() const { return static_cast<int>(m_edges.size()); }

    const std::vector<Vec3>& vertices() const { return m_vertices; }
    const std::vector<Triangle>& triangles() const { return m_triangles; }
    const Vec3& vertex(int i) const { return m_vertices[i]; }
    const Triangle& triangle(int t) const { return m_triangles[t]; }

    /// Unordered edges (first < second), sorted lexicographically.
    const std::vector<std::pair<int, int>>& edges() const { return m_edges; }
    /// Incident triangles per edge; second entry is -1 on boundary edges.
    const std::vector<std::array<int, 2>>& edge_triangles() const { return m_edge_triangles; }
    /// Edge index for the directed corner edge (t, k): from corner k to k+1.
    int triangle_edge(int t, int k) const { return m_triangle_edges[t][k]; }

    /// Sorted one-ring N(X_i).
    const std::vector<int>& vertex_neighbors(int i) const { return m_vertex_neighbors[i]; }
    /// Star N_tri(X_i), ascending triangle index.
    const std::vector<int>& vertex_triangles(int i) const { return m_vertex_triangles[i]; }
    /// Edge-adjacent triangles of t, ascending; at most three.
    const std::vector<int>& triangle_neighbors(int t) const { return m_triangle_neighbors[t]; }

    /// Triangle connected component id (edge adjacency), numbered by first
    /// appearance.
    const std::vector<int>& triangle_components() const { return m_triangle_component; }
    int num_components() const { return m_num_components; }

    /// Number of triangles whose orientation was flipped at construction.
    int flipped_triangle_count() const { return m_flipped; }

    int find_edge(int a, int b) const;
    bool is_boundary_edge(int e) const { return m_edge_triangles[e][1] < 0; }

private:
    void build_connectivity();
    void orient();

    std::vector<Vec3> m_vertices;
    std::vector<Triangle> m_triangles;
    std::vector<std::pair<int, int>> m_edges;
    std::vector<std::array<int, 2>> m_edge_triangles;
    std::vector<std::array<int, 3>> m_triangle_edges;
    std::vector<std::vector<int>> m_vertex_neighbors;
    std::vector<std::vector<int>> m_vertex_triangles;
    std::vector<std::vector<int>> m_triangle_neighbors;
    std::vector<int> m_triangle_component;
    int m_num_components = 0;
    int m_flipped = 0;
};

double triangle_area(const TriMesh& mesh, int t);
double total_area(const TriMesh& mesh);

/// Closed vertex loops along boundary edges, each following the boundary
/// half-edge orientation.
std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh);

TopologySummary topology(const TriMesh& mesh);

struct SubMesh
{
    TriMesh mesh;
    std::vector<int> vertex_to_parent;
    std::vector<int> triangle_to_parent;
};

/// Induced mesh over the given parent triangles, vertices renumbered in
/// order of first use. Duplicate ids are ignored.
SubMesh submesh(const TriMesh& mesh, const std::vector<int>& triangle_ids);

} // namespace lpcm
