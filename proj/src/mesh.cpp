#include "lpcm/mesh.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <tuple>

namespace lpcm {

namespace {

// Direction of edge (a, b) inside triangle t: +1 if it appears as a->b,
// -1 if as b->a, 0 if absent.
int edge_direction(const Triangle& t, int a, int b)
{
    for (int k = 0; k < 3; ++k) {
        const int u = t[k];
        const int v = t[(k + 1) % 3];
        if (u == a && v == b) return 1;
        if (u == b && v == a) return -1;
    }
    return 0;
}

double raw_area(const Vec3& a, const Vec3& b, const Vec3& c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

} // namespace

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : m_vertices(std::move(vertices))
    , m_triangles(std::move(triangles))
{
    const int n = num_vertices();
    for (int t = 0; t < num_triangles(); ++t) {
        const auto& tri = m_triangles[t];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= n) {
                throw MeshError(
                    "triangle " + std::to_string(t) + ": vertex index " + std::to_string(tri[k]) +
                    " out of range [0, " + std::to_string(n) + ")");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            throw MeshError("triangle " + std::to_string(t) + " repeats a vertex index");
        }
        const Vec3& a = m_vertices[tri[0]];
        const Vec3& b = m_vertices[tri[1]];
        const Vec3& c = m_vertices[tri[2]];
        const double longest =
            std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
        const double area = raw_area(a, b, c);
        if (!(area > 1e-14 * longest)) {
            throw MeshError("triangle " + std::to_string(t) + " has zero area");
        }
    }
    build_connectivity();
    orient();
}

void TriMesh::build_connectivity()
{
    const int n = num_vertices();
    const int m = num_triangles();

    // (lo, hi, triangle, corner)
    std::vector<std::tuple<int, int, int, int>> half;
    half.reserve(3 * static_cast<size_t>(m));
    for (int t = 0; t < m; ++t) {
        for (int k = 0; k < 3; ++k) {
            int a = m_triangles[t][k];
            int b = m_triangles[t][(k + 1) % 3];
            if (a > b) std::swap(a, b);
            half.emplace_back(a, b, t, k);
        }
    }
    std::sort(half.begin(), half.end());

    m_edges.clear();
    m_edge_triangles.clear();
    m_triangle_edges.assign(m, {-1, -1, -1});
    for (size_t i = 0; i < half.size();) {
        size_t j = i;
        while (j < half.size() && std::get<0>(half[j]) == std::get<0>(half[i]) &&
               std::get<1>(half[j]) == std::get<1>(half[i])) {
            ++j;
        }
        const int count = static_cast<int>(j - i);
        if (count > 2) {
            throw MeshError(
                "non-manifold edge (" + std::to_string(std::get<0>(half[i])) + ", " +
                std::to_string(std::get<1>(half[i])) + ") shared by " + std::to_string(count) +
                " triangles");
        }
        const int e = static_cast<int>(m_edges.size());
        m_edges.emplace_back(std::get<0>(half[i]), std::get<1>(half[i]));
        std::array<int, 2> inc{std::get<2>(half[i]), -1};
        if (count == 2) {
            inc[1] = std::get<2>(half[i + 1]);
            if (inc[0] == inc[1]) {
                throw MeshError("triangle " + std::to_string(inc[0]) + " uses an edge twice");
            }
        }
        m_edge_triangles.push_back(inc);
        for (size_t h = i; h < j; ++h) {
            m_triangle_edges[std::get<2>(half[h])][std::get<3>(half[h])] = e;
        }
        i = j;
    }

    m_vertex_neighbors.assign(n, {});
    for (const auto& [a, b] : m_edges) {
        m_vertex_neighbors[a].push_back(b);
        m_vertex_neighbors[b].push_back(a);
    }
    for (auto& nb : m_vertex_neighbors) std::sort(nb.begin(), nb.end());

    m_vertex_triangles.assign(n, {});
    for (int t = 0; t < m; ++t) {
        for (int v : m_triangles[t]) m_vertex_triangles[v].push_back(t);
    }

    m_triangle_neighbors.assign(m, {});
    for (const auto& inc : m_edge_triangles) {
        if (inc[1] < 0) continue;
        m_triangle_neighbors[inc[0]].push_back(inc[1]);
        m_triangle_neighbors[inc[1]].push_back(inc[0]);
    }
    for (auto& nb : m_triangle_neighbors) std::sort(nb.begin(), nb.end());

    m_triangle_component.assign(m, -1);
    m_num_components = 0;
    for (int seed = 0; seed < m; ++seed) {
        if (m_triangle_component[seed] >= 0) continue;
        std::deque<int> queue{seed};
        m_triangle_component[seed] = m_num_components;
        while (!queue.empty()) {
            const int t = queue.front();
            queue.pop_front();
            for (int u : m_triangle_neighbors[t]) {
                if (m_triangle_component[u] < 0) {
                    m_triangle_component[u] = m_num_components;
                    queue.push_back(u);
                }
            }
        }
        ++m_num_components;
    }
}

void TriMesh::orient()
{
    const int m = num_triangles();
    std::vector<char> visited(m, 0);
    m_flipped = 0;
    for (int seed = 0; seed < m; ++seed) {
        if (visited[seed]) continue;
        visited[seed] = 1;
        std::deque<int> queue{seed};
        while (!queue.empty()) {
            const int t = queue.front();
            queue.pop_front();
            for (int k = 0; k < 3; ++k) {
                const auto& inc = m_edge_triangles[m_triangle_edges[t][k]];
                if (inc[1] < 0) continue;
                const int u = inc[0] == t ? inc[1] : inc[0];
                const int a = m_triangles[t][k];
                const int b = m_triangles[t][(k + 1) % 3];
                // Consistent neighbours traverse the shared edge as b->a.
                const bool consistent = edge_direction(m_triangles[u], a, b) == -1;
                if (!visited[u]) {
                    visited[u] = 1;
                    if (!consistent) {
                        std::swap(m_triangles[u][1], m_triangles[u][2]);
                        auto& slots = m_triangle_edges[u];
                        slots = {slots[2], slots[1], slots[0]};
                        ++m_flipped;
                    }
                    queue.push_back(u);
                } else if (!consistent) {
                    throw MeshError(
                        "mesh is not orientable (conflict between triangles " + std::to_string(t) +
                        " and " + std::to_string(u) + ")");
                }
            }
        }
    }
}

int TriMesh::find_edge(int a, int b) const
{
    if (a > b) std::swap(a, b);
    const auto it = std::lower_bound(m_edges.begin(), m_edges.end(), std::make_pair(a, b));
    if (it == m_edges.end() || *it != std::make_pair(a, b)) return -1;
    return static_cast<int>(it - m_edges.begin());
}

double triangle_area(const TriMesh& mesh, int t)
{
    const auto& tri = mesh.triangle(t);
    return raw_area(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
}

double total_area(const TriMesh& mesh)
{
    double sum = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) sum += triangle_area(mesh, t);
    return sum;
}

std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh)
{
    // Boundary half-edges keep the orientation of their single triangle.
    std::multimap<int, int> outgoing;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (int k = 0; k < 3; ++k) {
            if (mesh.is_boundary_edge(mesh.triangle_edge(t, k))) {
                outgoing.emplace(mesh.triangle(t)[k], mesh.triangle(t)[(k + 1) % 3]);
            }
        }
    }
    std::vector<std::vector<int>> loops;
    while (!outgoing.empty()) {
        auto it = outgoing.begin();
        const int start = it->first;
        std::vector<int> loop{start};
        int current = it->second;
        outgoing.erase(it);
        while (current != start) {
            loop.push_back(current);
            auto next = outgoing.find(current);
            if (next == outgoing.end()) break;
            current = next->second;
            outgoing.erase(next);
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

TopologySummary topology(const TriMesh& mesh)
{
    const int components = mesh.num_components();
    std::vector<int> faces(components, 0), edges(components, 0), verts(components, 0),
        bounds(components, 0);
    const auto& comp = mesh.triangle_components();
    for (int t = 0; t < mesh.num_triangles(); ++t) ++faces[comp[t]];
    for (int e = 0; e < mesh.num_edges(); ++e) ++edges[comp[mesh.edge_triangles()[e][0]]];
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto& star = mesh.vertex_triangles(v);
        if (star.empty()) continue; // unreferenced vertices carry no topology
        // A pinched vertex may touch several components; count it once each.
        std::vector<int> seen;
        for (int t : star) {
            if (std::find(seen.begin(), seen.end(), comp[t]) == seen.end()) {
                seen.push_back(comp[t]);
                ++verts[comp[t]];
            }
        }
    }
    for (const auto& loop : boundary_loops(mesh)) {
        const int v = loop.front();
        ++bounds[comp[mesh.vertex_triangles(v).front()]];
    }

    TopologySummary summary;
    summary.connected_component_count = components;
    for (int c = 0; c < components; ++c) {
        const int chi = verts[c] - edges[c] + faces[c];
        const int twice_genus = 2 - chi - bounds[c];
        if (twice_genus < 0 || twice_genus % 2 != 0) {
            throw TopologyError(
                "component " + std::to_string(c) + ": chi=" + std::to_string(chi) +
                ", boundaries=" + std::to_string(bounds[c]) +
                " give a non-integral or negative genus");
        }
        summary.euler_characteristic += chi;
        summary.boundary_loop_count += bounds[c];
        summary.genus += twice_genus / 2;
    }
    return summary;
}

SubMesh submesh(const TriMesh& mesh, const std::vector<int>& triangle_ids)
{
    if (triangle_ids.empty()) throw MeshError("submesh: empty triangle selection");
    SubMesh out;
    std::vector<int> remap(mesh.num_vertices(), -1);
    std::vector<char> taken(mesh.num_triangles(), 0);
    std::vector<Vec3> verts;
    std::vector<Triangle> tris;
    for (int t : triangle_ids) {
        if (t < 0 || t >= mesh.num_triangles()) {
            throw MeshError("submesh: triangle id " + std::to_string(t) + " out of range");
        }
        if (taken[t]) continue;
        taken[t] = 1;
        Triangle local{};
        for (int k = 0; k < 3; ++k) {
            const int v = mesh.triangle(t)[k];
            if (remap[v] < 0) {
                remap[v] = static_cast<int>(verts.size());
                verts.push_back(mesh.vertex(v));
                out.vertex_to_parent.push_back(v);
            }
            local[k] = remap[v];
        }
        tris.push_back(local);
        out.triangle_to_parent.push_back(t);
    }
    out.mesh = TriMesh(std::move(verts), std::move(tris));
    return out;
}

} // namespace lpcm
