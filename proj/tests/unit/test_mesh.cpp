#include "doctest.h"

#include "lpcm/mesh.hpp"
#include "lpcm/shapes.hpp"

#include <set>

using namespace lpcm;

namespace {

TriMesh unit_square()
{
    return TriMesh({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
}

} // namespace

TEST_CASE("square connectivity")
{
    const TriMesh m = unit_square();
    CHECK(m.num_vertices() == 4);
    CHECK(m.num_triangles() == 2);
    CHECK(m.num_edges() == 5);
    CHECK(m.vertex_neighbors(0) == std::vector<int>{1, 2, 3});
    CHECK(m.vertex_triangles(2) == std::vector<int>{0, 1});
    CHECK(m.triangle_neighbors(0) == std::vector<int>{1});
    const int diag = m.find_edge(2, 0);
    REQUIRE(diag >= 0);
    CHECK_FALSE(m.is_boundary_edge(diag));
    CHECK(m.is_boundary_edge(m.find_edge(0, 1)));
    CHECK(m.find_edge(1, 3) == -1);
    CHECK(total_area(m) == doctest::Approx(1.0));
}

TEST_CASE("invalid input is rejected")
{
    CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 3}}), MeshError);
    CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 1}}), MeshError);
    // zero area
    CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 2}}), MeshError);
    // three faces on edge 0-1
    CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}},
                            {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}),
                    MeshError);
}

TEST_CASE("orientation is made consistent")
{
    const TriMesh m({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 3, 2}});
    CHECK(m.flipped_triangle_count() == 1);
    // Both faces now traverse the shared diagonal in opposite directions.
    const auto& t0 = m.triangle(0);
    const auto& t1 = m.triangle(1);
    auto directed = [](const Triangle& t, int a, int b) {
        for (int k = 0; k < 3; ++k) {
            if (t[k] == a && t[(k + 1) % 3] == b) return true;
        }
        return false;
    };
    CHECK(directed(t0, 2, 0) != directed(t1, 2, 0));
}

TEST_CASE("topology of closed and open surfaces")
{
    const auto sphere = topology(shapes::icosphere(4));
    CHECK(sphere.euler_characteristic == 2);
    CHECK(sphere.genus == 0);
    CHECK(sphere.boundary_loop_count == 0);
    CHECK(sphere.connected_component_count == 1);

    const auto ring = topology(shapes::torus(1.0, 0.3, 16, 8));
    CHECK(ring.euler_characteristic == 0);
    CHECK(ring.genus == 1);

    const TriMesh disk = shapes::disk(4, 12);
    CHECK(topology(disk).boundary_loop_count == 1);
    CHECK(topology(disk).genus == 0);
    const auto loops = boundary_loops(disk);
    REQUIRE(loops.size() == 1);
    int boundary_edges = 0;
    for (int e = 0; e < disk.num_edges(); ++e) boundary_edges += disk.is_boundary_edge(e);
    CHECK(loops[0].size() == static_cast<size_t>(boundary_edges));

    const auto tube = topology(shapes::cylinder(1.0, 2.0, 12, 4));
    CHECK(tube.boundary_loop_count == 2);
    CHECK(tube.genus == 0);
    CHECK(tube.euler_characteristic == 0);
}

TEST_CASE("icosphere vertex counts")
{
    CHECK(shapes::icosphere(1).num_vertices() == 12);
    CHECK(shapes::icosphere(8).num_vertices() == 642);
    CHECK(shapes::icosphere(8).num_triangles() == 1280);
}

TEST_CASE("two components")
{
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}};
    const TriMesh m(v, {{0, 1, 2}, {3, 4, 5}});
    CHECK(m.num_components() == 2);
    CHECK(topology(m).connected_component_count == 2);
    CHECK(topology(m).boundary_loop_count == 2);
}

TEST_CASE("submesh renumbers in order of first use")
{
    const TriMesh m = shapes::grid(3, 3);
    const SubMesh sub = submesh(m, {4, 5, 4});
    CHECK(sub.mesh.num_triangles() == 2);
    CHECK(sub.triangle_to_parent == std::vector<int>{4, 5});
    REQUIRE(sub.vertex_to_parent.size() == static_cast<size_t>(sub.mesh.num_vertices()));
    for (int t = 0; t < 2; ++t) {
        for (int k = 0; k < 3; ++k) {
            const int local = sub.mesh.triangle(t)[k];
            const int parent = sub.vertex_to_parent[local];
            const auto& pt = m.triangle(sub.triangle_to_parent[t]);
            CHECK((pt[0] == parent || pt[1] == parent || pt[2] == parent));
        }
    }
    std::set<int> used(sub.vertex_to_parent.begin(), sub.vertex_to_parent.end());
    CHECK(used.size() == sub.vertex_to_parent.size());
}

TEST_CASE("generated shapes are valid")
{
    for (const char* name : {"octahedron", "icosphere", "torus", "disk", "grid", "cylinder", "star",
                             "ellipsoid", "quadruped"}) {
        CAPTURE(name);
        const TriMesh m = shapes::by_name(name, 6);
        CHECK(m.num_triangles() > 0);
        CHECK(topology(m).connected_component_count == 1);
    }
    CHECK_THROWS(shapes::by_name("teapot", 4));
}
