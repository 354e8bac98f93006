#include "lpcm/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace lpcm::shapes {

namespace {

constexpr double kPi = std::numbers::pi;

struct Icosahedron
{
    std::vector<Vec3> vertices;
    std::vector<Triangle> faces;
};

Icosahedron icosahedron()
{
    const double phi = std::numbers::phi;
    Icosahedron ico;
    ico.vertices = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& v : ico.vertices) v.normalize();
    ico.faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    return ico;
}

// Unit-sphere geodesic vertices keyed by their integer barycentric weights on
// icosahedron corners, so points on shared edges are generated once.
struct GeodesicSphere
{
    std::vector<Vec3> directions;
    std::vector<Triangle> triangles;
};

GeodesicSphere geodesic_sphere(int frequency)
{
    if (frequency < 1) throw std::invalid_argument("icosphere frequency must be >= 1");
    const Icosahedron ico = icosahedron();
    using Key = std::vector<std::pair<int, int>>;
    std::map<Key, int> index;
    GeodesicSphere out;
    const int f = frequency;

    auto vertex_id = [&](const Triangle& face, int wa, int wb, int wc) {
        Key key;
        const int w[3] = {wa, wb, wc};
        for (int k = 0; k < 3; ++k) {
            if (w[k] > 0) key.emplace_back(face[k], w[k]);
        }
        std::sort(key.begin(), key.end());
        const auto [it, inserted] = index.emplace(key, static_cast<int>(out.directions.size()));
        if (inserted) {
            Vec3 p = Vec3::Zero();
            for (const auto& [corner, weight] : key) p += weight * ico.vertices[corner];
            out.directions.push_back(p.normalized());
        }
        return it->second;
    };

    for (const auto& face : ico.faces) {
        // Row i runs from corner a towards b; column j towards c.
        auto id = [&](int i, int j) { return vertex_id(face, f - i - j, i, j); };
        for (int i = 0; i < f; ++i) {
            for (int j = 0; j < f - i; ++j) {
                out.triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                if (j < f - i - 1) {
                    out.triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
                }
            }
        }
    }
    return out;
}

} // namespace

TriMesh octahedron()
{
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<Vec3> v = {{s, 0, 0}, {-s, 0, 0}, {0, s, 0}, {0, -s, 0}, {0, 0, s}, {0, 0, -s}};
    std::vector<Triangle> t = {
        {0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
        {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5},
    };
    return TriMesh(std::move(v), std::move(t));
}

TriMesh icosphere(int frequency)
{
    GeodesicSphere g = geodesic_sphere(frequency);
    return TriMesh(std::move(g.directions), std::move(g.triangles));
}

TriMesh torus(double major_radius, double minor_radius, int nu, int nv)
{
    if (nu < 3 || nv < 3) throw std::invalid_argument("torus needs nu, nv >= 3");
    std::vector<Vec3> v;
    std::vector<Triangle> t;
    for (int i = 0; i < nu; ++i) {
        const double a = 2.0 * kPi * i / nu;
        for (int j = 0; j < nv; ++j) {
            const double b = 2.0 * kPi * j / nv;
            const double rr = major_radius + minor_radius * std::cos(b);
            v.emplace_back(rr * std::cos(a), rr * std::sin(a), minor_radius * std::sin(b));
        }
    }
    auto id = [&](int i, int j) { return ((i + nu) % nu) * nv + (j + nv) % nv; };
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return TriMesh(std::move(v), std::move(t));
}

TriMesh disk(int rings, int segments)
{
    if (rings < 1 || segments < 3) throw std::invalid_argument("disk needs rings >= 1, segments >= 3");
    std::vector<Vec3> v{Vec3::Zero()};
    std::vector<Triangle> t;
    // Ring r has r * segments vertices so triangles stay well shaped.
    std::vector<int> ring_start{0};
    for (int r = 1; r <= rings; ++r) {
        ring_start.push_back(static_cast<int>(v.size()));
        const int count = r * segments;
        const double radius = static_cast<double>(r) / rings;
        for (int k = 0; k < count; ++k) {
            const double a = 2.0 * kPi * k / count;
            v.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
        }
    }
    for (int r = 1; r <= rings; ++r) {
        const int outer_count = r * segments;
        const int inner_count = (r - 1) * segments;
        auto outer = [&](int k) { return ring_start[r] + (k % outer_count); };
        auto inner = [&](int k) { return r == 1 ? 0 : ring_start[r - 1] + (k % inner_count); };
        // Walk both rings by angle, always advancing the one that lags.
        int io = 0, ii = 0;
        while (io < outer_count || (r > 1 && ii < inner_count)) {
            const double ao = static_cast<double>(io + 1) / outer_count;
            const double ai = r == 1 ? 2.0 : static_cast<double>(ii + 1) / inner_count;
            if (ao <= ai) {
                t.push_back({inner(ii), outer(io), outer(io + 1)});
                ++io;
            } else {
                t.push_back({inner(ii), outer(io), inner(ii + 1)});
                ++ii;
            }
        }
    }
    return TriMesh(std::move(v), std::move(t));
}

TriMesh grid(int nx, int ny, double spacing)
{
    std::vector<Vec3> v;
    std::vector<Triangle> t;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) v.emplace_back(i * spacing, j * spacing, 0.0);
    }
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return TriMesh(std::move(v), std::move(t));
}

TriMesh cylinder(double radius, double height, int nu, int nv)
{
    std::vector<Vec3> v;
    std::vector<Triangle> t;
    for (int j = 0; j <= nv; ++j) {
        for (int i = 0; i < nu; ++i) {
            const double a = 2.0 * kPi * i / nu;
            v.emplace_back(radius * std::cos(a), radius * std::sin(a), height * j / nv);
        }
    }
    auto id = [&](int i, int j) { return j * nu + (i % nu); };
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nu; ++i) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return TriMesh(std::move(v), std::move(t));
}

TriMesh radial_surface(int frequency, const std::vector<Protrusion>& protrusions,
                       const Vec3& axis_scale)
{
    GeodesicSphere g = geodesic_sphere(frequency);
    for (auto& u : g.directions) {
        double r = 1.0;
        for (const auto& pr : protrusions) {
            r += pr.height * std::exp(-(1.0 - u.dot(pr.direction.normalized())) / pr.width);
        }
        u = (r * u).cwiseProduct(axis_scale);
    }
    return TriMesh(std::move(g.directions), std::move(g.triangles));
}

TriMesh star(int frequency, int count)
{
    // Spread directions with a golden-angle spiral.
    std::vector<Protrusion> pr;
    for (int k = 0; k < count; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / count;
        const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double a = k * kPi * (3.0 - std::sqrt(5.0));
        pr.push_back({Vec3(rad * std::cos(a), rad * std::sin(a), z), 1.2, 0.04});
    }
    return radial_surface(frequency, pr);
}

BumpyEllipsoid bumpy_ellipsoid(int frequency, const Vec3& semi_axes, double bump_height,
                               double bump_radius)
{
    GeodesicSphere g = geodesic_sphere(frequency);
    const Vec3 pole(0.0, 0.0, semi_axes.z());
    BumpyEllipsoid out;
    for (size_t i = 0; i < g.directions.size(); ++i) {
        const Vec3 u = g.directions[i];
        const Vec3 p = u.cwiseProduct(semi_axes);
        // Outward normal of the ellipsoid at p.
        const Vec3 normal = p.cwiseQuotient(semi_axes.cwiseProduct(semi_axes)).normalized();
        const double dist2 = (p - pole).squaredNorm();
        const double lift = bump_height * std::exp(-dist2 / (2.0 * bump_radius * bump_radius));
        g.directions[i] = p + lift * normal;
        if (lift > 0.1 * bump_height) out.bump_vertices.push_back(static_cast<int>(i));
    }
    out.mesh = TriMesh(std::move(g.directions), std::move(g.triangles));
    return out;
}

TriMesh quadruped(int frequency)
{
    const std::vector<Protrusion> parts = {
        {Vec3(0.55, 0.35, -0.75), 1.1, 0.03},  // front legs
        {Vec3(0.55, -0.35, -0.75), 1.1, 0.03},
        {Vec3(-0.55, 0.35, -0.75), 1.1, 0.03}, // hind legs
        {Vec3(-0.55, -0.35, -0.75), 1.1, 0.03},
        {Vec3(0.7, 0.0, 0.7), 1.0, 0.05},      // neck and head
        {Vec3(-1.0, 0.0, 0.15), 0.6, 0.02},    // tail
    };
    return radial_surface(frequency, parts, Vec3(1.6, 0.8, 0.9));
}

TriMesh by_name(const std::string& name, int resolution)
{
    const int r = std::max(resolution, 1);
    if (name == "octahedron") return octahedron();
    if (name == "icosphere") return icosphere(r);
    if (name == "torus") return torus(1.0, 0.35, 4 * r, 2 * r);
    if (name == "disk") return disk(r, 6);
    if (name == "grid") return grid(r, r);
    if (name == "cylinder") return cylinder(0.5, 2.0, 4 * r, 2 * r);
    if (name == "star") return star(r, 5);
    if (name == "ellipsoid") return bumpy_ellipsoid(r, Vec3(2.5, 1.5, 1.5), 0.6, 0.35).mesh;
    if (name == "quadruped") return quadruped(r);
    throw std::invalid_argument("unknown shape '" + name + "'");
}

} // namespace lpcm::shapes
