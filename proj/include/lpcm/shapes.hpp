#pragma once

// Procedural test surfaces used by the test suites, the acceptance runner and
// the `generate` CLI command.

#include "lpcm/mesh.hpp"

#include <string>
#include <vector>

namespace lpcm::shapes {

/// Regular octahedron with unit edge length.
TriMesh octahedron();

/// Geodesic unit sphere: each icosahedron face split into frequency^2
/// triangles, giving 10 f^2 + 2 vertices (f = 8 -> 642, f = 16 -> 2562).
TriMesh icosphere(int frequency);

/// Closed torus with major radius R, minor radius r, nu x nv quads split
/// into triangles.
TriMesh torus(double major_radius, double minor_radius, int nu, int nv);

/// Flat unit disk in the z = 0 plane built from concentric rings.
TriMesh disk(int rings, int segments);

/// Flat regular grid of nx x ny unit squares, each split along a diagonal.
TriMesh grid(int nx, int ny, double spacing = 1.0);

/// Open cylinder of radius r and given height, nu around and nv along.
TriMesh cylinder(double radius, double height, int nu, int nv);

struct Protrusion
{
    Vec3 direction;
    double height;
    double width; // angular width, in units of 1 - cos(angle)
};

/// Star-shaped surface: icosphere vertices moved to radius
/// 1 + sum_k height_k exp(-(1 - u.c_k)/width_k), then scaled per axis.
TriMesh radial_surface(int frequency, const std::vector<Protrusion>& protrusions,
                       const Vec3& axis_scale = Vec3(1.0, 1.0, 1.0));

/// Sphere with `count` evenly spread finger-like protrusions.
TriMesh star(int frequency, int count);

struct BumpyEllipsoid
{
    TriMesh mesh;
    std::vector<int> bump_vertices; // vertices displaced by > 10% of the bump height
};

/// Ellipsoid with the given semi-axes and a Gaussian bump on the +z pole.
BumpyEllipsoid bumpy_ellipsoid(int frequency, const Vec3& semi_axes, double bump_height,
                               double bump_radius);

/// Four legs, neck with head and a tail on an elongated body.
TriMesh quadruped(int frequency);

/// Builds a shape by name: octahedron, icosphere, torus, disk, grid, cylinder,
/// star, ellipsoid, quadruped. `resolution` maps to each generator's main
/// resolution parameter.
TriMesh by_name(const std::string& name, int resolution);

} // namespace lpcm::shapes
