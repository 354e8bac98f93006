#pragma once

#include "lpcm/mesh.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lpcm {

enum class MeshFormat { Off, Obj, Ply };

std::string to_string(MeshFormat format);
/// Format implied by the file extension (case-insensitive), if any.
std::optional<MeshFormat> format_from_extension(const std::string& path);
/// Guess from the leading bytes: "ply", "OFF"/"COFF"/..., otherwise OBJ-like
/// lines. Throws MeshError when nothing matches.
MeshFormat sniff_format(std::istream& in);

/// Unvalidated polygon soup as read from disk; polygons are fan-triangulated.
struct RawMesh
{
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
};

RawMesh read_off(std::istream& in);
RawMesh read_obj(std::istream& in);
/// ASCII or binary_little_endian PLY. Extra vertex/face properties and
/// other elements are skipped.
RawMesh read_ply(std::istream& in);

/// Reads and validates a mesh. The format is taken from the argument, then
/// the extension, then the file content.
TriMesh load_mesh(const std::string& path, std::optional<MeshFormat> format = std::nullopt);

/// Named per-vertex scalars and an optional per-face label.
struct MeshFields
{
    std::vector<std::string> vertex_names;
    std::vector<Eigen::VectorXd> vertex_values;
    std::vector<int> face_labels;

    void add_vertex_field(std::string name, Eigen::VectorXd values);
};

/// Binary little-endian PLY; vertex scalars as float, labels as uint.
void write_ply(const std::string& path, const std::vector<Vec3>& vertices,
               const std::vector<Triangle>& triangles, const MeshFields& fields = {});
/// Legacy ASCII VTK polydata with POINT_DATA scalars and CELL_DATA labels.
void write_vtk(const std::string& path, const std::vector<Vec3>& vertices,
               const std::vector<Triangle>& triangles, const MeshFields& fields = {});
void write_off(const std::string& path, const std::vector<Vec3>& vertices,
               const std::vector<Triangle>& triangles);

void write_ply(const std::string& path, const TriMesh& mesh, const MeshFields& fields = {});
void write_vtk(const std::string& path, const TriMesh& mesh, const MeshFields& fields = {});
void write_off(const std::string& path, const TriMesh& mesh);

} // namespace lpcm
