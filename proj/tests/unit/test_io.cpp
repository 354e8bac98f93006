#include "doctest.h"

#include "lpcm/mesh_io.hpp"
#include "lpcm/shapes.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lpcm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "lpcm_io_test";
    fs::create_directories(dir);
    return dir / name;
}

void check_same(const TriMesh& a, const TriMesh& b)
{
    REQUIRE(a.num_vertices() == b.num_vertices());
    REQUIRE(a.num_triangles() == b.num_triangles());
    for (int i = 0; i < a.num_vertices(); ++i) CHECK((a.vertex(i) - b.vertex(i)).norm() == 0.0);
    CHECK(a.triangles() == b.triangles());
}

} // namespace

TEST_CASE("OFF with comments and a quad")
{
    std::istringstream in("OFF\n# square\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
    const RawMesh raw = read_off(in);
    CHECK(raw.vertices.size() == 4);
    REQUIRE(raw.triangles.size() == 2);
    CHECK(raw.triangles[0] == Triangle{0, 1, 2});
    CHECK(raw.triangles[1] == Triangle{0, 2, 3});
}

TEST_CASE("OFF errors")
{
    std::istringstream bad_magic("PLY\n3 1 0\n");
    CHECK_THROWS_AS(read_off(bad_magic), MeshError);
    std::istringstream short_file("OFF\n3 1 0\n0 0 0\n1 0 0\n");
    CHECK_THROWS_AS(read_off(short_file), MeshError);
}

TEST_CASE("OBJ with texture indices and negative references")
{
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2/1/1 -1/1/1\n");
    const RawMesh raw = read_obj(in);
    REQUIRE(raw.triangles.size() == 1);
    CHECK(raw.triangles[0] == Triangle{0, 1, 2});
    std::istringstream zero("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n");
    CHECK_THROWS_AS(read_obj(zero), MeshError);
}

TEST_CASE("ASCII PLY with extra properties")
{
    std::istringstream in("ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\n"
                          "property float y\nproperty float z\nproperty uchar red\n"
                          "element face 1\nproperty list uchar int vertex_indices\n"
                          "property int flags\nend_header\n0 0 0 9\n1 0 0 9\n0 1 0 9\n3 0 1 2 7\n");
    const RawMesh raw = read_ply(in);
    CHECK(raw.vertices.size() == 3);
    REQUIRE(raw.triangles.size() == 1);
    CHECK(raw.vertices[1].x() == 1.0);
    std::istringstream big("ply\nformat binary_big_endian 1.0\nend_header\n");
    CHECK_THROWS_AS(read_ply(big), MeshError);
}

TEST_CASE("format detection")
{
    CHECK(format_from_extension("a/b.OFF") == MeshFormat::Off);
    CHECK(format_from_extension("x.ply") == MeshFormat::Ply);
    CHECK(format_from_extension("x.obj") == MeshFormat::Obj);
    CHECK_FALSE(format_from_extension("x.stl").has_value());
    std::istringstream ply("ply\nformat ascii 1.0\n");
    CHECK(sniff_format(ply) == MeshFormat::Ply);
    std::istringstream obj("# c\nv 0 0 0\n");
    CHECK(sniff_format(obj) == MeshFormat::Obj);
    std::istringstream junk("hello\n");
    CHECK_THROWS_AS(sniff_format(junk), MeshError);
}

TEST_CASE("write and read back")
{
    const TriMesh m = shapes::quadruped(4);
    write_off(scratch("q.off").string(), m);
    check_same(m, load_mesh(scratch("q.off").string()));

    MeshFields fields;
    fields.add_vertex_field("mode_0", Eigen::VectorXd::LinSpaced(m.num_vertices(), 0.0, 1.0));
    fields.face_labels.assign(m.num_triangles(), 3);
    write_ply(scratch("q.ply").string(), m, fields);
    check_same(m, load_mesh(scratch("q.ply").string()));

    // Content sniffing when the extension says nothing.
    fs::copy_file(scratch("q.ply"), scratch("q.mesh"), fs::copy_options::overwrite_existing);
    check_same(m, load_mesh(scratch("q.mesh").string()));

    write_vtk(scratch("q.vtk").string(), m, fields);
    std::ifstream vtk(scratch("q.vtk"));
    std::stringstream text;
    text << vtk.rdbuf();
    CHECK(text.str().rfind("# vtk DataFile Version", 0) == 0);
    CHECK(text.str().find("SCALARS mode_0 double") != std::string::npos);
    CHECK(text.str().find("CELL_DATA " + std::to_string(m.num_triangles())) != std::string::npos);

    CHECK_THROWS_AS(load_mesh(scratch("missing.off").string()), MeshError);
    fs::remove_all(scratch("").parent_path());
}

TEST_CASE("field length must match")
{
    const TriMesh m = shapes::octahedron();
    MeshFields fields;
    fields.add_vertex_field("f", Eigen::VectorXd::Zero(2));
    CHECK_THROWS(write_ply(scratch("bad.ply").string(), m, fields));
}
