#include "lpcm/mesh_io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace lpcm {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void fan_triangulate(const std::vector<int>& poly, std::vector<Triangle>& out, int line)
{
    if (poly.size() < 3) {
        throw MeshError("face with fewer than 3 vertices near line " + std::to_string(line));
    }
    for (size_t k = 1; k + 1 < poly.size(); ++k) out.push_back({poly[0], poly[k], poly[k + 1]});
}

// Next line that is neither blank nor a comment.
bool next_content_line(std::istream& in, std::string& line, int& lineno)
{
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}

// ---- PLY ----------------------------------------------------------------

enum class PlyType { Int8, Uint8, Int16, Uint16, Int32, Uint32, Float32, Float64 };

PlyType parse_ply_type(const std::string& name)
{
    static const std::pair<const char*, PlyType> table[] = {
        {"char", PlyType::Int8},      {"int8", PlyType::Int8},      {"uchar", PlyType::Uint8},
        {"uint8", PlyType::Uint8},    {"short", PlyType::Int16},    {"int16", PlyType::Int16},
        {"ushort", PlyType::Uint16},  {"uint16", PlyType::Uint16},  {"int", PlyType::Int32},
        {"int32", PlyType::Int32},    {"uint", PlyType::Uint32},    {"uint32", PlyType::Uint32},
        {"float", PlyType::Float32},  {"float32", PlyType::Float32}, {"double", PlyType::Float64},
        {"float64", PlyType::Float64},
    };
    for (const auto& [n, t] : table) {
        if (name == n) return t;
    }
    throw MeshError("unknown PLY property type '" + name + "'");
}

struct PlyProperty
{
    std::string name;
    PlyType type = PlyType::Float32;
    bool is_list = false;
    PlyType count_type = PlyType::Uint8;
};

struct PlyElement
{
    std::string name;
    long long count = 0;
    std::vector<PlyProperty> properties;
};

template <typename T>
T read_le(std::istream& in)
{
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
        throw MeshError("unexpected end of binary PLY data");
    }
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

double read_binary_value(std::istream& in, PlyType t)
{
    switch (t) {
    case PlyType::Int8: return read_le<std::int8_t>(in);
    case PlyType::Uint8: return read_le<std::uint8_t>(in);
    case PlyType::Int16: return read_le<std::int16_t>(in);
    case PlyType::Uint16: return read_le<std::uint16_t>(in);
    case PlyType::Int32: return read_le<std::int32_t>(in);
    case PlyType::Uint32: return read_le<std::uint32_t>(in);
    case PlyType::Float32: return read_le<float>(in);
    case PlyType::Float64: return read_le<double>(in);
    }
    return 0.0;
}

// Scalar source for PLY bodies: whitespace tokens or little-endian binary.
class PlyValueReader
{
public:
    PlyValueReader(std::istream& in, bool binary)
        : m_in(in)
        , m_binary(binary)
    {}

    double scalar(PlyType t)
    {
        if (m_binary) return read_binary_value(m_in, t);
        double v;
        if (!(m_in >> v)) throw MeshError("malformed ASCII PLY data");
        return v;
    }

private:
    std::istream& m_in;
    bool m_binary;
};

void to_index(double v, std::vector<int>& poly)
{
    if (v < 0 || v > std::numeric_limits<int>::max() || v != std::floor(v)) {
        throw MeshError("invalid PLY face index " + std::to_string(v));
    }
    poly.push_back(static_cast<int>(v));
}

} // namespace

std::string to_string(MeshFormat format)
{
    switch (format) {
    case MeshFormat::Off: return "off";
    case MeshFormat::Obj: return "obj";
    case MeshFormat::Ply: return "ply";
    }
    return "?";
}

std::optional<MeshFormat> format_from_extension(const std::string& path)
{
    const auto dot = path.rfind('.');
    if (dot == std::string::npos) return std::nullopt;
    const std::string ext = lower(path.substr(dot + 1));
    if (ext == "off") return MeshFormat::Off;
    if (ext == "obj") return MeshFormat::Obj;
    if (ext == "ply") return MeshFormat::Ply;
    return std::nullopt;
}

MeshFormat sniff_format(std::istream& in)
{
    const auto start = in.tellg();
    std::string token;
    in >> token;
    in.clear();
    in.seekg(start);
    if (token == "ply") return MeshFormat::Ply;
    if (token.size() >= 3 && token.compare(token.size() - 3, 3, "OFF") == 0) return MeshFormat::Off;
    if (token == "v" || token == "#" || token == "o" || token == "g" || token == "mtllib") {
        return MeshFormat::Obj;
    }
    throw MeshError("cannot determine mesh format");
}

RawMesh read_off(std::istream& in)
{
    RawMesh raw;
    std::string line;
    int lineno = 0;
    if (!next_content_line(in, line, lineno)) throw MeshError("empty OFF file");
    std::istringstream header(line);
    std::string magic;
    header >> magic;
    if (magic.size() < 3 || magic.compare(magic.size() - 3, 3, "OFF") != 0) {
        throw MeshError("missing OFF header");
    }
    long long nv = -1, nf = -1;
    // Counts may share the header line.
    if (!(header >> nv >> nf)) {
        if (!next_content_line(in, line, lineno)) throw MeshError("missing OFF counts");
        std::istringstream counts(line);
        if (!(counts >> nv >> nf)) throw MeshError("malformed OFF counts");
    }
    if (nv < 0 || nf < 0) throw MeshError("negative OFF counts");
    raw.vertices.reserve(nv);
    for (long long i = 0; i < nv; ++i) {
        if (!next_content_line(in, line, lineno)) throw MeshError("truncated OFF vertex list");
        std::istringstream ls(line);
        Vec3 p;
        if (!(ls >> p.x() >> p.y() >> p.z())) {
            throw MeshError("malformed OFF vertex at line " + std::to_string(lineno));
        }
        raw.vertices.push_back(p);
    }
    std::vector<int> poly;
    for (long long f = 0; f < nf; ++f) {
        if (!next_content_line(in, line, lineno)) throw MeshError("truncated OFF face list");
        std::istringstream ls(line);
        int k = 0;
        if (!(ls >> k) || k < 0) throw MeshError("malformed OFF face at line " + std::to_string(lineno));
        poly.assign(k, 0);
        for (int& idx : poly) {
            if (!(ls >> idx)) throw MeshError("malformed OFF face at line " + std::to_string(lineno));
        }
        fan_triangulate(poly, raw.triangles, lineno);
    }
    return raw;
}

RawMesh read_obj(std::istream& in)
{
    RawMesh raw;
    std::string line;
    int lineno = 0;
    std::vector<int> poly;
    while (next_content_line(in, line, lineno)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z())) {
                throw MeshError("malformed OBJ vertex at line " + std::to_string(lineno));
            }
            raw.vertices.push_back(p);
        } else if (tag == "f") {
            poly.clear();
            std::string tok;
            while (ls >> tok) {
                // v, v/vt, v//vn or v/vt/vn; only the position index matters.
                const std::string head = tok.substr(0, tok.find('/'));
                long long idx = 0;
                try {
                    idx = std::stoll(head);
                } catch (const std::exception&) {
                    throw MeshError("malformed OBJ face at line " + std::to_string(lineno));
                }
                if (idx == 0) throw MeshError("OBJ index 0 at line " + std::to_string(lineno));
                const long long resolved =
                    idx > 0 ? idx - 1 : static_cast<long long>(raw.vertices.size()) + idx;
                poly.push_back(static_cast<int>(resolved));
            }
            fan_triangulate(poly, raw.triangles, lineno);
        }
    }
    return raw;
}

RawMesh read_ply(std::istream& in)
{
    std::string line;
    std::getline(in, line);
    if (line.rfind("ply", 0) != 0) throw MeshError("missing PLY magic");
    bool binary = false;
    std::vector<PlyElement> elements;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii") {
                binary = false;
            } else if (fmt == "binary_little_endian") {
                binary = true;
            } else {
                throw MeshError("unsupported PLY format '" + fmt + "'");
            }
        } else if (kw == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            if (e.count < 0) throw MeshError("negative PLY element count");
            elements.push_back(e);
        } else if (kw == "property") {
            if (elements.empty()) throw MeshError("PLY property before any element");
            PlyProperty prop;
            std::string type;
            ls >> type;
            if (type == "list") {
                std::string count_type, item_type;
                ls >> count_type >> item_type >> prop.name;
                prop.is_list = true;
                prop.count_type = parse_ply_type(count_type);
                prop.type = parse_ply_type(item_type);
            } else {
                prop.type = parse_ply_type(type);
                ls >> prop.name;
            }
            elements.back().properties.push_back(prop);
        } else if (kw == "end_header") {
            header_done = true;
            break;
        }
    }
    if (!header_done) throw MeshError("PLY header not terminated");

    RawMesh raw;
    PlyValueReader reader(in, binary);
    std::vector<int> poly;
    for (const auto& e : elements) {
        int ix = -1, iy = -1, iz = -1, iface = -1;
        for (size_t k = 0; k < e.properties.size(); ++k) {
            const auto& name = e.properties[k].name;
            if (name == "x") ix = static_cast<int>(k);
            if (name == "y") iy = static_cast<int>(k);
            if (name == "z") iz = static_cast<int>(k);
            if (e.properties[k].is_list && (name == "vertex_indices" || name == "vertex_index")) {
                iface = static_cast<int>(k);
            }
        }
        const bool is_vertex = e.name == "vertex";
        const bool is_face = e.name == "face";
        if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) throw MeshError("PLY vertex lacks x/y/z");
        if (is_face && iface < 0) throw MeshError("PLY face lacks vertex_indices");
        for (long long r = 0; r < e.count; ++r) {
            Vec3 p = Vec3::Zero();
            for (size_t k = 0; k < e.properties.size(); ++k) {
                const auto& prop = e.properties[k];
                if (prop.is_list) {
                    const double c = reader.scalar(prop.count_type);
                    if (c < 0) throw MeshError("negative PLY list length");
                    const auto count = static_cast<long long>(c);
                    const bool keep = is_face && static_cast<int>(k) == iface;
                    if (keep) poly.clear();
                    for (long long j = 0; j < count; ++j) {
                        const double v = reader.scalar(prop.type);
                        if (keep) to_index(v, poly);
                    }
                    if (keep) fan_triangulate(poly, raw.triangles, static_cast<int>(r));
                } else {
                    const double v = reader.scalar(prop.type);
                    if (is_vertex) {
                        if (static_cast<int>(k) == ix) p.x() = v;
                        if (static_cast<int>(k) == iy) p.y() = v;
                        if (static_cast<int>(k) == iz) p.z() = v;
                    }
                }
            }
            if (is_vertex) raw.vertices.push_back(p);
        }
    }
    return raw;
}

TriMesh load_mesh(const std::string& path, std::optional<MeshFormat> format)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MeshError("cannot open '" + path + "'");
    if (!format) format = format_from_extension(path);
    if (!format) format = sniff_format(in);
    RawMesh raw;
    switch (*format) {
    case MeshFormat::Off: raw = read_off(in); break;
    case MeshFormat::Obj: raw = read_obj(in); break;
    case MeshFormat::Ply: raw = read_ply(in); break;
    }
    TriMesh mesh(std::move(raw.vertices), std::move(raw.triangles));
    spdlog::info("loaded {} ({}): {} vertices, {} triangles", path, to_string(*format),
                 mesh.num_vertices(), mesh.num_triangles());
    if (mesh.flipped_triangle_count() > 0) {
        spdlog::warn("flipped {} triangles for consistent orientation", mesh.flipped_triangle_count());
    }
    return mesh;
}

void MeshFields::add_vertex_field(std::string name, Eigen::VectorXd values)
{
    vertex_names.push_back(std::move(name));
    vertex_values.push_back(std::move(values));
}

namespace {

void check_fields(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles,
                  const MeshFields& fields)
{
    if (fields.vertex_names.size() != fields.vertex_values.size()) {
        throw std::invalid_argument("vertex field names and values differ in count");
    }
    for (const auto& v : fields.vertex_values) {
        if (v.size() != static_cast<Eigen::Index>(vertices.size())) {
            throw std::invalid_argument("vertex field length differs from vertex count");
        }
    }
    if (!fields.face_labels.empty() && fields.face_labels.size() != triangles.size()) {
        throw std::invalid_argument("face label count differs from triangle count");
    }
}

std::ofstream open_output(const std::string& path, bool binary)
{
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

template <typename T>
void write_le(std::ostream& out, T value)
{
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

} // namespace

void write_ply(const std::string& path, const std::vector<Vec3>& vertices,
               const std::vector<Triangle>& triangles, const MeshFields& fields)
{
    check_fields(vertices, triangles, fields);
    std::ofstream out = open_output(path, true);
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << vertices.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    for (const auto& name : fields.vertex_names) out << "property float " << name << "\n";
    out << "element face " << triangles.size() << "\n";
    out << "property list uchar uint vertex_indices\n";
    if (!fields.face_labels.empty()) out << "property uint label\n";
    out << "end_header\n";
    for (size_t i = 0; i < vertices.size(); ++i) {
        for (int c = 0; c < 3; ++c) write_le<double>(out, vertices[i][c]);
        for (const auto& f : fields.vertex_values) write_le<float>(out, static_cast<float>(f[i]));
    }
    for (size_t t = 0; t < triangles.size(); ++t) {
        write_le<std::uint8_t>(out, 3);
        for (int c = 0; c < 3; ++c) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(triangles[t][c]));
        if (!fields.face_labels.empty()) {
            write_le<std::uint32_t>(out, static_cast<std::uint32_t>(fields.face_labels[t]));
        }
    }
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_vtk(const std::string& path, const std::vector<Vec3>& vertices,
               const std::vector<Triangle>& triangles, const MeshFields& fields)
{
    check_fields(vertices, triangles, fields);
    std::ofstream out = open_output(path, false);
    out << std::setprecision(17);
    out << "# vtk DataFile Version 3.0\nlpcm\nASCII\nDATASET POLYDATA\n";
    out << "POINTS " << vertices.size() << " double\n";
    for (const auto& v : vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    out << "POLYGONS " << triangles.size() << ' ' << 4 * triangles.size() << '\n';
    for (const auto& t : triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    if (!fields.vertex_names.empty()) {
        out << "POINT_DATA " << vertices.size() << '\n';
        for (size_t k = 0; k < fields.vertex_names.size(); ++k) {
            out << "SCALARS " << fields.vertex_names[k] << " double 1\nLOOKUP_TABLE default\n";
            const auto& f = fields.vertex_values[k];
            for (Eigen::Index i = 0; i < f.size(); ++i) out << f[i] << '\n';
        }
    }
    if (!fields.face_labels.empty()) {
        out << "CELL_DATA " << triangles.size() << '\n';
        out << "SCALARS label int 1\nLOOKUP_TABLE default\n";
        for (int l : fields.face_labels) out << l << '\n';
    }
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_off(const std::string& path, const std::vector<Vec3>& vertices,
               const std::vector<Triangle>& triangles)
{
    std::ofstream out = open_output(path, false);
    out << std::setprecision(17);
    out << "OFF\n" << vertices.size() << ' ' << triangles.size() << " 0\n";
    for (const auto& v : vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_ply(const std::string& path, const TriMesh& mesh, const MeshFields& fields)
{
    write_ply(path, mesh.vertices(), mesh.triangles(), fields);
}

void write_vtk(const std::string& path, const TriMesh& mesh, const MeshFields& fields)
{
    write_vtk(path, mesh.vertices(), mesh.triangles(), fields);
}

void write_off(const std::string& path, const TriMesh& mesh)
{
    write_off(path, mesh.vertices(), mesh.triangles());
}

} // namespace lpcm
