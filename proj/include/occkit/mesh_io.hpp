#pragma once

#include "occkit/geometry.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace occkit {

class MeshFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeshLoadResult {
    TriangleMesh mesh;
    MeshBuildReport report;
};

// ASCII OBJ: `v x y z` and `f i j k ...` (1-based or negative relative
// indices, `i/t/n` forms accepted). Polygons are fan-triangulated; all
// other statements are ignored.
inline MeshLoadResult parse_obj(std::istream& in) {
    std::vector<Vec3> vertices;
    std::vector<TriangleIndices> triangles;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw MeshFormatError("obj line " + std::to_string(line_no) + ": malformed vertex");
            vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<std::uint32_t> face;
            std::string token;
            while (ls >> token) {
                const auto slash = token.find('/');
                long long idx = 0;
                try {
                    idx = std::stoll(token.substr(0, slash));
                } catch (const std::exception&) {
                    throw MeshFormatError("obj line " + std::to_string(line_no) + ": bad face index '" + token + "'");
                }
                if (idx < 0) idx += static_cast<long long>(vertices.size()) + 1;
                if (idx < 1 || idx > static_cast<long long>(vertices.size()))
                    throw MeshFormatError("obj line " + std::to_string(line_no) + ": face index out of range");
                face.push_back(static_cast<std::uint32_t>(idx - 1));
            }
            if (face.size() < 3)
                throw MeshFormatError("obj line " + std::to_string(line_no) + ": face needs 3 vertices");
            for (std::size_t k = 1; k + 1 < face.size(); ++k) triangles.push_back({face[0], face[k], face[k + 1]});
        }
    }
    MeshLoadResult result;
    result.mesh = make_mesh(std::move(vertices), triangles, &result.report);
    return result;
}

inline void write_obj(std::ostream& out, const TriangleMesh& mesh) {
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

namespace detail {

struct PlyProperty {
    std::string name;
    std::string type;
    bool is_list = false;
    std::string count_type;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

inline std::size_t ply_type_size(const std::string& type) {
    if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
    if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
    if (type == "int" || type == "uint" || type == "float" || type == "int32" || type == "uint32" ||
        type == "float32")
        return 4;
    if (type == "double" || type == "float64") return 8;
    throw MeshFormatError("ply: unknown property type '" + type + "'");
}

class PlyReader {
public:
    explicit PlyReader(std::istream& in) : in_(in) {}

    void read(void* dst, std::size_t n) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw MeshFormatError("ply: truncated payload");
    }

    // Little-endian scalar of the given PLY type, widened to double/int64.
    double scalar(const std::string& type) {
        unsigned char buf[8];
        const std::size_t n = ply_type_size(type);
        read(buf, n);
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < n; ++i) bits |= std::uint64_t(buf[i]) << (8 * i);
        if (type == "float" || type == "float32") {
            float f;
            const auto b32 = static_cast<std::uint32_t>(bits);
            std::memcpy(&f, &b32, 4);
            return f;
        }
        if (type == "double" || type == "float64") {
            double d;
            std::memcpy(&d, &bits, 8);
            return d;
        }
        const bool is_signed = type == "char" || type == "int8" || type == "short" || type == "int16" ||
                               type == "int" || type == "int32";
        if (is_signed) {
            const unsigned shift = 64 - 8 * static_cast<unsigned>(n);
            return static_cast<double>(static_cast<std::int64_t>(bits << shift) >> shift);
        }
        return static_cast<double>(bits);
    }

private:
    std::istream& in_;
};

}  // namespace detail

// Binary little-endian PLY with x/y/z vertex positions and a vertex-index
// list on faces. Other elements and properties are skipped.
inline MeshLoadResult parse_ply(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw MeshFormatError("ply: missing magic");
    std::vector<detail::PlyElement> elements;
    bool binary_le = false;
    while (true) {
        if (!std::getline(in, line)) throw MeshFormatError("ply: header not terminated");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "end_header") break;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            binary_le = fmt == "binary_little_endian";
        } else if (word == "element") {
            detail::PlyElement e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (word == "property") {
            if (elements.empty()) throw MeshFormatError("ply: property before element");
            detail::PlyProperty p;
            std::string type;
            ls >> type;
            if (type == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.type >> p.name;
            } else {
                p.type = type;
                ls >> p.name;
            }
            elements.back().properties.push_back(p);
        }
    }
    if (!binary_le) throw MeshFormatError("ply: only binary_little_endian is supported");

    detail::PlyReader reader(in);
    std::vector<Vec3> vertices;
    std::vector<TriangleIndices> triangles;
    for (const auto& e : elements) {
        for (std::size_t i = 0; i < e.count; ++i) {
            Vec3 pos = Vec3::Zero();
            std::vector<std::uint32_t> face;
            for (const auto& p : e.properties) {
                if (p.is_list) {
                    const auto n = static_cast<std::size_t>(reader.scalar(p.count_type));
                    for (std::size_t k = 0; k < n; ++k) {
                        const double value = reader.scalar(p.type);
                        if (e.name == "face" && (p.name == "vertex_indices" || p.name == "vertex_index")) {
                            if (value < 0) throw MeshFormatError("ply: negative vertex index");
                            face.push_back(static_cast<std::uint32_t>(value));
                        }
                    }
                } else {
                    const double value = reader.scalar(p.type);
                    if (e.name == "vertex") {
                        if (p.name == "x") pos.x() = value;
                        if (p.name == "y") pos.y() = value;
                        if (p.name == "z") pos.z() = value;
                    }
                }
            }
            if (e.name == "vertex") vertices.push_back(pos);
            if (e.name == "face") {
                if (face.size() < 3) throw MeshFormatError("ply: face needs 3 vertices");
                for (auto idx : face)
                    if (idx >= vertices.size()) throw MeshFormatError("ply: face index out of range");
                for (std::size_t k = 1; k + 1 < face.size(); ++k)
                    triangles.push_back({face[0], face[k], face[k + 1]});
            }
        }
    }
    MeshLoadResult result;
    result.mesh = make_mesh(std::move(vertices), triangles, &result.report);
    return result;
}

inline void write_ply(std::ostream& out, const TriangleMesh& mesh) {
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << mesh.vertex_count() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "element face " << mesh.triangle_count() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    auto put32 = [&](std::uint32_t bits) {
        const char b[4] = {char(bits & 0xff), char((bits >> 8) & 0xff), char((bits >> 16) & 0xff),
                           char((bits >> 24) & 0xff)};
        out.write(b, 4);
    };
    for (const auto& v : mesh.vertices) {
        for (int a = 0; a < 3; ++a) {
            const float f = static_cast<float>(v[a]);
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            put32(bits);
        }
    }
    for (const auto& t : mesh.triangles) {
        out.put(char(3));
        for (auto idx : t) put32(idx);
    }
}

inline MeshLoadResult load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MeshFormatError("cannot open mesh " + path.string());
    auto ext = path.extension().string();
    for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    try {
        if (ext == ".obj") return parse_obj(in);
        if (ext == ".ply") return parse_ply(in);
    } catch (const std::exception& e) {
        throw MeshFormatError(path.string() + ": " + e.what());
    }
    throw MeshFormatError("unsupported mesh extension '" + ext + "' (" + path.string() + ")");
}

}  // namespace occkit
