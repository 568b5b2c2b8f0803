#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace occkit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rigid-body transform (rotation then translation). World frame is
// right-handed and z-up.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }

    static RigidTransform translate(const Vec3& t) {
        RigidTransform r;
        r.translation = t;
        return r;
    }

    static RigidTransform rotate(const Vec3& axis, double angle) {
        RigidTransform r;
        r.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
        return r;
    }

    // Rejects matrices whose rotation block is not a proper rotation within
    // `tol` or whose bottom row differs from (0,0,0,1).
    static RigidTransform from_matrix(const Mat4& m, double tol = 1e-6) {
        for (int c = 0; c < 3; ++c) {
            if (std::abs(m(3, c)) > 1e-9)
                throw GeometryError("transform bottom row must be (0,0,0,1)");
        }
        if (std::abs(m(3, 3) - 1.0) > 1e-9)
            throw GeometryError("transform bottom row must be (0,0,0,1)");
        RigidTransform r;
        r.rotation = m.topLeftCorner<3, 3>();
        r.translation = m.topRightCorner<3, 1>();
        if (!r.is_valid(tol))
            throw GeometryError("transform rotation block is not orthonormal");
        return r;
    }

    Mat4 matrix() const {
        Mat4 m = Mat4::Identity();
        m.topLeftCorner<3, 3>() = rotation;
        m.topRightCorner<3, 1>() = translation;
        return m;
    }

    bool is_valid(double tol = 1e-9) const {
        if (!rotation.allFinite() || !translation.allFinite()) return false;
        const Mat3 gram = rotation.transpose() * rotation;
        if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
        return std::abs(rotation.determinant() - 1.0) <= tol;
    }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Vec3 apply_vector(const Vec3& d) const { return rotation * d; }

    RigidTransform inverse() const {
        RigidTransform r;
        r.rotation = rotation.transpose();
        r.translation = -(r.rotation * translation);
        return r;
    }

    // (a * b).apply(p) == a.apply(b.apply(p))
    friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
        RigidTransform r;
        r.rotation = a.rotation * b.rotation;
        r.translation = a.rotation * b.translation + a.translation;
        return r;
    }
};

struct Aabb {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    Aabb() = default;
    Aabb(const Vec3& lo, const Vec3& hi) : min(lo), max(hi) {}

    bool empty() const { return (min.array() > max.array()).any(); }

    void extend(const Vec3& p) {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    void extend(const Aabb& b) {
        min = min.cwiseMin(b.min);
        max = max.cwiseMax(b.max);
    }

    // Closed-box test: touching faces count as intersection.
    bool intersects(const Aabb& o) const {
        return (min.array() <= o.max.array()).all() && (o.min.array() <= max.array()).all();
    }
    bool contains(const Vec3& p) const {
        return (min.array() <= p.array()).all() && (p.array() <= max.array()).all();
    }
    bool contains(const Aabb& o) const {
        return (min.array() <= o.min.array()).all() && (o.max.array() <= max.array()).all();
    }

    Vec3 center() const { return 0.5 * (min + max); }
    Vec3 extent() const { return max - min; }

    int longest_axis() const {
        const Vec3 e = extent();
        if (e.x() >= e.y() && e.x() >= e.z()) return 0;
        return e.y() >= e.z() ? 1 : 2;
    }
};

struct Triangle {
    Vec3 a, b, c;

    Aabb bounds() const {
        Aabb box;
        box.extend(a);
        box.extend(b);
        box.extend(c);
        return box;
    }
    Vec3 centroid() const { return (a + b + c) / 3.0; }
};

using TriangleIndices = std::array<std::uint32_t, 3>;

// Indexed triangle mesh. Construct through make_mesh() to get the index and
// degeneracy checks; the fields stay public so algorithms can read them
// without accessor noise.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<TriangleIndices> triangles;

    std::size_t triangle_count() const { return triangles.size(); }
    std::size_t vertex_count() const { return vertices.size(); }
    bool empty() const { return triangles.empty(); }

    Triangle triangle(std::size_t i) const {
        const auto& t = triangles[i];
        return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
    }

    void append(const TriangleMesh& other) {
        const auto base = static_cast<std::uint32_t>(vertices.size());
        vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
        triangles.reserve(triangles.size() + other.triangles.size());
        for (const auto& t : other.triangles)
            triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    }
};

inline bool is_degenerate(const Triangle& t) {
    return (t.b - t.a).cross(t.c - t.a).squaredNorm() == 0.0;
}

struct MeshBuildReport {
    std::size_t dropped_degenerate = 0;
};

// Validates indices and drops zero-area triangles (counted in `report`).
inline TriangleMesh make_mesh(std::vector<Vec3> vertices, const std::vector<TriangleIndices>& triangles,
                              MeshBuildReport* report = nullptr) {
    TriangleMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.triangles.reserve(triangles.size());
    std::size_t dropped = 0;
    for (const auto& t : triangles) {
        for (auto idx : t) {
            if (idx >= mesh.vertices.size())
                throw GeometryError("triangle index " + std::to_string(idx) + " out of range (" +
                                    std::to_string(mesh.vertices.size()) + " vertices)");
        }
        for (auto idx : t) {
            if (!mesh.vertices[idx].allFinite()) throw GeometryError("non-finite vertex coordinate");
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2] ||
            is_degenerate({mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]})) {
            ++dropped;
            continue;
        }
        mesh.triangles.push_back(t);
    }
    if (report) report->dropped_degenerate += dropped;
    return mesh;
}

inline TriangleMesh transform_mesh(const TriangleMesh& mesh, const RigidTransform& t) {
    TriangleMesh out;
    out.triangles = mesh.triangles;
    out.vertices.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) out.vertices.push_back(t.apply(v));
    return out;
}

inline Aabb mesh_aabb(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) throw GeometryError("empty geometry");
    Aabb box;
    for (const auto& v : mesh.vertices) box.extend(v);
    return box;
}

// Bounds over vertices referenced by triangles only.
inline Aabb triangle_bounds(const TriangleMesh& mesh) {
    Aabb box;
    for (const auto& t : mesh.triangles)
        for (auto idx : t) box.extend(mesh.vertices[idx]);
    return box;
}

// Every undirected edge shared by exactly two triangles.
inline bool is_closed(const TriangleMesh& mesh) {
    if (mesh.triangles.empty()) return false;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(mesh.triangles.size() * 3);
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            auto a = t[e], b = t[(e + 1) % 3];
            edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(edges.begin(), edges.end());
    std::size_t i = 0;
    while (i < edges.size()) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) ++j;
        if (j - i != 2) return false;
        i = j;
    }
    return true;
}

// Axis-aligned box mesh with outward-facing triangles, optionally with each
// face subdivided into `subdiv`x`subdiv` quads.
inline TriangleMesh box_mesh(const Vec3& lo, const Vec3& hi, int subdiv = 1) {
    TriangleMesh mesh;
    const int n = std::max(subdiv, 1);
    // Each face: fixed axis, sign, and the two in-plane axes ordered so the
    // cross product points outward.
    struct Face { int axis; bool positive; int u; int v; };
    const Face faces[6] = {{0, false, 2, 1}, {0, true, 1, 2}, {1, false, 0, 2},
                           {1, true, 2, 0}, {2, false, 1, 0}, {2, true, 0, 1}};
    // Shared vertices keep the mesh closed across face seams.
    std::map<std::array<int, 3>, std::uint32_t> lookup;
    auto vertex = [&](std::array<int, 3> key) -> std::uint32_t {
        if (auto it = lookup.find(key); it != lookup.end()) return it->second;
        Vec3 p;
        for (int a = 0; a < 3; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * key[a] / n;
        const auto idx = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.push_back(p);
        lookup.emplace(key, idx);
        return idx;
    };
    for (const auto& f : faces) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                auto key = [&](int di, int dj) {
                    std::array<int, 3> k{};
                    k[f.axis] = f.positive ? n : 0;
                    k[f.u] = i + di;
                    k[f.v] = j + dj;
                    return vertex(k);
                };
                const auto a = key(0, 0), b = key(1, 0), c = key(1, 1), d = key(0, 1);
                mesh.triangles.push_back({a, b, c});
                mesh.triangles.push_back({a, c, d});
            }
        }
    }
    return mesh;
}

struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();
};

// Pinhole camera looking along +z of its local frame, x right, y down.
struct PinholeCamera {
    double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
    std::uint32_t width = 1, height = 1;
    RigidTransform cam_to_world;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0)) throw GeometryError("camera focal lengths must be positive");
        if (width == 0 || height == 0) throw GeometryError("camera raster must be non-empty");
        if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
            throw GeometryError("principal point outside the raster");
        if (!cam_to_world.is_valid(1e-6)) throw GeometryError("camera extrinsic is not rigid");
    }

    Vec3 forward() const { return cam_to_world.rotation.col(2); }
};

inline Ray pixel_ray(const PinholeCamera& cam, double u, double v) {
    if (!(u >= 0.0 && u < cam.width) || !(v >= 0.0 && v < cam.height))
        throw GeometryError("pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside raster");
    const Vec3 local((u + 0.5 - cam.cx) / cam.fx, (v + 0.5 - cam.cy) / cam.fy, 1.0);
    return {cam.cam_to_world.translation, cam.cam_to_world.apply_vector(local).normalized()};
}

}  // namespace occkit
