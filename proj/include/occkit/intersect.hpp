#pragma once

#include "occkit/geometry.hpp"

#include <limits>
#include <optional>
#include <utility>

namespace occkit {

struct TriangleHit {
    double t = std::numeric_limits<double>::infinity();
    double u = 0.0, v = 0.0;  // barycentrics of b and c
};

namespace detail {

// Top-left style ownership for an edge lying exactly on the ray. `sign`
// normalizes the projected winding so that two triangles sharing the edge
// see it in opposite directions and exactly one of them owns it.
inline bool owns_edge(double dx, double dy, double sign) {
    dx *= sign;
    dy *= sign;
    return dy > 0.0 || (dy == 0.0 && dx > 0.0);
}

}  // namespace detail

// Watertight ray/triangle intersection (shear-and-scale formulation) with
// deterministic edge ownership. Returns hits with t > 0 only.
inline std::optional<TriangleHit> intersect_ray_triangle(const Ray& ray, const Triangle& tri) {
    const Vec3& d = ray.direction;
    int kz = 0;
    if (std::abs(d.y()) > std::abs(d[kz])) kz = 1;
    if (std::abs(d.z()) > std::abs(d[kz])) kz = 2;
    int kx = (kz + 1) % 3;
    int ky = (kx + 1) % 3;
    if (d[kz] < 0.0) std::swap(kx, ky);
    if (d[kz] == 0.0) return std::nullopt;

    const double sx = d[kx] / d[kz];
    const double sy = d[ky] / d[kz];
    const double sz = 1.0 / d[kz];

    const Vec3 a = tri.a - ray.origin;
    const Vec3 b = tri.b - ray.origin;
    const Vec3 c = tri.c - ray.origin;

    const double ax = a[kx] - sx * a[kz], ay = a[ky] - sy * a[kz];
    const double bx = b[kx] - sx * b[kz], by = b[ky] - sy * b[kz];
    const double cx = c[kx] - sx * c[kz], cy = c[ky] - sy * c[kz];

    const double eu = cx * by - cy * bx;  // edge b->c
    const double ev = ax * cy - ay * cx;  // edge c->a
    const double ew = bx * ay - by * ax;  // edge a->b

    if ((eu < 0.0 || ev < 0.0 || ew < 0.0) && (eu > 0.0 || ev > 0.0 || ew > 0.0)) return std::nullopt;
    const double det = eu + ev + ew;
    if (det == 0.0) return std::nullopt;
    const double sign = det > 0.0 ? 1.0 : -1.0;

    if (eu == 0.0 && !detail::owns_edge(cx - bx, cy - by, sign)) return std::nullopt;
    if (ev == 0.0 && !detail::owns_edge(ax - cx, ay - cy, sign)) return std::nullopt;
    if (ew == 0.0 && !detail::owns_edge(bx - ax, by - ay, sign)) return std::nullopt;

    const double az = sz * a[kz], bz = sz * b[kz], cz = sz * c[kz];
    const double t_scaled = eu * az + ev * bz + ew * cz;
    if (det > 0.0 ? t_scaled <= 0.0 : t_scaled >= 0.0) return std::nullopt;

    const double inv_det = 1.0 / det;
    return TriangleHit{t_scaled * inv_det, ev * inv_det, ew * inv_det};
}

// Precomputed reciprocal direction for repeated slab tests.
struct RayBoxQuery {
    Vec3 origin;
    Vec3 inv_dir;

    explicit RayBoxQuery(const Ray& ray) : origin(ray.origin), inv_dir(ray.direction.cwiseInverse()) {}

    // Conservative slab test over [t_min, t_max]; the far bound is inflated
    // so rounding never prunes a box that contains a reported triangle hit.
    bool hits(const Aabb& box, double t_min, double t_max) const {
        constexpr double eps = std::numeric_limits<double>::epsilon() * 0.5;
        constexpr double gamma3 = (3 * eps) / (1 - 3 * eps);
        for (int axis = 0; axis < 3; ++axis) {
            double t_near = (box.min[axis] - origin[axis]) * inv_dir[axis];
            double t_far = (box.max[axis] - origin[axis]) * inv_dir[axis];
            if (t_near > t_far) std::swap(t_near, t_far);
            t_far *= 1 + 2 * gamma3;
            // NaN (0 * inf) leaves the interval unchanged.
            t_min = t_near > t_min ? t_near : t_min;
            t_max = t_far < t_max ? t_far : t_max;
            if (t_min > t_max) return false;
        }
        return true;
    }
};

// Separating-axis triangle/box overlap on closed boxes: contact counts.
inline bool triangle_box_overlap(const Triangle& tri, const Vec3& box_center, const Vec3& half) {
    const Vec3 v0 = tri.a - box_center;
    const Vec3 v1 = tri.b - box_center;
    const Vec3 v2 = tri.c - box_center;

    for (int axis = 0; axis < 3; ++axis) {
        const double lo = std::min({v0[axis], v1[axis], v2[axis]});
        const double hi = std::max({v0[axis], v1[axis], v2[axis]});
        if (lo > half[axis] || hi < -half[axis]) return false;
    }

    const Vec3 edges[3] = {v1 - v0, v2 - v1, v0 - v2};
    for (const auto& e : edges) {
        for (int axis = 0; axis < 3; ++axis) {
            const Vec3 n = Vec3::Unit(axis).cross(e);
            const double p0 = n.dot(v0), p1 = n.dot(v1), p2 = n.dot(v2);
            const double r = half.dot(n.cwiseAbs());
            if (std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r) return false;
        }
    }

    const Vec3 normal = edges[0].cross(edges[1]);
    const double dist = normal.dot(v0);
    const double r = half.dot(normal.cwiseAbs());
    return std::abs(dist) <= r;
}

inline bool triangle_box_overlap(const Triangle& tri, const Aabb& box) {
    return triangle_box_overlap(tri, box.center(), 0.5 * box.extent());
}

}  // namespace occkit
