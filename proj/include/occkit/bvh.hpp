#pragma once

#include "occkit/geometry.hpp"
#include "occkit/intersect.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace occkit {

struct RayHit {
    double t = 0.0;
    std::uint32_t triangle = 0;  // index into the soup the BVH was built from
};

// Binary BVH over a triangle soup. Median split on the longest axis of the
// centroid bounds, at most kLeafSize triangles per leaf. Immutable after
// construction.
class Bvh {
public:
    static constexpr std::size_t kLeafSize = 4;

    struct Node {
        Aabb bounds;
        std::uint32_t first = 0;  // leaf: first slot in order_; inner: right child
        std::uint32_t count = 0;  // 0 for inner nodes; left child is this + 1
        bool leaf() const { return count > 0; }
    };

    Bvh() = default;

    explicit Bvh(std::vector<Triangle> soup) : triangles_(std::move(soup)) {
        order_.resize(triangles_.size());
        std::iota(order_.begin(), order_.end(), 0u);
        if (triangles_.empty()) return;
        centroids_.reserve(triangles_.size());
        for (const auto& t : triangles_) centroids_.push_back(t.centroid());
        nodes_.reserve(2 * triangles_.size() / kLeafSize + 1);
        build(0, static_cast<std::uint32_t>(triangles_.size()));
        centroids_.clear();
        centroids_.shrink_to_fit();
    }

    static Bvh from_mesh(const TriangleMesh& mesh) {
        std::vector<Triangle> soup;
        soup.reserve(mesh.triangle_count());
        for (std::size_t i = 0; i < mesh.triangle_count(); ++i) soup.push_back(mesh.triangle(i));
        return Bvh(std::move(soup));
    }

    bool empty() const { return triangles_.empty(); }
    std::size_t triangle_count() const { return triangles_.size(); }
    std::span<const Triangle> triangles() const { return triangles_; }
    std::span<const Node> nodes() const { return nodes_; }
    std::span<const std::uint32_t> leaf_order() const { return order_; }
    Aabb bounds() const { return nodes_.empty() ? Aabb{} : nodes_.front().bounds; }

    // Nearest hit with t > 0. Equal-distance hits resolve to the smallest
    // triangle index so results do not depend on traversal order.
    std::optional<RayHit> cast_ray(const Ray& ray) const {
        if (nodes_.empty()) return std::nullopt;
        const RayBoxQuery query(ray);
        std::optional<RayHit> best;
        double best_t = std::numeric_limits<double>::infinity();

        std::uint32_t stack[64];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (!query.hits(node.bounds, 0.0, best_t)) continue;
            if (node.leaf()) {
                for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                    const std::uint32_t id = order_[i];
                    const auto hit = intersect_ray_triangle(ray, triangles_[id]);
                    if (!hit) continue;
                    if (hit->t < best_t || (hit->t == best_t && best && id < best->triangle)) {
                        best_t = hit->t;
                        best = RayHit{hit->t, id};
                    }
                }
                continue;
            }
            const std::uint32_t left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
            stack[top++] = node.first;
            stack[top++] = left;
        }
        return best;
    }

    // Indices of triangles whose bounds intersect `box` (closed test), sorted.
    std::vector<std::uint32_t> query_box(const Aabb& box) const {
        std::vector<std::uint32_t> out;
        if (nodes_.empty()) return out;
        std::vector<std::uint32_t> stack{0};
        while (!stack.empty()) {
            const std::uint32_t index = stack.back();
            stack.pop_back();
            const Node& node = nodes_[index];
            if (!node.bounds.intersects(box)) continue;
            if (node.leaf()) {
                for (std::uint32_t i = node.first; i < node.first + node.count; ++i)
                    if (triangles_[order_[i]].bounds().intersects(box)) out.push_back(order_[i]);
            } else {
                stack.push_back(node.first);
                stack.push_back(index + 1);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
        const auto index = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
        Aabb bounds, centroid_bounds;
        for (std::uint32_t i = begin; i < end; ++i) {
            bounds.extend(triangles_[order_[i]].bounds());
            centroid_bounds.extend(centroids_[order_[i]]);
        }
        nodes_[index].bounds = bounds;
        if (end - begin <= kLeafSize) {
            nodes_[index].first = begin;
            nodes_[index].count = end - begin;
            return index;
        }
        const int axis = centroid_bounds.longest_axis();
        const std::uint32_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             const double ca = centroids_[a][axis], cb = centroids_[b][axis];
                             return ca < cb || (ca == cb && a < b);
                         });
        build(begin, mid);
        const std::uint32_t right = build(mid, end);
        nodes_[index].first = right;
        nodes_[index].count = 0;
        return index;
    }

    std::vector<Triangle> triangles_;
    std::vector<std::uint32_t> order_;
    std::vector<Vec3> centroids_;
    std::vector<Node> nodes_;
};

}  // namespace occkit
