#pragma once

#include "occkit/bvh.hpp"
#include "occkit/geometry.hpp"
#include "occkit/grid.hpp"
#include "occkit/parallel.hpp"
#include "occkit/scene.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

namespace occkit {

// Spinning multi-beam scanner with evenly spaced elevations and azimuths.
struct LidarParams {
    std::uint32_t beams = 32;
    std::uint32_t azimuth_steps = 1024;
    double min_elevation = -30.0 * std::numbers::pi / 180.0;
    double max_elevation = 10.0 * std::numbers::pi / 180.0;
    double max_range = 80.0;

    void validate() const {
        if (beams == 0 || azimuth_steps == 0) throw GeometryError("lidar needs at least one beam and azimuth step");
        if (!(max_range > 0.0)) throw GeometryError("lidar range must be positive");
        if (!(min_elevation <= max_elevation)) throw GeometryError("lidar elevation range is inverted");
    }
};

struct LabeledPoint {
    Vec3 position;  // sensor frame
    PanopticLabel label;
};

// World-space triangle soup of a panoptic scene with per-triangle labels.
struct LabeledBvh {
    Bvh bvh;
    std::vector<PanopticLabel> labels;

    static LabeledBvh from_scene(const PanopticSceneMesh& scene) {
        std::vector<Triangle> soup;
        LabeledBvh out;
        for (const auto& e : scene.entries)
            for (std::size_t i = 0; i < e.mesh.triangle_count(); ++i) {
                soup.push_back(e.mesh.triangle(i));
                out.labels.push_back(e.label);
            }
        out.bvh = Bvh(std::move(soup));
        return out;
    }
};

// First returns of every beam, in sensor coordinates, ordered by (beam,
// azimuth).
inline std::vector<LabeledPoint> simulate_lidar(const LabeledBvh& scene, const RigidTransform& sensor_pose,
                                                const LidarParams& params = {}, unsigned threads = 1) {
    params.validate();
    const std::size_t rays = std::size_t(params.beams) * params.azimuth_steps;
    std::vector<std::optional<LabeledPoint>> hits(rays);
    const RigidTransform world_to_sensor = sensor_pose.inverse();
    parallel_chunks(0, params.beams, resolve_threads(threads), [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            const double elev = params.beams == 1 ? params.min_elevation
                                                  : params.min_elevation + (params.max_elevation - params.min_elevation) *
                                                                               double(b) / double(params.beams - 1);
            for (std::uint32_t a = 0; a < params.azimuth_steps; ++a) {
                const double az = 2.0 * std::numbers::pi * a / params.azimuth_steps;
                const Vec3 local(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az), std::sin(elev));
                const Ray ray{sensor_pose.translation, sensor_pose.apply_vector(local)};
                const auto hit = scene.bvh.cast_ray(ray);
                if (!hit || hit->t > params.max_range) continue;
                hits[b * params.azimuth_steps + a] =
                    LabeledPoint{world_to_sensor.apply(ray.origin + hit->t * ray.direction), scene.labels[hit->triangle]};
            }
        }
    });
    std::vector<LabeledPoint> out;
    for (auto& h : hits)
        if (h) out.push_back(*h);
    return out;
}

// Each voxel holding points takes the most frequent label among them; ties
// go to the smallest (semantic, instance). `points_to_grid` maps point
// coordinates into the grid frame.
inline PanopticGrid voxelize_points(const std::vector<LabeledPoint>& points, const GridSpec& spec,
                                    const RigidTransform& points_to_grid = RigidTransform::identity()) {
    spec.validate();
    std::map<LinearIndex, std::map<PanopticLabel, std::uint32_t>> votes;
    for (const auto& p : points) {
        if (p.label.free()) continue;
        const auto v = spec.world_to_voxel(points_to_grid.apply(p.position));
        if (!v) continue;
        ++votes[spec.linearize(*v)][p.label];
    }
    PanopticGrid grid(spec);
    for (const auto& [index, counts] : votes) {
        const PanopticLabel* best = nullptr;
        std::uint32_t best_count = 0;
        for (const auto& [label, n] : counts)
            if (n > best_count) {
                best = &label;
                best_count = n;
            }
        grid.set(index, *best);
    }
    return grid;
}

}  // namespace occkit
