#pragma once

#include "occkit/gait.hpp"
#include "occkit/geometry.hpp"
#include "occkit/scene.hpp"
#include "occkit/taxonomy.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace occkit {

struct CountRange {
    int min = 0;
    int max = 0;
};

struct SynthParams {
    CountRange buildings{2, 4};
    CountRange cars{2, 5};
    CountRange pedestrians{1, 3};
    CountRange poles{2, 4};
    CountRange vegetation{1, 3};
    bool glass_pane = true;
    // Terrain heightfield resolution per side; the slab has
    // 4 * cells^2 + 8 * cells triangles.
    std::uint32_t terrain_cells = 24;
    double x_min = -30.0, x_max = 56.0;
    double y_half = 30.0;
    double lidar_height = 1.6;
};

struct SyntheticScene {
    SceneManifest manifest;
    MeshLibrary library;
    RigidTransform lidar_pose;
};

namespace detail {

// Portable uniform draw; std distributions differ between standard libraries.
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * double(engine_() >> 11) * 0x1.0p-53; }
    int count(CountRange r) {
        if (r.max <= r.min) return r.min;
        return r.min + int(engine_() % std::uint64_t(r.max - r.min + 1));
    }

private:
    std::mt19937_64 engine_;
};

// Closed slab: heightfield top over [x0,x1]x[y0,y1], flat bottom at `bottom`.
inline TriangleMesh heightfield_slab(double x0, double x1, double y0, double y1, double bottom, std::uint32_t cells,
                                     std::uint64_t seed) {
    const std::uint32_t n = std::max<std::uint32_t>(cells, 1);
    SynthRng rng(seed);
    const double a = rng.uniform(0.08, 0.16), fx = rng.uniform(0.05, 0.2), fy = rng.uniform(0.05, 0.2);
    auto height = [&](double x, double y) { return -0.22 - a * (0.5 + 0.5 * std::sin(fx * x) * std::cos(fy * y)); };

    std::vector<Vec3> verts;
    const std::uint32_t row = n + 1;
    for (int layer = 0; layer < 2; ++layer)
        for (std::uint32_t j = 0; j <= n; ++j)
            for (std::uint32_t i = 0; i <= n; ++i) {
                const double x = x0 + (x1 - x0) * i / n, y = y0 + (y1 - y0) * j / n;
                verts.emplace_back(x, y, layer == 0 ? height(x, y) : bottom);
            }
    auto top = [&](std::uint32_t i, std::uint32_t j) { return j * row + i; };
    auto bot = [&](std::uint32_t i, std::uint32_t j) { return row * row + j * row + i; };

    std::vector<TriangleIndices> tris;
    for (std::uint32_t j = 0; j < n; ++j)
        for (std::uint32_t i = 0; i < n; ++i) {
            tris.push_back({top(i, j), top(i + 1, j), top(i + 1, j + 1)});
            tris.push_back({top(i, j), top(i + 1, j + 1), top(i, j + 1)});
            tris.push_back({bot(i, j), bot(i + 1, j + 1), bot(i + 1, j)});
            tris.push_back({bot(i, j), bot(i, j + 1), bot(i + 1, j + 1)});
        }
    auto wall = [&](std::uint32_t ta, std::uint32_t tb, std::uint32_t ba, std::uint32_t bb) {
        tris.push_back({ba, bb, tb});
        tris.push_back({ba, tb, ta});
    };
    for (std::uint32_t k = 0; k < n; ++k) {
        wall(top(k, 0), top(k + 1, 0), bot(k, 0), bot(k + 1, 0));
        wall(top(n, k), top(n, k + 1), bot(n, k), bot(n, k + 1));
        wall(top(k + 1, n), top(k, n), bot(k + 1, n), bot(k, n));
        wall(top(0, k + 1), top(0, k), bot(0, k + 1), bot(0, k));
    }
    return make_mesh(std::move(verts), tris);
}

inline RigidTransform place(double x, double y, double z, double yaw) {
    return RigidTransform::translate({x, y, z}) * RigidTransform::rotate(Vec3::UnitZ(), yaw);
}

}  // namespace detail

// Street scene around a LiDAR at (0, 0, lidar_height): terrain slab, road and
// sidewalks (stuff), buildings, cars, pedestrians, poles, vegetation and an
// optional transparent pane. Thing instances are numbered densely from 1.
inline SyntheticScene generate_synthetic_scene(std::uint64_t seed, const SynthParams& params = {}) {
    detail::SynthRng rng(seed);
    SyntheticScene out;
    out.lidar_pose = RigidTransform::translate({0.0, 0.0, params.lidar_height});
    auto& objects = out.manifest.objects;
    InstanceId next_instance = 1;
    auto add = [&](const std::string& id, const TriangleMesh& mesh, const RigidTransform& t, SemanticId semantic,
                   bool stuff, bool transparent = false) {
        if (!out.library.contains(id)) out.library.add(id, mesh, semantic);
        ScenePlacement p;
        p.mesh_id = id;
        p.transform = t;
        p.label = {semantic, stuff ? InstanceId{0} : next_instance++};
        p.is_stuff = stuff;
        p.transparent = transparent;
        objects.push_back(std::move(p));
    };
    const double x0 = params.x_min, x1 = params.x_max, yh = params.y_half;

    add("meshes/terrain.obj",
        detail::heightfield_slab(x0, x1, -yh, yh, -1.0, params.terrain_cells, seed ^ 0x9e3779b97f4a7c15ULL),
        RigidTransform::identity(), 16, true);
    add("meshes/road.obj", box_mesh({x0, -3.5, -0.2}, {x1, 3.5, 0.0}), RigidTransform::identity(), 1, true);
    add("meshes/sidewalk_left.obj", box_mesh({x0, 3.5, -0.2}, {x1, 5.5, 0.15}), RigidTransform::identity(), 2, true);
    add("meshes/sidewalk_right.obj", box_mesh({x0, -5.5, -0.2}, {x1, -3.5, 0.15}), RigidTransform::identity(), 2,
        true);

    const int buildings = rng.count(params.buildings);
    for (int i = 0; i < buildings; ++i) {
        const double w = rng.uniform(6.0, 14.0), d = rng.uniform(6.0, 12.0), h = rng.uniform(8.0, 20.0);
        const double side = (i % 2 == 0) ? 1.0 : -1.0;
        const double x = rng.uniform(x0 + w, x1 - w), y = side * (7.0 + d / 2.0 + rng.uniform(0.0, 4.0));
        add("meshes/building_" + std::to_string(i) + ".obj", box_mesh({-w / 2, -d / 2, 0.0}, {w / 2, d / 2, h}),
            detail::place(x, y, 0.0, 0.0), 3, false);
    }

    const TriangleMesh car = box_mesh({-2.25, -0.9, 0.0}, {2.25, 0.9, 1.5});
    const int cars = rng.count(params.cars);
    for (int i = 0; i < cars; ++i) {
        const double x = rng.uniform(4.0, x1 - 5.0), lane = (i % 2 == 0) ? 1.75 : -1.75;
        add("meshes/car.obj", car, detail::place(x, lane, 0.0, rng.uniform(-0.1, 0.1)), 12, false);
    }

    const TriangleMesh person = box_mesh({-0.25, -0.2, 0.0}, {0.25, 0.2, 1.75});
    const int pedestrians = rng.count(params.pedestrians);
    for (int i = 0; i < pedestrians; ++i) {
        const double side = (i % 2 == 0) ? 4.5 : -4.5;
        add("meshes/pedestrian.obj", person,
            detail::place(rng.uniform(-10.0, 40.0), side, 0.15, rng.uniform(0.0, 2.0 * std::numbers::pi)), 11,
            false);
    }

    const TriangleMesh pole = box_mesh({-0.1, -0.1, 0.0}, {0.1, 0.1, 6.0});
    const int poles = rng.count(params.poles);
    for (int i = 0; i < poles; ++i) {
        const double side = (i % 2 == 0) ? 5.0 : -5.0;
        add("meshes/pole.obj", pole, detail::place(rng.uniform(x0 + 2.0, x1 - 2.0), side, 0.15, 0.0), 6, false);
    }

    const int trees = rng.count(params.vegetation);
    for (int i = 0; i < trees; ++i) {
        const double r = rng.uniform(1.0, 2.5), h = rng.uniform(3.0, 6.0);
        const double side = (i % 2 == 0) ? 1.0 : -1.0;
        add("meshes/tree_" + std::to_string(i) + ".obj", box_mesh({-r, -r, h * 0.4}, {r, r, h}),
            detail::place(rng.uniform(x0 + 3.0, x1 - 3.0), side * rng.uniform(6.0, 9.0), 0.0, 0.0), 9, true);
    }

    if (params.glass_pane)
        add("meshes/glass.obj", box_mesh({-3.0, -0.02, 0.0}, {3.0, 0.02, 3.0}),
            detail::place(rng.uniform(12.0, 20.0), 5.3, 0.15, 0.0), 22, false, true);
    return out;
}

// D-phase walking cycle: forward step follows a raised cosine, the relative
// articulation angle a sine. Phase d uses template mesh "gait/phase_<d>.obj",
// a box whose footprint widens with the stride.
struct SyntheticGait {
    GaitDatabase database;
    MeshLibrary library;
};

inline SyntheticGait synthetic_gait_database(std::uint32_t phases = 8, double mean_step = 0.05,
                                             double max_angle = 0.6) {
    SyntheticGait out;
    std::vector<GaitPhase> table;
    for (std::uint32_t d = 0; d < phases; ++d) {
        const double s = 2.0 * std::numbers::pi * d / phases;
        GaitPhase p;
        p.index = d;
        p.mesh_id = "gait/phase_" + std::to_string(d) + ".obj";
        p.descriptor = {mean_step * (1.0 + 0.5 * std::cos(s)), max_angle * std::sin(s)};
        const double stride = 0.15 + 0.25 * std::abs(std::sin(s));
        out.library.add(p.mesh_id, box_mesh({-stride, -0.2, 0.0}, {stride, 0.2, 1.75}), 11);
        table.push_back(std::move(p));
    }
    out.database = GaitDatabase(std::move(table), {mean_step * mean_step * 0.04, max_angle * max_angle * 0.04});
    return out;
}

}  // namespace occkit
