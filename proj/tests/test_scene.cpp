#include "occkit/scene.hpp"
#include "occkit/synth.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

using namespace occkit;

namespace {

MeshLibrary cube_library() {
    MeshLibrary lib;
    lib.add("cube", box_mesh({0, 0, 0}, {1, 1, 1}), 3);
    lib.add("tri", make_mesh({{0, 0, 0}, {2, 0, 0}, {0, 2, 0}}, {{0, 1, 2}}), 1);
    return lib;
}

ScenePlacement at(const std::string& id, const Vec3& t, PanopticLabel label, bool stuff = false) {
    ScenePlacement p;
    p.mesh_id = id;
    p.transform = RigidTransform::translate(t);
    p.label = label;
    p.is_stuff = stuff;
    return p;
}

std::set<std::string> names(const std::vector<ScenePlacement>& ps) {
    std::set<std::string> out;
    for (const auto& p : ps) out.insert(p.mesh_id + "#" + std::to_string(p.label.instance));
    return out;
}

}  // namespace

TEST(SelectBackground, OutsideExcludedStraddlingIncluded) {
    const auto lib = cube_library();
    const Aabb region({-5, -5, -1}, {5, 5, 3});
    const auto out = select_background({at("cube", {10, 0, 0}, {3, 1}), at("cube", {4.5, 0, 0}, {3, 2}),
                                        at("cube", {5, 0, 0}, {3, 3})},
                                       lib, region, RigidTransform::identity());
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].label.instance, 2);
    EXPECT_EQ(out[1].label.instance, 3);  // touching the region face counts
}

TEST(SelectBackground, UsesLidarFrame) {
    const auto lib = cube_library();
    const Aabb region({-1, -1, -1}, {1, 1, 1});
    const auto lidar = RigidTransform::translate({100, 0, 0});
    EXPECT_EQ(select_background({at("cube", {100, 0, 0}, {3, 1})}, lib, region, lidar).size(), 1u);
    EXPECT_TRUE(select_background({at("cube", {0, 0, 0}, {3, 1})}, lib, region, lidar).empty());
}

TEST(SelectBackground, UnknownMeshNamesId) {
    try {
        select_background({at("nope", {0, 0, 0}, {3, 1})}, cube_library(), Aabb({0, 0, 0}, {1, 1, 1}),
                          RigidTransform::identity());
        FAIL();
    } catch (const SceneError& e) {
        EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
    }
}

TEST(SelectBackground, SupersetOfExactOverlapAndOrderInvariant) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-8.0, 8.0), ang(-3.0, 3.0);
    const auto lib = cube_library();
    const Aabb region({-3, -2, -1}, {4, 2, 2});
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ScenePlacement> ps;
        for (int i = 0; i < 50; ++i) {
            auto p = at(i % 2 ? "cube" : "tri", {u(rng), u(rng), u(rng) / 3}, {3, InstanceId(i + 1)});
            p.transform = p.transform * RigidTransform::rotate(Vec3(u(rng), u(rng), 1.0), ang(rng));
            ps.push_back(p);
        }
        const auto lidar = RigidTransform::translate({u(rng) / 4, u(rng) / 4, 0}) *
                           RigidTransform::rotate(Vec3::UnitZ(), ang(rng));
        const auto selected = names(select_background(ps, lib, region, lidar));
        for (const auto& p : ps) {
            const auto mesh = transform_mesh(lib.at(p.mesh_id).mesh, lidar.inverse() * p.transform);
            bool exact = false;
            for (std::size_t k = 0; k < mesh.triangle_count() && !exact; ++k)
                exact = oracle::triangle_box_clip(mesh.triangle(k), region);
            if (exact) {
                EXPECT_TRUE(selected.count(p.mesh_id + "#" + std::to_string(p.label.instance)));
            }
        }
        auto shuffled = ps;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_EQ(names(select_background(shuffled, lib, region, lidar)), selected);
    }
}

TEST(SelectBackground, CommonTranslationAndQuarterTurnInvariant) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    const auto lib = cube_library();
    const Aabb region({-3, -2, -1}, {4, 2, 2});
    std::vector<ScenePlacement> ps;
    for (int i = 0; i < 50; ++i) ps.push_back(at(i % 2 ? "cube" : "tri", {u(rng), u(rng), u(rng) / 3}, {3, InstanceId(i + 1)}));
    const auto lidar = RigidTransform::translate({0.5, -0.25, 0});
    const auto base = names(select_background(ps, lib, region, lidar));
    for (const auto& g : {RigidTransform::translate({12.5, -3.25, 0.5}),
                          RigidTransform::rotate(Vec3::UnitZ(), std::numbers::pi / 2),
                          RigidTransform::translate({-4, 2, 0}) * RigidTransform::rotate(Vec3::UnitZ(), std::numbers::pi)}) {
        auto moved = ps;
        for (auto& p : moved) p.transform = g * p.transform;
        // Quarter turns carry round-off; snap the rotation back to integers.
        for (auto& p : moved) p.transform.rotation = p.transform.rotation.array().round().matrix();
        auto lg = g * lidar;
        lg.rotation = lg.rotation.array().round().matrix();
        EXPECT_EQ(names(select_background(moved, lib, region, lg)), base);
    }
}

TEST(Assemble, EmptyInputs) {
    EXPECT_TRUE(assemble_panoptic_mesh({}, {}, {}, cube_library()).entries.empty());
}

TEST(Assemble, BackgroundCarPedestrianConservesVertices) {
    const auto lib = cube_library();
    PosedMesh ped{box_mesh({0, 0, 0}, {0.5, 0.5, 1.8}), RigidTransform::translate({3, 0, 0}), {11, 2}};
    const auto scene = assemble_panoptic_mesh({at("tri", {0, 0, 0}, {1, 0}, true)}, {at("cube", {1, 1, 0}, {12, 1})},
                                              {ped}, lib);
    ASSERT_EQ(scene.entries.size(), 3u);
    EXPECT_EQ(scene.entries[0].label, (PanopticLabel{1, 0}));
    EXPECT_TRUE(scene.entries[0].is_stuff);
    EXPECT_EQ(scene.entries[1].label, (PanopticLabel{12, 1}));
    EXPECT_EQ(scene.entries[2].label, (PanopticLabel{11, 2}));
    EXPECT_EQ(scene.entries[1].mesh.vertices[0], Vec3(1, 1, 0));
    std::size_t in = lib.at("tri").mesh.vertex_count() + lib.at("cube").mesh.vertex_count() + ped.mesh.vertex_count();
    std::size_t out = 0;
    for (const auto& e : scene.entries) out += e.mesh.vertex_count();
    EXPECT_EQ(in, out);
}

TEST(Assemble, DuplicateThingInstanceErrors) {
    const auto lib = cube_library();
    PosedMesh ped{box_mesh({0, 0, 0}, {0.5, 0.5, 1.8}), RigidTransform::identity(), {11, 1}};
    EXPECT_THROW(assemble_panoptic_mesh({}, {at("cube", {0, 0, 0}, {12, 1})}, {ped}, lib), SceneError);
    // Stuff entries never collide.
    EXPECT_NO_THROW(assemble_panoptic_mesh({at("tri", {0, 0, 0}, {1, 0}, true), at("tri", {1, 0, 0}, {2, 0}, true)},
                                           {}, {}, lib));
}

TEST(Placement, StuffWithInstanceRejected) {
    EXPECT_THROW(at("tri", {0, 0, 0}, {1, 4}, true).validate(), SceneError);
    EXPECT_THROW(at("tri", {0, 0, 0}, {0, 4}).validate(), SceneError);
}

TEST(Synth, DeterministicAndContainsStuffAndThings) {
    const auto a = generate_synthetic_scene(1), b = generate_synthetic_scene(1), c = generate_synthetic_scene(2);
    ASSERT_EQ(a.manifest.objects.size(), b.manifest.objects.size());
    bool stuff = false, thing = false;
    for (std::size_t i = 0; i < a.manifest.objects.size(); ++i) {
        const auto &pa = a.manifest.objects[i], &pb = b.manifest.objects[i];
        EXPECT_EQ(pa.mesh_id, pb.mesh_id);
        EXPECT_EQ(pa.transform.matrix(), pb.transform.matrix());
        EXPECT_EQ(pa.label, pb.label);
        stuff = stuff || pa.is_stuff;
        thing = thing || !pa.is_stuff;
    }
    EXPECT_TRUE(stuff);
    EXPECT_TRUE(thing);
    bool differs = a.manifest.objects.size() != c.manifest.objects.size();
    for (std::size_t i = 0; !differs && i < a.manifest.objects.size(); ++i)
        differs = a.manifest.objects[i].transform.matrix() != c.manifest.objects[i].transform.matrix();
    EXPECT_TRUE(differs);
}

TEST(Synth, DenseInstancesFromOne) {
    const auto s = generate_synthetic_scene(5);
    InstanceId expected = 1;
    for (const auto& p : s.manifest.objects) {
        if (p.is_stuff) {
            EXPECT_EQ(p.label.instance, 0);
            continue;
        }
        EXPECT_EQ(p.label.instance, expected++);
    }
    EXPECT_NO_THROW(assemble_manifest(s.manifest, s.library));
}

TEST(Synth, TerrainIsClosedAndTriangleCountScales) {
    SynthParams p;
    p.terrain_cells = 10;
    const auto s = generate_synthetic_scene(3, p);
    const auto& terrain = s.library.at("meshes/terrain.obj");
    EXPECT_TRUE(terrain.closed);
    EXPECT_EQ(terrain.mesh.triangle_count(), 4u * 100 + 8u * 10);
    p.terrain_cells = 160;
    EXPECT_GE(assemble_manifest(generate_synthetic_scene(3, p).manifest, generate_synthetic_scene(3, p).library)
                  .triangle_count(),
              100000u);
}
