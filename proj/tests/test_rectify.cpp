#include "occkit/rectify.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace occkit;

namespace {

PinholeCamera forward_camera(std::uint32_t w = 32, std::uint32_t h = 16) {
    PinholeCamera cam;
    cam.width = w;
    cam.height = h;
    cam.fx = cam.fy = 0.5 * w;
    cam.cx = w / 2.0;
    cam.cy = h / 2.0;
    return cam;
}

TriangleMesh quad(double half) {
    return make_mesh({{-half, -half, 0}, {half, -half, 0}, {half, half, 0}, {-half, half, 0}}, {{0, 1, 2}, {0, 2, 3}});
}

ScenePlacement placement(const std::string& id, const RigidTransform& t, PanopticLabel label, bool transparent,
                         bool inconsistent = false) {
    ScenePlacement p;
    p.mesh_id = id;
    p.transform = t;
    p.label = label;
    p.transparent = transparent;
    p.semantic_inconsistent = inconsistent;
    return p;
}

}  // namespace

TEST(RectificationMesh, OnlyFlaggedPlacements) {
    MeshLibrary lib;
    lib.add("quad", quad(1.0), 22);
    lib.add("box", box_mesh({0, 0, 0}, {1, 1, 1}), 3);
    SceneManifest m;
    m.objects.push_back(placement("box", RigidTransform::identity(), {3, 1}, false));
    EXPECT_TRUE(build_rectification_mesh(m, lib).triangle_labels.empty());
    const auto empty = raycast_depth(forward_camera(), build_rectification_mesh(m, lib));
    for (auto d : empty.depth.values) EXPECT_EQ(d, kDepthMiss);
    for (auto s : empty.semantic.values) EXPECT_EQ(s, kEmptySemantic);

    m.objects.push_back(placement("quad", RigidTransform::translate({0, 0, 4}), {22, 2}, true));
    m.objects.push_back(placement("box", RigidTransform::translate({3, 0, 4}), {3, 3}, false, true));
    m.objects.push_back(placement("box", RigidTransform::translate({-3, 0, 4}), {3, 4}, true, true));
    const auto mesh = build_rectification_mesh(m, lib);
    EXPECT_EQ(mesh.triangle_labels.size(), 2u + 12u + 12u);
    EXPECT_EQ(mesh.bvh.triangles().size(), mesh.triangle_labels.size());
    EXPECT_EQ(std::count(mesh.triangle_labels.begin(), mesh.triangle_labels.end(), PanopticLabel{22, 2}), 2);
}

TEST(Raycast, PlaneGivesConstantZDepth) {
    RectificationMesh mesh{Bvh(std::vector<Triangle>{{{-100, -100, 5}, {100, -100, 5}, {100, 100, 5}},
                                                    {{-100, -100, 5}, {100, 100, 5}, {-100, 100, 5}}}),
                           {{16, 0}, {16, 0}}};
    const auto r = raycast_depth(forward_camera(64, 32), mesh, 3);
    for (auto d : r.depth.values) EXPECT_NEAR(d, 5.0f, 1e-6f * 5.0f);
    for (auto s : r.semantic.values) EXPECT_EQ(s, 16);
}

TEST(Raycast, MatchesBruteForce) {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 8; ++trial) {
        const auto view = oracle::random_view(rng, 48, 24, 300);
        const RectificationMesh mesh{Bvh(view.triangles), view.labels};
        const auto got = raycast_depth(view.camera, mesh, 1 + trial % 3);
        const auto want = oracle::cast_camera(view.camera, view.triangles, view.labels);
        for (std::size_t i = 0; i < got.depth.size(); ++i) {
            if (std::isinf(want.depth[i])) {
                EXPECT_EQ(got.depth.values[i], kDepthMiss);
            } else {
                EXPECT_NEAR(got.depth.values[i], want.depth[i], 1e-6 * want.depth[i] + 1e-6);
            }
            EXPECT_EQ(got.semantic.values[i], want.semantic[i]);
        }
    }
}

TEST(Fuse, PointwiseMinimum) {
    DepthMap raw(3, 1, 10.0f), cast(3, 1, kDepthMiss);
    cast.values[0] = 4.0f;
    cast.values[1] = 12.0f;
    const auto f = fuse_depth(raw, cast);
    EXPECT_EQ(f.values, (std::vector<float>{4.0f, 10.0f, 10.0f}));
    EXPECT_EQ(fuse_depth(f, cast), f);
    EXPECT_THROW(fuse_depth(raw, DepthMap(2, 1, 0.0f)), RectifyError);
}

TEST(Masks, TransparencyThreshold) {
    DepthMap raw(4, 1, 10.0f), fused(4, 1, 10.0f);
    fused.values[0] = 4.0f;
    fused.values[1] = 9.875f;  // exactly 0.125 apart in float
    fused.values[2] = 9.95f;
    RectifyConfig cfg;
    cfg.epsilon = 0.125;
    EXPECT_EQ(transparency_region(raw, fused, cfg).values, (std::vector<std::uint8_t>{1, 1, 0, 0}));
    cfg.epsilon = 0.0;
    EXPECT_THROW(transparency_region(raw, fused, cfg), RectifyError);
}

TEST(Masks, OmissionCountsEmptyPixels) {
    std::mt19937_64 rng(62);
    SemanticMap s(16, 8, 3);
    const auto none = omission_region(s);
    EXPECT_EQ(std::count(none.values.begin(), none.values.end(), 1), 0);
    std::size_t empty = 0;
    for (auto& v : s.values)
        if (rng() % 5 == 0) {
            v = kEmptySemantic;
            ++empty;
        }
    const auto m = omission_region(s);
    EXPECT_EQ(std::size_t(std::count(m.values.begin(), m.values.end(), 1)), empty);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(m.values[i] == 1, s.values[i] == kEmptySemantic);
}

TEST(RectifySemantics, ReplacesExactlyMaskedPixels) {
    std::mt19937_64 rng(63);
    SemanticMap raw(16, 8, 0), cast(16, 8, 0);
    PixelMask mask(16, 8, 0);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw.values[i] = std::uint16_t(rng() % 5);
        cast.values[i] = std::uint16_t(rng() % 5);
        mask.values[i] = rng() % 3 == 0;
    }
    EXPECT_EQ(rectify_semantics(raw, cast, PixelMask(16, 8, 0)), raw);
    EXPECT_EQ(rectify_semantics(raw, cast, PixelMask(16, 8, 1)), cast);
    const auto out = rectify_semantics(raw, cast, mask);
    std::size_t changed = 0, expected = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        changed += out.values[i] != raw.values[i];
        expected += mask.values[i] && cast.values[i] != raw.values[i];
        if (!mask.values[i]) {
            EXPECT_EQ(out.values[i], raw.values[i]);
        }
    }
    EXPECT_EQ(changed, expected);
    EXPECT_THROW(rectify_semantics(raw, SemanticMap(2, 2, 0), mask), RectifyError);
}

TEST(RectifyFrame, GlassInFrontOfWall) {
    MeshLibrary lib;
    lib.add("glass", quad(1.0), 22);
    lib.add("wall", quad(50.0), 4);
    SceneManifest m;
    m.objects.push_back(placement("glass", RigidTransform::translate({0, 0, 4}), {22, 1}, true));
    m.objects.push_back(placement("wall", RigidTransform::translate({0, 0, 10}), {4, 2}, false));
    const auto cam = forward_camera(64, 32);
    const DepthMap raw_depth(cam.width, cam.height, 10.0f);
    SemanticMap raw_sem(cam.width, cam.height, 4);
    raw_sem.at(0, 0) = kEmptySemantic;
    const auto f = rectify_frame(raw_depth, raw_sem, cam, build_rectification_mesh(m, lib));

    std::size_t covered = 0;
    for (std::uint32_t v = 0; v < cam.height; ++v)
        for (std::uint32_t u = 0; u < cam.width; ++u) {
            const Ray r = pixel_ray(cam, u, v);
            const Vec3 p = r.origin + (4.0 / r.direction.z()) * r.direction;
            const bool behind_pane = std::abs(p.x()) < 1.0 && std::abs(p.y()) < 1.0;
            const bool masked = f.transparency.at(u, v) || f.omission.at(u, v);
            if (behind_pane) {
                ++covered;
                EXPECT_NEAR(f.depth.at(u, v), 4.0f, 1e-6f * 4.0f);
                EXPECT_EQ(f.semantic.at(u, v), 22);
                EXPECT_TRUE(f.transparency.at(u, v));
            } else if (!masked) {
                EXPECT_EQ(f.depth.at(u, v), raw_depth.at(u, v));
                EXPECT_EQ(f.semantic.at(u, v), raw_sem.at(u, v));
            }
            EXPECT_LE(f.depth.at(u, v), raw_depth.at(u, v));
        }
    EXPECT_GT(covered, 50u);
    EXPECT_TRUE(f.omission.at(0, 0));
    EXPECT_EQ(f.semantic.at(0, 0), kEmptySemantic);  // nothing cast there either
    const auto dbg = encode_error_mask(f.transparency, f.omission);
    EXPECT_EQ(dbg.at(0, 0), 2);
    EXPECT_EQ(dbg.at(cam.width / 2, cam.height / 2), 1);
}

TEST(RectifyFrame, ResolutionMismatchErrors) {
    const auto cam = forward_camera(8, 8);
    EXPECT_THROW(rectify_frame(DepthMap(4, 4, 1.0f), SemanticMap(8, 8, 0), cam, {}), RectifyError);
}

TEST(RasterIo, RoundTripAndHeader) {
    std::mt19937_64 rng(64);
    DepthMap d(7, 5, 0.0f);
    SemanticMap s(7, 5, 0);
    for (auto& v : d.values) v = float(rng() % 1000) * 0.37f;
    d.values[3] = kDepthMiss;
    for (auto& v : s.values) v = std::uint16_t(rng());
    const auto db = write_depth_raster(d), sb = write_semantic_raster(s);
    EXPECT_EQ(db.size(), 16u + 4u * 35u);
    EXPECT_EQ(sb.size(), 16u + 2u * 35u);
    EXPECT_EQ(std::string(db.begin(), db.begin() + 4), "OCCR");
    EXPECT_EQ(db[4], 1);
    EXPECT_EQ(sb[4], 2);
    EXPECT_EQ(db[8], 7);
    EXPECT_EQ(db[12], 5);
    EXPECT_EQ(read_depth_raster(db), d);
    EXPECT_EQ(read_semantic_raster(sb), s);
    EXPECT_EQ(write_depth_raster(read_depth_raster(db)), db);
}

TEST(RasterIo, EveryTruncationAndBadHeaderRejected) {
    const auto db = write_depth_raster(DepthMap(3, 2, 1.5f));
    const auto sb = write_semantic_raster(SemanticMap(3, 2, 9));
    for (std::size_t n = 0; n < db.size(); ++n)
        EXPECT_THROW(read_depth_raster(std::span(db.data(), n)), FormatError) << n;
    for (std::size_t n = 0; n < sb.size(); ++n)
        EXPECT_THROW(read_semantic_raster(std::span(sb.data(), n)), FormatError) << n;
    auto kind = [](auto&& f) {
        try {
            f();
        } catch (const FormatError& e) {
            return e.kind();
        }
        return FormatErrorKind::kIo;
    };
    auto bad = db;
    bad[0] = 'X';
    EXPECT_EQ(kind([&] { read_depth_raster(bad); }), FormatErrorKind::kBadMagic);
    bad = db;
    bad[4] = 3;
    EXPECT_EQ(kind([&] { read_depth_raster(bad); }), FormatErrorKind::kUnsupportedVersion);
    EXPECT_EQ(kind([&] { read_semantic_raster(db); }), FormatErrorKind::kCorrupt);
    bad = db;
    bad.push_back(0);
    EXPECT_EQ(kind([&] { read_depth_raster(bad); }), FormatErrorKind::kCorrupt);
    EXPECT_EQ(kind([&] { read_depth_raster(std::span(db.data(), db.size() - 1)); }), FormatErrorKind::kTruncated);
}
