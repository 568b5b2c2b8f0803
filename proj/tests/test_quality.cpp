#include "occkit/quality.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace occkit;

namespace {

GridSpec cube(std::uint32_t n, double size = 1.0) { return {Vec3::Zero(), size, {n, n, n}}; }

double sc(const PanopticGrid& g) {
    const PanopticGrid gs[] = {g};
    return spatial_continuity(gs);
}

double tc(const PanopticGrid& a, const PanopticGrid& b, const RigidTransform& pa, const RigidTransform& pb,
          const QualityConfig& cfg = {}) {
    const FramePair pairs[] = {{a, b, pa, pb}};
    return temporal_consistency(pairs, cfg);
}

PanopticGrid toy_grid() {
    PanopticGrid g(cube(4));
    g.set(VoxelIndex{0, 0, 0}, {1, 0});
    g.set(VoxelIndex{0, 0, 1}, {1, 0});
    g.set(VoxelIndex{3, 3, 3}, {2, 0});
    return g;
}

}  // namespace

TEST(Isolated, SingleAdjacentAndDiagonal) {
    PanopticGrid g(cube(4));
    g.set(VoxelIndex{1, 1, 1}, {3, 0});
    EXPECT_EQ(isolated_voxels(g, 3), (std::vector<LinearIndex>{g.spec().linearize({1, 1, 1})}));
    g.set(VoxelIndex{2, 1, 1}, {3, 0});
    EXPECT_TRUE(isolated_voxels(g, 3).empty());
    PanopticGrid d(cube(4));
    d.set(VoxelIndex{1, 1, 1}, {3, 0});
    d.set(VoxelIndex{2, 2, 1}, {3, 0});
    EXPECT_EQ(isolated_voxels(d, 3).size(), 2u);
}

TEST(SpatialContinuity, LoneVoxelIsZero) {
    PanopticGrid g(cube(3));
    g.set(VoxelIndex{1, 1, 1}, {5, 0});
    EXPECT_EQ(sc(g), 0.0);
}

TEST(SpatialContinuity, ToyGrid) {
    EXPECT_NEAR(sc(toy_grid()), 1.0 - 1.0 / 3.0, 1e-12);
    EXPECT_EQ(isolated_voxels(toy_grid(), 1).size(), 0u);
    EXPECT_EQ(isolated_voxels(toy_grid(), 2).size(), 1u);
}

TEST(SpatialContinuity, EmptyIsOneAndNeighborsOfOtherClassesDoNotCount) {
    EXPECT_EQ(sc(PanopticGrid(cube(3))), 1.0);
    PanopticGrid g(cube(3));
    g.set(VoxelIndex{0, 0, 0}, {1, 0});
    g.set(VoxelIndex{1, 0, 0}, {2, 0});
    EXPECT_EQ(sc(g), 0.0);
}

TEST(SpatialContinuity, MatchesOracleInUnitRangeAndRotationInvariant) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = oracle::random_grid(rng, GridSpec{Vec3::Zero(), 1.0, {7, 6, 5}}, 3, 0, 0.1 + 0.02 * trial);
        const auto b = oracle::random_grid(rng, GridSpec{Vec3::Zero(), 1.0, {4, 4, 4}}, 2, 0, 0.5);
        const PanopticGrid both[] = {a, b};
        const double s = spatial_continuity(both);
        EXPECT_DOUBLE_EQ(s, oracle::spatial_continuity({&a, &b}));
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
        // Quarter turn about z (x, y) -> (Y-1-y, x) plus a translation.
        GridSpec rs{Vec3::Zero(), 1.0, {6 + 2, 7 + 3, 5 + 1}};
        PanopticGrid r(rs);
        for (LinearIndex i = 0; i < a.size(); ++i) {
            const auto v = a.spec().delinearize(i);
            r.set(VoxelIndex{5 - v.y + 2, v.x + 3, v.z + 1}, a[i]);
        }
        EXPECT_DOUBLE_EQ(sc(r), sc(a));
    }
}

TEST(Warp, IdentityPosesSampleSameClass) {
    const auto g = toy_grid();
    const FramePair p{g, g, RigidTransform::identity(), RigidTransform::identity()};
    for (const auto& s : warp_labels(p, 1)) EXPECT_EQ(s.sampled, std::optional<SemanticId>(1));
}

TEST(Warp, ShiftedFrameConstruction) {
    std::mt19937_64 rng(42);
    const GridSpec s = cube(8, 0.5);
    const auto a = oracle::random_grid(rng, s, 3, 0, 0.4);
    PanopticGrid b(s);
    for (LinearIndex i = 0; i < a.size(); ++i) {
        const auto v = s.delinearize(i);
        if (v.x >= 1) b.set(VoxelIndex{v.x - 1, v.y, v.z}, a[i]);
    }
    const auto pose_t = RigidTransform::translate({3, -2, 1}) * RigidTransform::rotate(Vec3::UnitZ(), 0.3);
    const auto pose_t1 = pose_t * RigidTransform::translate({s.voxel_size, 0, 0});
    const FramePair p{a, b, pose_t, pose_t1};
    for (SemanticId c = 1; c <= 3; ++c)
        for (const auto& w : warp_labels(p, c)) {
            if (s.delinearize(w.source).x == 0) {
                EXPECT_FALSE(w.sampled);
            } else {
                EXPECT_EQ(w.sampled, std::optional<SemanticId>(c));
            }
        }
    EXPECT_EQ(tc(a, b, pose_t, pose_t1), 1.0);
}

TEST(Warp, OutOfBoundsMarker) {
    PanopticGrid g(cube(2));
    g.set(VoxelIndex{0, 0, 0}, {1, 0});
    const FramePair p{g, g, RigidTransform::identity(), RigidTransform::translate({10, 0, 0})};
    const auto w = warp_labels(p, 1);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_FALSE(w[0].sampled);
}

TEST(TemporalConsistency, IdenticalStaticFramesScoreOne) {
    const auto g = toy_grid();
    EXPECT_EQ(tc(g, g, RigidTransform::identity(), RigidTransform::identity()), 1.0);
    const auto pose = RigidTransform::translate({4, 4, 4}) * RigidTransform::rotate(Vec3(1, 2, 3), 1.0);
    EXPECT_EQ(tc(g, g, pose, pose), 1.0);
}

TEST(TemporalConsistency, DisjointSemanticsScoreZero) {
    const GridSpec s = cube(3);
    PanopticGrid a(s, std::vector<PanopticLabel>(s.voxel_count(), {1, 0}));
    PanopticGrid b(s, std::vector<PanopticLabel>(s.voxel_count(), {2, 0}));
    EXPECT_EQ(tc(a, b, RigidTransform::identity(), RigidTransform::identity()), 0.0);
}

TEST(TemporalConsistency, EmptyDenominatorIsOne) {
    PanopticGrid g(cube(2));
    EXPECT_EQ(tc(g, g, RigidTransform::identity(), RigidTransform::identity()), 1.0);
    const FramePair* none = nullptr;
    EXPECT_EQ(temporal_consistency(std::span<const FramePair>(none, 0), {}), 1.0);
}

TEST(TemporalConsistency, MatchesMatrixOracle) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    QualityConfig cfg;
    cfg.dynamic_classes = {3};
    for (int trial = 0; trial < 30; ++trial) {
        const GridSpec s{Vec3(-2, -2, -1), 0.5, {8, 8, 5}};
        const auto a = oracle::random_grid(rng, s, 4, 0, 0.4);
        const auto b = oracle::random_grid(rng, s, 4, 0, 0.4);
        const auto pa = RigidTransform::translate({u(rng), u(rng), 0}) * RigidTransform::rotate(Vec3::UnitZ(), u(rng));
        const auto pb = RigidTransform::translate({u(rng), u(rng), 0}) * RigidTransform::rotate(Vec3::UnitZ(), u(rng));
        const auto counts = temporal_counts({a, b, pa, pb}, cfg);
        const auto [m, v] = oracle::temporal_counts(a, b, pa.matrix(), pb.matrix(), cfg.dynamic_classes);
        EXPECT_EQ(counts.matched, m);
        EXPECT_EQ(counts.valid, v);
        const double score = tc(a, b, pa, pb, cfg);
        EXPECT_GE(score, 0.0);
        EXPECT_LE(score, 1.0);
    }
}

TEST(TemporalConsistency, CommonWorldChangeInvariant) {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const GridSpec s{Vec3(-2, -2, -1), 0.5, {8, 8, 5}};
        const auto a = oracle::random_grid(rng, s, 3, 0, 0.5);
        const auto b = oracle::random_grid(rng, s, 3, 0, 0.5);
        // Quarter-step translations keep every warped centre off cell faces.
        const auto pa = RigidTransform::translate({0.25, 0, 0});
        const auto pb = RigidTransform::translate({0, -0.5, 0});
        for (const auto& g : {RigidTransform::translate({8, -4, 2}), RigidTransform::translate({0.5, 1.5, -3})}) {
            EXPECT_EQ(tc(a, b, pa, pb), tc(a, b, g * pa, g * pb));
        }
        // General rigid G agrees up to round-off in the warp.
        const auto g = RigidTransform::translate({u(rng), u(rng), u(rng)}) * RigidTransform::rotate(Vec3(u(rng), u(rng), 1), u(rng));
        const auto pr = RigidTransform::rotate(Vec3::UnitZ(), 0.37) * RigidTransform::translate({0.1, 0.2, 0});
        const auto ref = temporal_counts({a, b, pr, pa}, {});
        const auto moved = temporal_counts({a, b, g * pr, g * pa}, {});
        EXPECT_NEAR(double(moved.valid), double(ref.valid), 2.0);
        EXPECT_NEAR(double(moved.matched), double(ref.matched), 2.0);
    }
}

TEST(TemporalConsistency, DynamicSourceVoxelsDoNotChangeScore) {
    std::mt19937_64 rng(45);
    QualityConfig cfg;
    cfg.dynamic_classes = {2};
    for (int trial = 0; trial < 20; ++trial) {
        const GridSpec s = cube(6, 0.5);
        const auto a = oracle::random_grid(rng, s, 3, 0, 0.6);
        const auto b = oracle::random_grid(rng, s, 3, 0, 0.6);
        std::vector<PanopticLabel> stripped = a.labels();
        for (auto& l : stripped)
            if (l.semantic == 2) l = {};
        const PanopticGrid a2(s, stripped);
        const auto pose = RigidTransform::translate({0.25, 0, 0});
        EXPECT_EQ(tc(a, b, RigidTransform::identity(), pose, cfg), tc(a2, b, RigidTransform::identity(), pose, cfg));
        // Declaring a class dynamic removes its pairs from the denominator.
        const auto with = temporal_counts({a, b, RigidTransform::identity(), pose}, cfg);
        const auto without = temporal_counts({a, b, RigidTransform::identity(), pose}, {});
        EXPECT_LE(with.valid, without.valid);
    }
}

TEST(TemporalConsistency, PerFrameAggregate) {
    const GridSpec s = cube(3);
    PanopticGrid one(s, std::vector<PanopticLabel>(s.voxel_count(), {1, 0}));
    PanopticGrid two(s, std::vector<PanopticLabel>(s.voxel_count(), {2, 0}));
    PanopticGrid small(s);
    small.set(LinearIndex(0), {1, 0});
    const FramePair pairs[] = {{one, one, {}, {}}, {small, two, {}, {}}};
    QualityConfig cfg;
    EXPECT_DOUBLE_EQ(temporal_consistency(pairs, cfg), 27.0 / 28.0);
    cfg.aggregate = QualityConfig::Aggregate::kPerFrame;
    EXPECT_DOUBLE_EQ(temporal_consistency(pairs, cfg), 0.5);
}

TEST(TemporalConsistency, VoxelSizeMismatchErrors) {
    PanopticGrid a(cube(2, 1.0)), b(cube(2, 0.5));
    EXPECT_THROW(temporal_counts({a, b, {}, {}}, {}), GridError);
}
