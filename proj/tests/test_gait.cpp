#include "occkit/gait.hpp"
#include "occkit/synth.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace occkit;

namespace {

GaitObservation linear_window(int w, const Vec3& velocity, double angle, std::optional<Vec3> heading = {}) {
    GaitObservation obs;
    for (int i = 0; i < w; ++i) obs.window.push_back({Vec3(1, 2, 0) + double(i) * velocity, angle});
    obs.heading = heading;
    return obs;
}

GaitDatabase line_database(int n, std::array<double, 2> sigma) {
    std::vector<GaitPhase> phases;
    for (int d = 0; d < n; ++d) phases.push_back({std::uint32_t(d), "m" + std::to_string(d), {double(d), 0.1 * d}});
    return GaitDatabase(std::move(phases), sigma);
}

}  // namespace

TEST(Descriptor, StationaryIsZero) {
    const auto d = observation_descriptor(linear_window(7, Vec3::Zero(), 0.0));
    EXPECT_EQ(d, (GaitDescriptor{0.0, 0.0}));
}

TEST(Descriptor, ConstantVelocityAlongHeading) {
    const auto d = observation_descriptor(linear_window(7, Vec3(1, 0, 0), 0.3));
    EXPECT_DOUBLE_EQ(d.forward_step, 1.0);
    EXPECT_DOUBLE_EQ(d.relative_angle, 0.3);
    const auto diag = observation_descriptor(linear_window(5, Vec3(0.6, 0.8, 0.5), 0.3, Vec3(0.6, 0.8, 0.0)));
    EXPECT_NEAR(diag.forward_step, 1.0, 1e-15);
}

TEST(Descriptor, ReversingWindowNegatesStep) {
    const Vec3 heading(1, 0, 0);
    auto obs = linear_window(7, Vec3(0.8, 0.1, 0), 0.2, heading);
    const auto fwd = observation_descriptor(obs);
    std::reverse(obs.window.begin(), obs.window.end());
    const auto back = observation_descriptor(obs);
    EXPECT_DOUBLE_EQ(back.forward_step, -fwd.forward_step);
    EXPECT_DOUBLE_EQ(back.relative_angle, fwd.relative_angle);
}

TEST(Descriptor, ValidatesWindow) {
    EXPECT_THROW(observation_descriptor(linear_window(4, Vec3::UnitX(), 0)), GaitError);
    EXPECT_THROW(observation_descriptor(linear_window(1, Vec3::UnitX(), 0)), GaitError);
    auto obs = linear_window(5, Vec3::UnitX(), 0);
    obs.window[1].articulation_angle = std::nan("");
    EXPECT_THROW(observation_descriptor(obs), GaitError);
}

TEST(Match, ExactDescriptor) {
    const auto db = line_database(6, {1, 1});
    const auto m = match_phase(db, db.phases()[3].descriptor);
    EXPECT_EQ(m.phase, 3u);
    EXPECT_EQ(m.likelihood, 1.0);
}

TEST(Match, NearestOnLine) {
    std::vector<GaitPhase> phases;
    for (int d = 0; d < 10; ++d) phases.push_back({std::uint32_t(d), "m", {double(d), 0.0}});
    const GaitDatabase db(phases, {1, 1});
    EXPECT_EQ(match_phase(db, {3.4, 0.0}).phase, 3u);
}

TEST(Match, AngleDominatesWithTightSigma) {
    std::vector<GaitPhase> phases;
    for (int d = 0; d < 10; ++d) phases.push_back({std::uint32_t(d), "m", {double(d), 0.05 * d}});
    const GaitDatabase db(phases, {1, 1e-4});
    EXPECT_EQ(match_phase(db, {3.4, phases[7].descriptor.relative_angle}).phase, 7u);
}

TEST(Match, DuplicatesReturnSmallestIndex) {
    std::vector<GaitPhase> phases{{0, "a", {1, 1}}, {1, "b", {0, 0}}, {2, "c", {0, 0}}, {3, "d", {2, 2}}};
    const GaitDatabase db(phases, {1, 1});
    EXPECT_EQ(match_phase(db, {0.1, -0.1}).phase, 1u);
}

TEST(Match, ExhaustiveScanAndArgmaxEqualsArgmin) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto db = oracle::random_gait_database(rng);
        const GaitDescriptor x{u(rng), u(rng)};
        const auto got = match_phase(db, x).phase;
        EXPECT_EQ(got, oracle::gait_argmin_distance(db, x)) << trial;
        EXPECT_EQ(got, oracle::gait_argmax_likelihood(db, x)) << trial;
    }
}

TEST(Match, SigmaScalingKeepsPhase) {
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> u(-3.0, 3.0), s(0.01, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto db = oracle::random_gait_database(rng);
        const double k = s(rng);
        const GaitDatabase scaled(db.phases(), {db.sigma()[0] * k, db.sigma()[1] * k});
        const GaitDescriptor x{u(rng), u(rng)};
        EXPECT_EQ(match_phase(db, x).phase, match_phase(scaled, x).phase);
    }
}

TEST(Database, Validation) {
    EXPECT_THROW(GaitDatabase({{0, "a", {0, 0}}}, {1, 1}), GaitError);
    EXPECT_THROW(GaitDatabase({{0, "a", {0, 0}}, {1, "b", {1, 1}}}, {0, 1}), GaitError);
    EXPECT_THROW(GaitDatabase({{0, "a", {0, 0}}, {2, "b", {1, 1}}}, {1, 1}), GaitError);
    EXPECT_THROW(GaitDatabase({{0, "a", {0, 0}}, {1, "b", {std::nan(""), 1}}}, {1, 1}), GaitError);
}

TEST(Reconstruct, IdentityAndTranslatedPose) {
    const auto gait = synthetic_gait_database(8);
    const auto& phase = gait.database.phases()[5];
    // Constant step equal to the phase's forward step, angle equal to its angle.
    const auto obs = linear_window(7, Vec3(phase.descriptor.forward_step, 0, 0), phase.descriptor.relative_angle);
    const auto r = reconstruct_pedestrian(gait.database, gait.library, obs, RigidTransform::identity(), {11, 4});
    EXPECT_EQ(r.match.phase, 5u);
    EXPECT_EQ(r.posed.mesh.vertices, gait.library.at(phase.mesh_id).mesh.vertices);
    EXPECT_EQ(r.posed.label, (PanopticLabel{11, 4}));
    const auto t = RigidTransform::translate({4, 5, 0});
    const auto moved = reconstruct_pedestrian(gait.database, gait.library, obs, t, {11, 4});
    const auto world = transform_mesh(moved.posed.mesh, moved.posed.transform);
    for (std::size_t i = 0; i < world.vertex_count(); ++i)
        EXPECT_EQ(world.vertices[i], r.posed.mesh.vertices[i] + Vec3(4, 5, 0));
}

TEST(Reconstruct, MeshMatchesLookupOfMatchedPhase) {
    const auto gait = synthetic_gait_database(12);
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-0.1, 0.1), a(-0.8, 0.8);
    for (int i = 0; i < 100; ++i) {
        const auto obs = linear_window(7, Vec3(u(rng), u(rng), 0), a(rng));
        const auto r = reconstruct_pedestrian(gait.database, gait.library, obs, RigidTransform::identity(), {11, 1});
        const auto m = match_phase(gait.database, observation_descriptor(obs));
        EXPECT_EQ(r.match.phase, m.phase);
        EXPECT_EQ(r.posed.mesh.vertices, gait.library.at(gait.database.phases()[m.phase].mesh_id).mesh.vertices);
    }
}

TEST(Reconstruct, MissingMeshErrors) {
    const GaitDatabase db({{0, "a", {0, 0}}, {1, "b", {1, 1}}}, {1, 1});
    EXPECT_THROW(reconstruct_pedestrian(db, MeshLibrary{}, linear_window(3, Vec3::Zero(), 0), RigidTransform::identity(),
                                        {11, 1}),
                 GaitError);
}
