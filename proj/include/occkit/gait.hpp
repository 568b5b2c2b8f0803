#pragma once

#include "occkit/geometry.hpp"
#include "occkit/scene.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace occkit {

class GaitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Motion descriptor: forward displacement per frame and relative
// articulation angle. The angle is opaque to this module.
struct GaitDescriptor {
    double forward_step = 0.0;
    double relative_angle = 0.0;

    bool finite() const { return std::isfinite(forward_step) && std::isfinite(relative_angle); }
    bool operator==(const GaitDescriptor&) const = default;
};

struct GaitPhase {
    std::uint32_t index = 0;
    std::string mesh_id;
    GaitDescriptor descriptor;
};

class GaitDatabase {
public:
    GaitDatabase() = default;

    // `sigma` holds the diagonal of the descriptor covariance.
    GaitDatabase(std::vector<GaitPhase> phases, std::array<double, 2> sigma)
        : phases_(std::move(phases)), sigma_(sigma) {
        if (phases_.size() < 2) throw GaitError("gait database needs at least 2 phases");
        if (!(sigma_[0] > 0.0) || !(sigma_[1] > 0.0) || !std::isfinite(sigma_[0]) || !std::isfinite(sigma_[1]))
            throw GaitError("gait covariance diagonal must be positive");
        for (std::size_t d = 0; d < phases_.size(); ++d) {
            if (phases_[d].index != d) throw GaitError("gait phases must be indexed 0..D-1 in order");
            if (!phases_[d].descriptor.finite())
                throw GaitError("gait phase " + std::to_string(d) + " has a non-finite descriptor");
        }
    }

    const std::vector<GaitPhase>& phases() const { return phases_; }
    std::size_t size() const { return phases_.size(); }
    const std::array<double, 2>& sigma() const { return sigma_; }

    // Squared Mahalanobis distance ||a - b||^2 under the diagonal covariance.
    double mahalanobis2(const GaitDescriptor& a, const GaitDescriptor& b) const {
        const double dx = a.forward_step - b.forward_step;
        const double da = a.relative_angle - b.relative_angle;
        return dx * dx / sigma_[0] + da * da / sigma_[1];
    }

private:
    std::vector<GaitPhase> phases_;
    std::array<double, 2> sigma_{1.0, 1.0};
};

struct KinematicSample {
    Vec3 position = Vec3::Zero();
    double articulation_angle = 0.0;
};

// W samples centred on the frame being matched. `heading` is the
// pedestrian's facing direction (e.g. the x axis of its global transform);
// without it the central velocity defines the heading.
struct GaitObservation {
    std::vector<KinematicSample> window;
    std::optional<Vec3> heading;

    void validate() const {
        if (window.size() < 3 || window.size() % 2 == 0)
            throw GaitError("observation window must have an odd length >= 3 (got " + std::to_string(window.size()) +
                            ")");
        for (const auto& s : window)
            if (!s.position.allFinite() || !std::isfinite(s.articulation_angle))
                throw GaitError("observation window contains non-finite samples");
        if (heading && !heading->allFinite()) throw GaitError("observation heading is non-finite");
    }
};

inline constexpr double kStandingSpeed = 1e-6;  // m/frame

inline GaitDescriptor observation_descriptor(const GaitObservation& obs) {
    obs.validate();
    const std::size_t c = obs.window.size() / 2;
    const Vec3 velocity = 0.5 * (obs.window[c + 1].position - obs.window[c - 1].position);

    Vec3 heading = obs.heading.value_or(velocity);
    heading.z() = 0.0;
    GaitDescriptor out;
    out.relative_angle = obs.window[c].articulation_angle;
    const double horizontal_speed = std::hypot(velocity.x(), velocity.y());
    if (horizontal_speed < kStandingSpeed || heading.norm() < 1e-12) return out;
    out.forward_step = velocity.dot(heading.normalized());
    return out;
}

struct PhaseMatch {
    std::uint32_t phase = 0;
    double likelihood = 0.0;
    double mahalanobis2 = 0.0;
};

// Maximum-likelihood phase. The Gaussian likelihood is a monotone transform
// of the Mahalanobis distance, so the scan minimises the distance directly
// (immune to exp underflow); ties go to the smallest phase index.
inline PhaseMatch match_phase(const GaitDatabase& db, const GaitDescriptor& observed) {
    if (db.size() < 2) throw GaitError("gait database is empty");
    if (!observed.finite()) throw GaitError("observation descriptor is non-finite");
    PhaseMatch best;
    best.mahalanobis2 = std::numeric_limits<double>::infinity();
    for (const auto& phase : db.phases()) {
        const double m2 = db.mahalanobis2(observed, phase.descriptor);
        if (m2 < best.mahalanobis2) {
            best.phase = phase.index;
            best.mahalanobis2 = m2;
        }
    }
    best.likelihood = std::exp(-0.5 * best.mahalanobis2);
    return best;
}

struct ReconstructedPedestrian {
    PosedMesh posed;
    PhaseMatch match;
};

// Template of the matched phase placed by the pedestrian's global pose.
inline ReconstructedPedestrian reconstruct_pedestrian(const GaitDatabase& db, const MeshLibrary& lib,
                                                      const GaitObservation& obs, const RigidTransform& global_pose,
                                                      PanopticLabel label) {
    const PhaseMatch match = match_phase(db, observation_descriptor(obs));
    const std::string& mesh_id = db.phases()[match.phase].mesh_id;
    if (!lib.contains(mesh_id))
        throw GaitError("gait phase " + std::to_string(match.phase) + " references missing mesh '" + mesh_id + "'");
    return {{lib.at(mesh_id).mesh, global_pose, label}, match};
}

}  // namespace occkit
