#pragma once

#include "occkit/geometry.hpp"

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace occkit {

class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct VoxelIndex {
    std::int64_t x = 0, y = 0, z = 0;
    auto operator<=>(const VoxelIndex&) const = default;
};

using LinearIndex = std::size_t;

// Metric placement of a dense grid. `origin` is the min corner of voxel
// (0,0,0); linear index = x + X * (y + Y * z).
struct GridSpec {
    Vec3 origin = Vec3::Zero();
    double voxel_size = 1.0;
    std::array<std::uint32_t, 3> dims{1, 1, 1};

    void validate() const {
        if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) throw GridError("voxel size must be positive");
        if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) throw GridError("grid dims must be >= 1");
        if (!origin.allFinite()) throw GridError("grid origin must be finite");
    }

    std::size_t voxel_count() const { return std::size_t(dims[0]) * dims[1] * dims[2]; }

    bool contains(const VoxelIndex& v) const {
        return v.x >= 0 && v.y >= 0 && v.z >= 0 && v.x < dims[0] && v.y < dims[1] && v.z < dims[2];
    }

    LinearIndex linearize(const VoxelIndex& v) const {
        return LinearIndex(v.x) + LinearIndex(dims[0]) * (LinearIndex(v.y) + LinearIndex(dims[1]) * LinearIndex(v.z));
    }

    VoxelIndex delinearize(LinearIndex i) const {
        const LinearIndex plane = LinearIndex(dims[0]) * dims[1];
        const auto z = i / plane;
        const auto rem = i % plane;
        return {std::int64_t(rem % dims[0]), std::int64_t(rem / dims[0]), std::int64_t(z)};
    }

    Aabb bounds() const {
        const Vec3 size(dims[0] * voxel_size, dims[1] * voxel_size, dims[2] * voxel_size);
        return {origin, origin + size};
    }

    // Voxel containing p (half-open cells), or nothing when outside.
    std::optional<VoxelIndex> world_to_voxel(const Vec3& p) const {
        const Vec3 rel = (p - origin) / voxel_size;
        VoxelIndex v{static_cast<std::int64_t>(std::floor(rel.x())), static_cast<std::int64_t>(std::floor(rel.y())),
                     static_cast<std::int64_t>(std::floor(rel.z()))};
        if (!rel.allFinite() || !contains(v)) return std::nullopt;
        return v;
    }

    // Same voxel size and dims, origin within a float32 round-off of the voxel
    // size (grid files store the size as float32).
    bool compatible(const GridSpec& o) const {
        if (dims != o.dims) return false;
        if (std::abs(voxel_size - o.voxel_size) > 1e-6 * std::max(voxel_size, o.voxel_size)) return false;
        return (origin - o.origin).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, origin.cwiseAbs().maxCoeff());
    }
};

inline Vec3 voxel_center(const GridSpec& spec, const VoxelIndex& v) {
    if (!spec.contains(v))
        throw GridError("voxel (" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " + std::to_string(v.z) +
                        ") outside grid");
    return spec.origin + Vec3(v.x + 0.5, v.y + 0.5, v.z + 0.5) * spec.voxel_size;
}

// Face-adjacent in-bounds indices, in the order -x, +x, -y, +y, -z, +z.
inline std::vector<VoxelIndex> neighbors6(const GridSpec& spec, const VoxelIndex& v) {
    static constexpr int offsets[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    std::vector<VoxelIndex> out;
    out.reserve(6);
    for (const auto& o : offsets) {
        const VoxelIndex n{v.x + o[0], v.y + o[1], v.z + o[2]};
        if (spec.contains(n)) out.push_back(n);
    }
    return out;
}

using SemanticId = std::uint16_t;
using InstanceId = std::uint16_t;

inline constexpr SemanticId kFreeSpace = 0;

struct PanopticLabel {
    SemanticId semantic = kFreeSpace;
    InstanceId instance = 0;

    bool free() const { return semantic == kFreeSpace; }
    bool valid() const { return semantic != kFreeSpace || instance == 0; }
    auto operator<=>(const PanopticLabel&) const = default;
};

class PanopticGrid {
public:
    PanopticGrid() = default;

    explicit PanopticGrid(const GridSpec& spec) : spec_(spec) {
        spec_.validate();
        labels_.assign(spec_.voxel_count(), PanopticLabel{});
    }

    PanopticGrid(const GridSpec& spec, std::vector<PanopticLabel> labels) : spec_(spec), labels_(std::move(labels)) {
        spec_.validate();
        if (labels_.size() != spec_.voxel_count()) throw GridError("label count does not match grid dims");
        for (const auto& l : labels_)
            if (!l.valid()) throw GridError("free-space voxel carries an instance id");
    }

    const GridSpec& spec() const { return spec_; }
    std::size_t size() const { return labels_.size(); }

    const PanopticLabel& at(LinearIndex i) const { return labels_.at(i); }
    const PanopticLabel& at(const VoxelIndex& v) const {
        if (!spec_.contains(v)) throw GridError("voxel outside grid");
        return labels_[spec_.linearize(v)];
    }
    const PanopticLabel& operator[](LinearIndex i) const { return labels_[i]; }

    void set(LinearIndex i, PanopticLabel label) {
        if (!label.valid()) throw GridError("free-space label carries an instance id");
        labels_.at(i) = label;
    }
    void set(const VoxelIndex& v, PanopticLabel label) {
        if (!spec_.contains(v)) throw GridError("voxel outside grid");
        set(spec_.linearize(v), label);
    }

    const std::vector<PanopticLabel>& labels() const { return labels_; }

    bool operator==(const PanopticGrid& o) const { return spec_.compatible(o.spec_) && labels_ == o.labels_; }

private:
    GridSpec spec_;
    std::vector<PanopticLabel> labels_;
};

// Sorted linear indices of voxels whose semantic equals `c`.
inline std::vector<LinearIndex> class_voxels(const PanopticGrid& grid, SemanticId c) {
    if (c == kFreeSpace) throw GridError("class id 0 is free space");
    std::vector<LinearIndex> out;
    const auto& labels = grid.labels();
    for (LinearIndex i = 0; i < labels.size(); ++i)
        if (labels[i].semantic == c) out.push_back(i);
    return out;
}

// Extents around a reference pose: x forward, y left, z up.
struct OccupancyRegion {
    double forward = 51.2;
    double backward = 25.6;
    double left = 25.6;
    double right = 25.6;
    double height_up = 11.0;
    double height_down = 2.0;

    // Forward 51.2 m, backward 25.6 m, 25.6 m to each side, 13 m tall with
    // 2 m below the anchor.
    static OccupancyRegion lidar_default() { return {}; }

    void validate() const {
        for (double e : {forward, backward, left, right, height_up, height_down})
            if (!(e >= 0.0) || !std::isfinite(e)) throw GridError("region extents must be finite and >= 0");
        if (!(forward + backward > 0.0) || !(left + right > 0.0) || !(height_up + height_down > 0.0))
            throw GridError("region must have positive size on every axis");
    }

    // The region as a box in the anchor frame.
    Aabb box() const { return {Vec3(-backward, -right, -height_down), Vec3(forward, left, height_up)}; }
};

namespace detail {

// ceil(extent / size), treating quotients within 1e-9 relative of an
// integer as that integer so 13 / 0.2 gives 65 rather than 66.
inline std::uint32_t cells_for(double extent, double size) {
    const double q = extent / size;
    const double r = std::round(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) return static_cast<std::uint32_t>(std::max(1.0, r));
    return static_cast<std::uint32_t>(std::max(1.0, std::ceil(q)));
}

}  // namespace detail

// Grid covering `region` in the anchor's gravity-aligned frame (see
// gravity_aligned_frame). The returned spec is expressed in that frame.
inline GridSpec region_to_spec(const OccupancyRegion& region, double voxel_size) {
    region.validate();
    if (!(voxel_size > 0.0)) throw GridError("voxel size must be positive");
    GridSpec spec;
    spec.voxel_size = voxel_size;
    spec.origin = region.box().min;
    spec.dims = {detail::cells_for(region.forward + region.backward, voxel_size),
                 detail::cells_for(region.left + region.right, voxel_size),
                 detail::cells_for(region.height_up + region.height_down, voxel_size)};
    return spec;
}

// Anchor pose with roll and pitch removed: same position, rotation about
// world z by the heading of the anchor's x axis.
inline RigidTransform gravity_aligned_frame(const RigidTransform& anchor) {
    const Vec3 fwd = anchor.rotation.col(0);
    const double yaw = std::hypot(fwd.x(), fwd.y()) > 1e-12 ? std::atan2(fwd.y(), fwd.x()) : 0.0;
    RigidTransform frame = RigidTransform::rotate(Vec3::UnitZ(), yaw);
    frame.translation = anchor.translation;
    return frame;
}

// A grid spec together with the frame it is expressed in.
struct AnchoredGrid {
    GridSpec spec;
    RigidTransform grid_to_world;
};

inline AnchoredGrid region_to_spec(const OccupancyRegion& region, const RigidTransform& anchor, double voxel_size) {
    return {region_to_spec(region, voxel_size), gravity_aligned_frame(anchor)};
}

}  // namespace occkit
