#pragma once

#include "occkit/geometry.hpp"
#include "occkit/grid.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace occkit {

// Voxels of class c with no face-adjacent voxel of the same class.
inline std::vector<LinearIndex> isolated_voxels(const PanopticGrid& grid, SemanticId c) {
    if (c == kFreeSpace) throw GridError("class id 0 is free space");
    const GridSpec& spec = grid.spec();
    std::vector<LinearIndex> out;
    for (LinearIndex i = 0; i < grid.size(); ++i) {
        if (grid[i].semantic != c) continue;
        bool connected = false;
        for (const auto& n : neighbors6(spec, spec.delinearize(i))) {
            if (grid[spec.linearize(n)].semantic == c) {
                connected = true;
                break;
            }
        }
        if (!connected) out.push_back(i);
    }
    return out;
}

struct ContinuityCounts {
    std::uint64_t isolated = 0;
    std::uint64_t occupied = 0;

    // 1.0 for an empty grid: nothing is fragmented.
    double score() const { return occupied == 0 ? 1.0 : 1.0 - double(isolated) / double(occupied); }

    ContinuityCounts& operator+=(const ContinuityCounts& o) {
        isolated += o.isolated;
        occupied += o.occupied;
        return *this;
    }
};

// Isolated and occupied totals summed over all classes of one grid.
inline ContinuityCounts continuity_counts(const PanopticGrid& grid) {
    const GridSpec& spec = grid.spec();
    const std::int64_t sx = spec.dims[0], sy = spec.dims[1], sz = spec.dims[2];
    const std::int64_t stride[3] = {1, sx, sx * sy};
    const std::int64_t extent[3] = {sx, sy, sz};
    ContinuityCounts counts;
    LinearIndex i = 0;
    for (std::int64_t z = 0; z < sz; ++z)
        for (std::int64_t y = 0; y < sy; ++y)
            for (std::int64_t x = 0; x < sx; ++x, ++i) {
                const SemanticId c = grid[i].semantic;
                if (c == kFreeSpace) continue;
                ++counts.occupied;
                const std::int64_t coord[3] = {x, y, z};
                bool connected = false;
                for (int a = 0; a < 3 && !connected; ++a) {
                    if (coord[a] > 0 && grid[i - stride[a]].semantic == c) connected = true;
                    if (coord[a] + 1 < extent[a] && grid[i + stride[a]].semantic == c) connected = true;
                }
                if (!connected) ++counts.isolated;
            }
    return counts;
}

inline double spatial_continuity(std::span<const PanopticGrid> grids) {
    ContinuityCounts total;
    for (const auto& g : grids) total += continuity_counts(g);
    return total.score();
}

struct QualityConfig {
    enum class Aggregate { kDataset, kPerFrame };

    std::set<SemanticId> dynamic_classes;
    Aggregate aggregate = Aggregate::kDataset;

    bool is_dynamic(SemanticId c) const { return dynamic_classes.count(c) > 0; }
};

// Consecutive frames with their LiDAR-to-world poses. Each grid's spec is
// expressed in its own LiDAR frame.
struct FramePair {
    std::reference_wrapper<const PanopticGrid> grid_t;
    std::reference_wrapper<const PanopticGrid> grid_t1;
    RigidTransform pose_t;
    RigidTransform pose_t1;
};

struct WarpSample {
    LinearIndex source = 0;
    std::optional<SemanticId> sampled;  // empty when the warp leaves grid_t1
};

// Maps frame-t voxel centres into frame t+1 (pose_t1^-1 * pose_t) and
// samples the nearest voxel of grid_t1.
class FrameWarp {
public:
    explicit FrameWarp(const FramePair& pair)
        : source_(pair.grid_t.get().spec()), target_(pair.grid_t1.get()),
          relative_(pair.pose_t1.inverse() * pair.pose_t) {}

    std::optional<SemanticId> sample(LinearIndex source) const {
        const Vec3 p = relative_.apply(voxel_center(source_, source_.delinearize(source)));
        const auto v = target_.spec().world_to_voxel(p);
        if (!v) return std::nullopt;
        return target_[target_.spec().linearize(*v)].semantic;
    }

private:
    const GridSpec& source_;
    const PanopticGrid& target_;
    RigidTransform relative_;
};

inline std::vector<WarpSample> warp_labels(const FramePair& pair, SemanticId c) {
    const FrameWarp warp(pair);
    std::vector<WarpSample> out;
    for (const auto v : class_voxels(pair.grid_t.get(), c)) out.push_back({v, warp.sample(v)});
    return out;
}

struct TemporalCounts {
    std::uint64_t matched = 0;  // |warped ∩ V ∩ M|
    std::uint64_t valid = 0;    // |(warped ∪ V) ∩ M|

    double score() const { return valid == 0 ? 1.0 : double(matched) / double(valid); }

    TemporalCounts& operator+=(const TemporalCounts& o) {
        matched += o.matched;
        valid += o.valid;
        return *this;
    }
};

// Summed over classes. The valid mask drops warps that leave grid_t1 and
// voxels whose class is dynamic in either frame.
inline TemporalCounts temporal_counts(const FramePair& pair, const QualityConfig& cfg) {
    const PanopticGrid& grid = pair.grid_t.get();
    if (std::abs(pair.grid_t1.get().spec().voxel_size - grid.spec().voxel_size) > 1e-6 * grid.spec().voxel_size)
        throw GridError("frame pair grids must share a voxel size");
    const FrameWarp warp(pair);
    TemporalCounts counts;
    for (LinearIndex i = 0; i < grid.size(); ++i) {
        const SemanticId c = grid[i].semantic;
        if (c == kFreeSpace || cfg.is_dynamic(c)) continue;
        const auto sampled = warp.sample(i);
        if (!sampled || cfg.is_dynamic(*sampled)) continue;
        ++counts.valid;
        if (*sampled == c) ++counts.matched;
    }
    return counts;
}

inline double temporal_consistency(std::span<const FramePair> pairs, const QualityConfig& cfg) {
    if (cfg.aggregate == QualityConfig::Aggregate::kPerFrame) {
        if (pairs.empty()) return 1.0;
        double sum = 0.0;
        for (const auto& p : pairs) sum += temporal_counts(p, cfg).score();
        return sum / double(pairs.size());
    }
    TemporalCounts total;
    for (const auto& p : pairs) total += temporal_counts(p, cfg);
    return total.score();
}

}  // namespace occkit
