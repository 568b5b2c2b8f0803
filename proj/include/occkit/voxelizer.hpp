#pragma once

#include "occkit/geometry.hpp"
#include "occkit/grid.hpp"
#include "occkit/intersect.hpp"
#include "occkit/parallel.hpp"
#include "occkit/scene.hpp"
#include "occkit/taxonomy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace occkit {

// Which plan steps get their interiors filled. Stuff groups and closed thing
// meshes default to filled; per-class entries override both defaults.
struct FillPolicy {
    bool enabled = true;
    bool stuff = true;
    bool closed_things = true;
    std::map<SemanticId, bool> per_class;

    static FillPolicy none() {
        FillPolicy p;
        p.enabled = false;
        return p;
    }

    bool resolve(SemanticId semantic, bool is_stuff, bool closed) const {
        if (!enabled) return false;
        if (auto it = per_class.find(semantic); it != per_class.end()) return it->second;
        return is_stuff ? stuff : (closed && closed_things);
    }
};

struct VoxelizeOptions {
    FillPolicy fill;
    PriorityTable priorities = SemanticTaxonomy::default_taxonomy().priorities();
    unsigned threads = 1;
};

struct FusedStuff {
    TriangleMesh mesh;
    SemanticId semantic = kFreeSpace;
    double elevation = 0.0;  // min z over the member meshes before cropping
};

struct PlanStep {
    TriangleMesh mesh;
    PanopticLabel label;
    bool is_stuff = false;
    bool solid_fill = false;
    double sort_key = 0.0;
    int priority = 0;
};

struct VoxelizePlan {
    GridSpec spec;
    std::vector<PlanStep> steps;
};

namespace detail {

// Total order on meshes by content; the last resort for plan ties.
inline bool mesh_less(const TriangleMesh& a, const TriangleMesh& b) {
    if (a.triangle_count() != b.triangle_count()) return a.triangle_count() < b.triangle_count();
    for (std::size_t i = 0; i < a.triangle_count(); ++i) {
        const Triangle ta = a.triangle(i), tb = b.triangle(i);
        for (const auto& [pa, pb] : {std::pair{&ta.a, &tb.a}, std::pair{&ta.b, &tb.b}, std::pair{&ta.c, &tb.c}}) {
            for (int k = 0; k < 3; ++k) {
                if ((*pa)[k] != (*pb)[k]) return (*pa)[k] < (*pb)[k];
            }
        }
    }
    return false;
}

inline double min_z(const TriangleMesh& mesh) {
    double z = std::numeric_limits<double>::infinity();
    for (const auto& t : mesh.triangles)
        for (auto idx : t) z = std::min(z, mesh.vertices[idx].z());
    return z;
}

struct CellRange {
    std::array<std::int64_t, 3> lo{0, 0, 0};
    std::array<std::int64_t, 3> hi{-1, -1, -1};  // inclusive

    bool empty() const { return hi[0] < lo[0] || hi[1] < lo[1] || hi[2] < lo[2]; }
};

// Cells that could overlap `box` (one cell of slack on each side, which the
// exact overlap test then discards), clamped to the grid.
inline CellRange cell_range(const Aabb& box, const GridSpec& spec) {
    CellRange r;
    for (int a = 0; a < 3; ++a) {
        const double lo = std::floor((box.min[a] - spec.origin[a]) / spec.voxel_size) - 1.0;
        const double hi = std::floor((box.max[a] - spec.origin[a]) / spec.voxel_size) + 1.0;
        r.lo[a] = static_cast<std::int64_t>(std::max(lo, 0.0));
        r.hi[a] = static_cast<std::int64_t>(std::min(hi, double(spec.dims[a]) - 1.0));
    }
    return r;
}

// Dense byte mask over an axis-aligned block of grid cells.
class VoxelBlock {
public:
    static constexpr std::uint8_t kEmpty = 0;
    static constexpr std::uint8_t kSurface = 1;
    static constexpr std::uint8_t kOutside = 2;

    VoxelBlock() = default;
    explicit VoxelBlock(const CellRange& range) : range_(range) {
        if (range.empty()) return;
        for (int a = 0; a < 3; ++a) size_[a] = range.hi[a] - range.lo[a] + 1;
        cells_.assign(std::size_t(size_[0] * size_[1] * size_[2]), kEmpty);
    }

    bool empty() const { return cells_.empty(); }
    const CellRange& range() const { return range_; }
    const std::array<std::int64_t, 3>& size() const { return size_; }

    std::size_t local(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return std::size_t((x - range_.lo[0]) + size_[0] * ((y - range_.lo[1]) + size_[1] * (z - range_.lo[2])));
    }
    std::uint8_t& operator[](std::size_t i) { return cells_[i]; }
    std::uint8_t operator[](std::size_t i) const { return cells_[i]; }
    std::size_t cell_count() const { return cells_.size(); }

    VoxelIndex global(std::size_t i) const {
        const auto x = std::int64_t(i % size_[0]);
        const auto y = std::int64_t((i / size_[0]) % size_[1]);
        const auto z = std::int64_t(i / (size_[0] * size_[1]));
        return {x + range_.lo[0], y + range_.lo[1], z + range_.lo[2]};
    }

    // Marks everything reachable through empty cells from the block's
    // boundary faces as kOutside (6-connectivity).
    void flood_outside() {
        if (cells_.empty()) return;
        std::vector<std::size_t> stack;
        auto seed = [&](std::size_t i) {
            if (cells_[i] == kEmpty) {
                cells_[i] = kOutside;
                stack.push_back(i);
            }
        };
        const auto [sx, sy, sz] = size_;
        for (std::int64_t z = 0; z < sz; ++z)
            for (std::int64_t y = 0; y < sy; ++y)
                for (std::int64_t x = 0; x < sx; ++x)
                    if (x == 0 || y == 0 || z == 0 || x == sx - 1 || y == sy - 1 || z == sz - 1)
                        seed(std::size_t(x + sx * (y + sy * z)));
        const std::int64_t strides[3] = {1, sx, sx * sy};
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const std::int64_t coord[3] = {std::int64_t(i % sx), std::int64_t((i / sx) % sy), std::int64_t(i / (sx * sy))};
            for (int a = 0; a < 3; ++a) {
                if (coord[a] > 0) seed(i - strides[a]);
                if (coord[a] + 1 < size_[a]) seed(i + strides[a]);
            }
        }
    }

private:
    CellRange range_;
    std::array<std::int64_t, 3> size_{0, 0, 0};
    std::vector<std::uint8_t> cells_;
};

inline CellRange pad(CellRange r, const GridSpec& spec) {
    if (r.empty()) return r;
    for (int a = 0; a < 3; ++a) {
        r.lo[a] = std::max<std::int64_t>(r.lo[a] - 1, 0);
        r.hi[a] = std::min<std::int64_t>(r.hi[a] + 1, spec.dims[a] - 1);
    }
    return r;
}

// Surface cells of `mesh` as a block. With `padded` the block gets one extra
// (grid-clamped) layer so the flood fill can reach around the surface.
inline VoxelBlock rasterize(const TriangleMesh& mesh, const GridSpec& spec, bool padded, unsigned threads) {
    std::vector<CellRange> ranges;
    ranges.reserve(mesh.triangle_count());
    CellRange total;
    bool any = false;
    for (std::size_t i = 0; i < mesh.triangle_count(); ++i) {
        const CellRange r = cell_range(mesh.triangle(i).bounds(), spec);
        ranges.push_back(r);
        if (r.empty()) continue;
        if (!any) {
            total = r;
            any = true;
        } else {
            for (int a = 0; a < 3; ++a) {
                total.lo[a] = std::min(total.lo[a], r.lo[a]);
                total.hi[a] = std::max(total.hi[a], r.hi[a]);
            }
        }
    }
    if (!any) return {};
    VoxelBlock block(padded ? pad(total, spec) : total);
    const Vec3 half = Vec3::Constant(0.5 * spec.voxel_size);

    // Disjoint z-slabs per worker; every cell's value depends only on the
    // overlap test, so the result is independent of the thread count.
    parallel_chunks(std::size_t(total.lo[2]), std::size_t(total.hi[2] + 1), threads, [&](std::size_t z0, std::size_t z1) {
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            const CellRange& r = ranges[i];
            if (r.empty()) continue;
            const std::int64_t zlo = std::max<std::int64_t>(r.lo[2], std::int64_t(z0));
            const std::int64_t zhi = std::min<std::int64_t>(r.hi[2], std::int64_t(z1) - 1);
            if (zlo > zhi) continue;
            const Triangle tri = mesh.triangle(i);
            for (std::int64_t z = zlo; z <= zhi; ++z)
                for (std::int64_t y = r.lo[1]; y <= r.hi[1]; ++y)
                    for (std::int64_t x = r.lo[0]; x <= r.hi[0]; ++x) {
                        const std::size_t cell = block.local(x, y, z);
                        if (block[cell] == VoxelBlock::kSurface) continue;
                        if (triangle_box_overlap(tri, voxel_center(spec, {x, y, z}), half))
                            block[cell] = VoxelBlock::kSurface;
                    }
        }
    });
    return block;
}

}  // namespace detail

// One geometry group per stuff class holding that class's triangles whose
// bounds touch the grid volume. Output sorted by semantic id; members are
// concatenated in a content-defined order.
inline std::vector<FusedStuff> fuse_stuff(const PanopticSceneMesh& scene, const GridSpec& spec) {
    spec.validate();
    const Aabb volume = spec.bounds();
    std::map<SemanticId, std::vector<const LabeledMesh*>> by_class;
    for (const auto& e : scene.entries)
        if (e.is_stuff && !e.mesh.empty()) by_class[e.label.semantic].push_back(&e);

    std::vector<FusedStuff> out;
    for (auto& [semantic, members] : by_class) {
        std::sort(members.begin(), members.end(),
                  [](const LabeledMesh* a, const LabeledMesh* b) { return detail::mesh_less(a->mesh, b->mesh); });
        FusedStuff fused;
        fused.semantic = semantic;
        fused.elevation = std::numeric_limits<double>::infinity();
        for (const LabeledMesh* m : members) {
            fused.elevation = std::min(fused.elevation, detail::min_z(m->mesh));
            std::vector<std::int64_t> remap(m->mesh.vertex_count(), -1);
            for (std::size_t i = 0; i < m->mesh.triangle_count(); ++i) {
                if (!m->mesh.triangle(i).bounds().intersects(volume)) continue;
                TriangleIndices t{};
                for (int k = 0; k < 3; ++k) {
                    const auto src = m->mesh.triangles[i][k];
                    if (remap[src] < 0) {
                        remap[src] = std::int64_t(fused.mesh.vertices.size());
                        fused.mesh.vertices.push_back(m->mesh.vertices[src]);
                    }
                    t[k] = static_cast<std::uint32_t>(remap[src]);
                }
                fused.mesh.triangles.push_back(t);
            }
        }
        if (!fused.mesh.empty()) out.push_back(std::move(fused));
    }
    return out;
}

// Write order: ascending elevation (min z), then priority rank, instance id,
// semantic id, and mesh content. Later steps overwrite earlier ones.
inline VoxelizePlan build_plan(const PanopticSceneMesh& scene, const GridSpec& spec, const PriorityTable& priorities,
                               const FillPolicy& fill) {
    auto rank = [&](SemanticId s) {
        auto it = priorities.find(s);
        return it == priorities.end() ? 0 : it->second;
    };
    VoxelizePlan plan;
    plan.spec = spec;
    for (auto& fused : fuse_stuff(scene, spec)) {
        PlanStep step;
        step.label = {fused.semantic, 0};
        step.is_stuff = true;
        step.solid_fill = fill.resolve(fused.semantic, true, false);
        step.sort_key = fused.elevation;
        step.priority = rank(fused.semantic);
        step.mesh = std::move(fused.mesh);
        plan.steps.push_back(std::move(step));
    }
    for (const auto& e : scene.entries) {
        if (e.is_stuff || e.mesh.empty() || e.label.free()) continue;
        PlanStep step;
        step.mesh = e.mesh;
        step.label = e.label;
        step.solid_fill = fill.resolve(e.label.semantic, false, e.closed);
        step.sort_key = detail::min_z(e.mesh);
        step.priority = rank(e.label.semantic);
        plan.steps.push_back(std::move(step));
    }
    std::sort(plan.steps.begin(), plan.steps.end(), [](const PlanStep& a, const PlanStep& b) {
        if (a.sort_key != b.sort_key) return a.sort_key < b.sort_key;
        if (a.priority != b.priority) return a.priority < b.priority;
        if (a.label.instance != b.label.instance) return a.label.instance < b.label.instance;
        if (a.label.semantic != b.label.semantic) return a.label.semantic < b.label.semantic;
        if (a.solid_fill != b.solid_fill) return a.solid_fill < b.solid_fill;
        return detail::mesh_less(a.mesh, b.mesh);
    });
    return plan;
}

// In-bounds voxels whose closed cell box overlaps at least one triangle,
// as sorted linear indices.
inline std::vector<LinearIndex> voxelize_surface(const TriangleMesh& group, const GridSpec& spec, unsigned threads = 1) {
    spec.validate();
    const detail::VoxelBlock block = detail::rasterize(group, spec, false, threads);
    std::vector<LinearIndex> out;
    for (std::size_t i = 0; i < block.cell_count(); ++i)
        if (block[i] == detail::VoxelBlock::kSurface) out.push_back(spec.linearize(block.global(i)));
    std::sort(out.begin(), out.end());
    return out;
}

// Surface plus every voxel not reachable from the grid boundary through
// non-surface voxels. The flood runs on the surface's bounding block plus a
// one-voxel margin, which reaches exactly the same cells as a whole-grid
// flood: everything outside that block is connected to the grid boundary.
inline std::vector<LinearIndex> solid_fill(std::span<const LinearIndex> surface, const GridSpec& spec) {
    spec.validate();
    if (surface.empty()) return {};
    detail::CellRange range;
    range.lo = {std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max(),
                std::numeric_limits<std::int64_t>::max()};
    range.hi = {-1, -1, -1};
    for (const auto i : surface) {
        if (i >= spec.voxel_count()) throw GridError("surface voxel index outside grid");
        const VoxelIndex v = spec.delinearize(i);
        const std::int64_t c[3] = {v.x, v.y, v.z};
        for (int a = 0; a < 3; ++a) {
            range.lo[a] = std::min(range.lo[a], c[a]);
            range.hi[a] = std::max(range.hi[a], c[a]);
        }
    }
    detail::VoxelBlock block(detail::pad(range, spec));
    for (const auto i : surface) {
        const VoxelIndex v = spec.delinearize(i);
        block[block.local(v.x, v.y, v.z)] = detail::VoxelBlock::kSurface;
    }
    block.flood_outside();
    std::vector<LinearIndex> out;
    for (std::size_t i = 0; i < block.cell_count(); ++i)
        if (block[i] != detail::VoxelBlock::kOutside) out.push_back(spec.linearize(block.global(i)));
    std::sort(out.begin(), out.end());
    return out;
}

// Replays the plan into a fresh grid with last-write-wins per voxel.
inline PanopticGrid execute_plan(const VoxelizePlan& plan, unsigned threads = 1) {
    plan.spec.validate();
    std::vector<PanopticLabel> labels(plan.spec.voxel_count());
    for (const auto& step : plan.steps) {
        detail::VoxelBlock block = detail::rasterize(step.mesh, plan.spec, step.solid_fill, threads);
        if (block.empty()) continue;
        if (step.solid_fill) block.flood_outside();
        const auto& r = block.range();
        for (std::int64_t z = r.lo[2]; z <= r.hi[2]; ++z)
            for (std::int64_t y = r.lo[1]; y <= r.hi[1]; ++y) {
                std::size_t cell = block.local(r.lo[0], y, z);
                LinearIndex out = plan.spec.linearize({r.lo[0], y, z});
                for (std::int64_t x = r.lo[0]; x <= r.hi[0]; ++x, ++cell, ++out) {
                    const auto v = block[cell];
                    if (v == detail::VoxelBlock::kSurface || (step.solid_fill && v == detail::VoxelBlock::kEmpty))
                        labels[out] = step.label;
                }
            }
    }
    return PanopticGrid(plan.spec, std::move(labels));
}

inline PanopticGrid generate_occupancy(const PanopticSceneMesh& scene, const GridSpec& spec,
                                       const VoxelizeOptions& options = {}) {
    spec.validate();
    return execute_plan(build_plan(scene, spec, options.priorities, options.fill), resolve_threads(options.threads));
}

}  // namespace occkit
