#pragma once

#include "occkit/grid.hpp"
#include "occkit/lidar.hpp"
#include "occkit/scene.hpp"
#include "occkit/voxelizer.hpp"

#include <vector>

namespace occkit {

// One frame's occupancy in the region around a LiDAR pose.
struct FrameOccupancy {
    AnchoredGrid anchored;
    PanopticGrid grid;
    std::size_t triangles = 0;  // triangles handed to the voxelizer
};

// Background placements touching the region plus the given non-rigid
// things, expressed in the grid frame and voxelized.
inline FrameOccupancy voxelize_frame(const SceneManifest& manifest, const MeshLibrary& lib,
                                     const RigidTransform& lidar_pose, const OccupancyRegion& region,
                                     double voxel_size, const VoxelizeOptions& options = {},
                                     const std::vector<PosedMesh>& nonrigid = {}) {
    region.validate();
    FrameOccupancy out{region_to_spec(region, lidar_pose, voxel_size), PanopticGrid{}, 0};
    const auto background = select_background(manifest.objects, lib, region.box(), out.anchored.grid_to_world);
    const auto world = assemble_panoptic_mesh(background, {}, nonrigid, lib);
    const auto local = transform_scene(world, out.anchored.grid_to_world.inverse());
    out.triangles = local.triangle_count();
    out.grid = generate_occupancy(local, out.anchored.spec, options);
    return out;
}

// Grid of the same frame built from simulated first-return LiDAR points.
inline PanopticGrid lidar_occupancy(const SceneManifest& manifest, const MeshLibrary& lib,
                                    const RigidTransform& lidar_pose, const AnchoredGrid& anchored,
                                    const LidarParams& params = {}, unsigned threads = 1) {
    const auto scene = LabeledBvh::from_scene(assemble_manifest(manifest, lib));
    const auto points = simulate_lidar(scene, lidar_pose, params, threads);
    return voxelize_points(points, anchored.spec, anchored.grid_to_world.inverse() * lidar_pose);
}

}  // namespace occkit
