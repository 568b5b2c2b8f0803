#pragma once

#include "occkit/geometry.hpp"
#include "occkit/grid.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace occkit {

class SceneError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenePlacement {
    std::string mesh_id;
    RigidTransform transform;
    PanopticLabel label;
    bool is_stuff = false;
    bool transparent = false;
    bool semantic_inconsistent = false;

    void validate() const {
        if (!label.valid()) throw SceneError("placement '" + mesh_id + "': free-space label with an instance id");
        if (is_stuff && label.instance != 0)
            throw SceneError("placement '" + mesh_id + "': stuff placement carries an instance id");
        if (!transform.is_valid(1e-6)) throw SceneError("placement '" + mesh_id + "': transform is not rigid");
    }
};

struct SceneManifest {
    std::vector<ScenePlacement> objects;
};

struct MeshEntry {
    TriangleMesh mesh;
    SemanticId semantic = kFreeSpace;
    Aabb local_bounds;
    bool closed = false;
};

// Template meshes keyed by id. Bounds and closedness are computed once at
// insertion.
class MeshLibrary {
public:
    void add(const std::string& id, TriangleMesh mesh, SemanticId semantic = kFreeSpace) {
        MeshEntry entry;
        entry.local_bounds = mesh.vertices.empty() ? Aabb{} : mesh_aabb(mesh);
        entry.closed = is_closed(mesh);
        entry.mesh = std::move(mesh);
        entry.semantic = semantic;
        entries_[id] = std::move(entry);
    }

    bool contains(const std::string& id) const { return entries_.count(id) > 0; }

    const MeshEntry& at(const std::string& id) const {
        auto it = entries_.find(id);
        if (it == entries_.end()) throw SceneError("unknown mesh id '" + id + "'");
        return it->second;
    }

    std::size_t size() const { return entries_.size(); }
    const std::map<std::string, MeshEntry>& entries() const { return entries_; }

private:
    std::map<std::string, MeshEntry> entries_;
};

struct LabeledMesh {
    TriangleMesh mesh;  // world space
    PanopticLabel label;
    bool is_stuff = false;
    bool closed = false;
};

struct PanopticSceneMesh {
    std::vector<LabeledMesh> entries;

    std::size_t triangle_count() const {
        std::size_t n = 0;
        for (const auto& e : entries) n += e.mesh.triangle_count();
        return n;
    }
};

// Placements whose re-posed mesh bounds, expressed in the LiDAR frame
// (lidar_pose^-1 * T_i), touch `region_box`. The bounds test is a
// conservative stand-in for exact mesh/region intersection.
inline std::vector<ScenePlacement> select_background(const std::vector<ScenePlacement>& scene,
                                                     const MeshLibrary& lib, const Aabb& region_box,
                                                     const RigidTransform& lidar_pose) {
    const RigidTransform world_to_lidar = lidar_pose.inverse();
    std::vector<ScenePlacement> selected;
    for (const auto& p : scene) {
        const MeshEntry& entry = lib.at(p.mesh_id);
        if (entry.mesh.vertices.empty()) continue;
        const RigidTransform to_lidar = world_to_lidar * p.transform;
        Aabb box;
        for (const auto& v : entry.mesh.vertices) box.extend(to_lidar.apply(v));
        if (box.intersects(region_box)) selected.push_back(p);
    }
    return selected;
}

// A mesh already posed by the caller (e.g. a matched gait template) plus the
// transform that places it in the world.
struct PosedMesh {
    TriangleMesh mesh;
    RigidTransform transform;
    PanopticLabel label;
};

// Union of background, rigid foreground, and non-rigid foreground in world
// coordinates. No deduplication; instance ids of things must be unique
// (instance 0 marks a thing without identity and is exempt).
inline PanopticSceneMesh assemble_panoptic_mesh(const std::vector<ScenePlacement>& background,
                                                const std::vector<ScenePlacement>& rigid_fg,
                                                const std::vector<PosedMesh>& nonrigid_fg, const MeshLibrary& lib) {
    PanopticSceneMesh scene;
    std::set<InstanceId> seen;
    auto claim = [&](const PanopticLabel& label, bool is_stuff) {
        if (!label.valid()) throw SceneError("invalid panoptic label");
        if (is_stuff || label.instance == 0) return;
        if (!seen.insert(label.instance).second)
            throw SceneError("duplicate thing instance id " + std::to_string(label.instance));
    };
    for (const auto* group : {&background, &rigid_fg}) {
        for (const auto& p : *group) {
            p.validate();
            claim(p.label, p.is_stuff);
            const MeshEntry& entry = lib.at(p.mesh_id);
            scene.entries.push_back({transform_mesh(entry.mesh, p.transform), p.label, p.is_stuff, entry.closed});
        }
    }
    for (const auto& p : nonrigid_fg) {
        claim(p.label, false);
        scene.entries.push_back({transform_mesh(p.mesh, p.transform), p.label, false, is_closed(p.mesh)});
    }
    return scene;
}

// Whole manifest as a panoptic scene mesh, no region selection.
inline PanopticSceneMesh assemble_manifest(const SceneManifest& manifest, const MeshLibrary& lib) {
    return assemble_panoptic_mesh(manifest.objects, {}, {}, lib);
}

inline PanopticSceneMesh transform_scene(const PanopticSceneMesh& scene, const RigidTransform& t) {
    PanopticSceneMesh out;
    out.entries.reserve(scene.entries.size());
    for (const auto& e : scene.entries) out.entries.push_back({transform_mesh(e.mesh, t), e.label, e.is_stuff, e.closed});
    return out;
}

}  // namespace occkit
