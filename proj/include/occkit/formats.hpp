#pragma once

#include "occkit/gait.hpp"
#include "occkit/geometry.hpp"
#include "occkit/mesh_io.hpp"
#include "occkit/scene.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace occkit {

// Schema violation in a JSON or text input; the message starts with the
// offending field path.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string() + ": cannot open");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

inline const nlohmann::json& field(const nlohmann::json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) throw SchemaError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(where + "." + key + ": missing");
    return *it;
}

inline double number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw SchemaError(where + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(where + ": not finite");
    return d;
}

template <typename T>
T unsigned_int(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<T>::max())
        throw SchemaError(where + ": expected an unsigned integer <= " +
                          std::to_string(std::uint64_t(std::numeric_limits<T>::max())));
    return static_cast<T>(v.get<std::uint64_t>());
}

inline bool boolean(const nlohmann::json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_boolean()) throw SchemaError(where + "." + key + ": expected a boolean");
    return it->get<bool>();
}

inline Mat4 matrix16(const nlohmann::json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 16) throw SchemaError(where + ": expected 16 numbers");
    Mat4 m;
    for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = number(v[i], where + "[" + std::to_string(i) + "]");
    return m;
}

inline RigidTransform rigid16(const nlohmann::json& v, const std::string& where) {
    try {
        return RigidTransform::from_matrix(matrix16(v, where));
    } catch (const GeometryError& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

inline Vec3 vec3(const nlohmann::json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw SchemaError(where + ": expected 3 numbers");
    return {number(v[0], where + "[0]"), number(v[1], where + "[1]"), number(v[2], where + "[2]")};
}

inline nlohmann::json matrix_json(const RigidTransform& t) {
    const Mat4 m = t.matrix();
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < 16; ++i) out.push_back(m(i / 4, i % 4));
    return out;
}

}  // namespace detail

// Manifest with its meshes resolved relative to the manifest directory. Mesh
// ids are the paths exactly as written in the manifest.
struct LoadedScene {
    SceneManifest manifest;
    MeshLibrary library;
};

inline SceneManifest manifest_from_json(const nlohmann::json& j) {
    using namespace detail;
    const auto& objects = field(j, "objects", "manifest");
    if (!objects.is_array()) throw SchemaError("objects: expected an array");
    SceneManifest m;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& o = objects[i];
        const std::string where = "objects[" + std::to_string(i) + "]";
        if (!o.is_object()) throw SchemaError(where + ": expected an object");
        if (!o.contains("mesh")) throw SchemaError(where + ".mesh: missing");
        if (!o.contains("transform")) throw SchemaError(where + ".transform: missing");
        if (!o.contains("semantic")) throw SchemaError(where + ".semantic: missing");
        ScenePlacement p;
        if (!o["mesh"].is_string()) throw SchemaError(where + ".mesh: expected a string");
        p.mesh_id = o["mesh"].get<std::string>();
        p.transform = rigid16(o["transform"], where + ".transform");
        p.label.semantic = unsigned_int<SemanticId>(o["semantic"], where + ".semantic");
        if (o.contains("instance")) p.label.instance = unsigned_int<InstanceId>(o["instance"], where + ".instance");
        p.is_stuff = boolean(o, "stuff", where);
        p.transparent = boolean(o, "transparent", where);
        p.semantic_inconsistent = boolean(o, "semantic_inconsistent", where);
        try {
            p.validate();
        } catch (const SceneError& e) {
            throw SchemaError(where + ": " + e.what());
        }
        m.objects.push_back(std::move(p));
    }
    return m;
}

inline nlohmann::json manifest_to_json(const SceneManifest& m) {
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& p : m.objects) {
        nlohmann::json o;
        o["mesh"] = p.mesh_id;
        o["transform"] = detail::matrix_json(p.transform);
        o["semantic"] = p.label.semantic;
        o["instance"] = p.label.instance;
        o["stuff"] = p.is_stuff;
        o["transparent"] = p.transparent;
        o["semantic_inconsistent"] = p.semantic_inconsistent;
        objects.push_back(std::move(o));
    }
    return {{"objects", std::move(objects)}};
}

inline LoadedScene load_scene(const std::filesystem::path& manifest_path) {
    LoadedScene scene;
    scene.manifest = manifest_from_json(detail::read_json_file(manifest_path));
    const auto dir = manifest_path.parent_path();
    for (std::size_t i = 0; i < scene.manifest.objects.size(); ++i) {
        const auto& p = scene.manifest.objects[i];
        if (scene.library.contains(p.mesh_id)) continue;
        try {
            auto loaded = load_mesh(dir / std::filesystem::u8path(p.mesh_id));
            scene.library.add(p.mesh_id, std::move(loaded.mesh), p.label.semantic);
        } catch (const std::exception& e) {
            throw SchemaError("objects[" + std::to_string(i) + "].mesh: " + e.what());
        }
    }
    return scene;
}

inline SceneManifest load_manifest(const std::filesystem::path& path) {
    return manifest_from_json(detail::read_json_file(path));
}

inline void save_manifest(const std::filesystem::path& path, const SceneManifest& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError(path.string() + ": cannot write");
    out << manifest_to_json(m).dump(2) << '\n';
}

// One LiDAR-to-world pose per non-blank line: 16 row-major numbers.
inline std::vector<RigidTransform> parse_poses(std::istream& in) {
    std::vector<RigidTransform> poses;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "line " + std::to_string(lineno);
        std::istringstream ls(line);
        Mat4 m;
        int n = 0;
        std::string tok;
        while (ls >> tok) {
            if (n == 16) throw SchemaError(where + ": more than 16 values");
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw SchemaError(where + ": '" + tok + "' is not a number");
            }
            if (!std::isfinite(v)) throw SchemaError(where + ": non-finite value");
            m(n / 4, n % 4) = v;
            ++n;
        }
        if (n != 16) throw SchemaError(where + ": expected 16 values, got " + std::to_string(n));
        const Eigen::RowVector4d bottom(0, 0, 0, 1);
        if ((m.row(3) - bottom).cwiseAbs().maxCoeff() > 1e-9) throw SchemaError(where + ": bottom row is not 0 0 0 1");
        const Mat3 r = m.block<3, 3>(0, 0);
        if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 || r.determinant() < 0.0)
            throw SchemaError(where + ": rotation block is not orthonormal");
        RigidTransform t;
        t.rotation = r;
        t.translation = m.block<3, 1>(0, 3);
        poses.push_back(t);
    }
    return poses;
}

inline std::vector<RigidTransform> load_poses(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string() + ": cannot open");
    try {
        return parse_poses(in);
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

inline void write_poses(std::ostream& out, const std::vector<RigidTransform>& poses) {
    out.precision(17);
    for (const auto& p : poses) {
        const Mat4 m = p.matrix();
        for (int i = 0; i < 16; ++i) out << m(i / 4, i % 4) << (i == 15 ? '\n' : ' ');
    }
}

// {fx, fy, cx, cy, width, height, cam_to_ego: [16]}; cam_to_world is set to
// cam_to_ego and can be composed with an ego pose by the caller.
inline PinholeCamera calibration_from_json(const nlohmann::json& j) {
    using namespace detail;
    PinholeCamera cam;
    cam.fx = number(field(j, "fx", "calib"), "fx");
    cam.fy = number(field(j, "fy", "calib"), "fy");
    cam.cx = number(field(j, "cx", "calib"), "cx");
    cam.cy = number(field(j, "cy", "calib"), "cy");
    cam.width = unsigned_int<std::uint32_t>(field(j, "width", "calib"), "width");
    cam.height = unsigned_int<std::uint32_t>(field(j, "height", "calib"), "height");
    cam.cam_to_world = rigid16(field(j, "cam_to_ego", "calib"), "cam_to_ego");
    try {
        cam.validate();
    } catch (const GeometryError& e) {
        throw SchemaError(std::string("calib: ") + e.what());
    }
    return cam;
}

inline nlohmann::json calibration_to_json(const PinholeCamera& cam) {
    return {{"fx", cam.fx},         {"fy", cam.fy},          {"cx", cam.cx},
            {"cy", cam.cy},         {"width", cam.width},    {"height", cam.height},
            {"cam_to_ego", detail::matrix_json(cam.cam_to_world)}};
}

inline PinholeCamera load_calibration(const std::filesystem::path& path) {
    return calibration_from_json(detail::read_json_file(path));
}

// {phases: [{phase, mesh_id, dx, theta_rel}], sigma: [s_dx, s_theta]}
inline GaitDatabase gait_database_from_json(const nlohmann::json& j) {
    using namespace detail;
    const auto& phases = field(j, "phases", "gait");
    if (!phases.is_array()) throw SchemaError("phases: expected an array");
    std::vector<GaitPhase> out;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const std::string where = "phases[" + std::to_string(i) + "]";
        const auto& p = phases[i];
        GaitPhase g;
        g.index = unsigned_int<std::uint32_t>(field(p, "phase", where), where + ".phase");
        const auto& mesh = field(p, "mesh_id", where);
        if (!mesh.is_string()) throw SchemaError(where + ".mesh_id: expected a string");
        g.mesh_id = mesh.get<std::string>();
        g.descriptor.forward_step = number(field(p, "dx", where), where + ".dx");
        g.descriptor.relative_angle = number(field(p, "theta_rel", where), where + ".theta_rel");
        out.push_back(std::move(g));
    }
    const auto& s = field(j, "sigma", "gait");
    if (!s.is_array() || s.size() != 2) throw SchemaError("sigma: expected 2 numbers");
    try {
        return GaitDatabase(std::move(out), {number(s[0], "sigma[0]"), number(s[1], "sigma[1]")});
    } catch (const GaitError& e) {
        throw SchemaError(std::string("gait: ") + e.what());
    }
}

inline nlohmann::json gait_database_to_json(const GaitDatabase& db) {
    nlohmann::json phases = nlohmann::json::array();
    for (const auto& p : db.phases())
        phases.push_back({{"phase", p.index},
                          {"mesh_id", p.mesh_id},
                          {"dx", p.descriptor.forward_step},
                          {"theta_rel", p.descriptor.relative_angle}});
    return {{"phases", std::move(phases)}, {"sigma", {db.sigma()[0], db.sigma()[1]}}};
}

inline GaitDatabase load_gait_database(const std::filesystem::path& path) {
    return gait_database_from_json(detail::read_json_file(path));
}

// {window: [{position: [x,y,z], angle}], heading?: [x,y,z]}
inline GaitObservation observation_from_json(const nlohmann::json& j, const std::string& where) {
    using namespace detail;
    const auto& window = field(j, "window", where);
    if (!window.is_array()) throw SchemaError(where + ".window: expected an array");
    GaitObservation obs;
    for (std::size_t i = 0; i < window.size(); ++i) {
        const std::string w = where + ".window[" + std::to_string(i) + "]";
        obs.window.push_back(
            {vec3(field(window[i], "position", w), w + ".position"), number(field(window[i], "angle", w), w + ".angle")});
    }
    if (j.contains("heading")) obs.heading = vec3(j["heading"], where + ".heading");
    try {
        obs.validate();
    } catch (const GaitError& e) {
        throw SchemaError(where + ": " + e.what());
    }
    return obs;
}

}  // namespace occkit
