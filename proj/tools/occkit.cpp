#include "occkit/occkit.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace occkit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad flag values detected after parsing; reported with exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void emit(const json& j, bool as_json, const std::string& human) {
    if (as_json)
        std::cout << j.dump(2) << '\n';
    else
        std::cout << human;
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

std::string class_name(SemanticId c) {
    const auto& tax = SemanticTaxonomy::default_taxonomy();
    if (c >= 1 && c <= tax.size()) return tax.at(c).name;
    return "class_" + std::to_string(c);
}

std::vector<SemanticId> parse_id_list(const std::string& text, const std::string& flag) {
    std::vector<SemanticId> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        if (auto id = SemanticTaxonomy::default_taxonomy().find(tok)) {
            out.push_back(*id);
            continue;
        }
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(tok, &used);
            if (used != tok.size() || v == 0 || v > 0xFFFE) throw std::invalid_argument(tok);
            out.push_back(SemanticId(v));
        } catch (const std::exception&) {
            throw UsageError(flag + ": '" + tok + "' is neither a class id nor a class name");
        }
    }
    return out;
}

RigidTransform frame_pose(const std::string& poses_path, int frame) {
    if (poses_path.empty()) return RigidTransform::identity();
    const auto poses = load_poses(poses_path);
    if (frame < 0 || std::size_t(frame) >= poses.size())
        throw UsageError("--frame " + std::to_string(frame) + " outside the " + std::to_string(poses.size()) +
                         " poses in " + poses_path);
    return poses[std::size_t(frame)];
}

// Gait database with template meshes resolved relative to the database file.
struct LoadedGait {
    GaitDatabase database;
    MeshLibrary library;
};

LoadedGait load_gait(const fs::path& path) {
    LoadedGait out{load_gait_database(path), {}};
    for (const auto& p : out.database.phases()) {
        if (out.library.contains(p.mesh_id)) continue;
        out.library.add(p.mesh_id, load_mesh(path.parent_path() / fs::u8path(p.mesh_id)).mesh, 11);
    }
    return out;
}

// ---------------------------------------------------------------- voxelize

struct VoxelizeArgs {
    std::string manifest, out, poses, region, solid_fill = "auto", priorities, encoding = "dense";
    std::string pedestrians, gait_db;
    int frame = 0;
    double voxel_size = 0.2;
    bool lidar_region = false;
    unsigned threads = 0;
    bool as_json = false;
};

OccupancyRegion parse_region(const VoxelizeArgs& a) {
    if (a.region.empty()) return OccupancyRegion::lidar_default();
    std::vector<double> v;
    std::stringstream ss(a.region);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw UsageError("--region: '" + tok + "' is not a number");
        }
    }
    if (v.size() != 6) throw UsageError("--region expects forward,backward,left,right,up,down");
    OccupancyRegion r{v[0], v[1], v[2], v[3], v[4], v[5]};
    try {
        r.validate();
    } catch (const GridError& e) {
        throw UsageError(std::string("--region: ") + e.what());
    }
    return r;
}

FillPolicy parse_fill(const std::string& mode) {
    FillPolicy p;
    if (mode == "auto") return p;
    if (mode == "off") return FillPolicy::none();
    if (mode == "stuff") {
        p.closed_things = false;
        return p;
    }
    if (mode == "things") {
        p.stuff = false;
        return p;
    }
    throw UsageError("--solid-fill must be auto, off, stuff or things");
}

PriorityTable load_priorities(const std::string& path) {
    PriorityTable table = SemanticTaxonomy::default_taxonomy().priorities();
    if (path.empty()) return table;
    const json j = detail::read_json_file(path);
    if (!j.is_object()) throw SchemaError(path + ": expected an object of class -> rank");
    for (const auto& [key, value] : j.items()) {
        const auto ids = parse_id_list(key, path);
        if (ids.size() != 1 || !value.is_number_integer()) throw SchemaError(path + ": bad entry '" + key + "'");
        table[ids[0]] = value.get<int>();
    }
    return table;
}

// {pedestrians: [{instance, semantic?, pose: [16], observation: {...}}]}
std::vector<PosedMesh> reconstruct_pedestrians(const std::string& path, const LoadedGait& gait,
                                               std::vector<json>& report) {
    const json j = detail::read_json_file(path);
    const auto& list = detail::field(j, "pedestrians", path);
    if (!list.is_array()) throw SchemaError(path + ": pedestrians must be an array");
    std::vector<PosedMesh> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = "pedestrians[" + std::to_string(i) + "]";
        const auto& p = list[i];
        PanopticLabel label{11, detail::unsigned_int<InstanceId>(detail::field(p, "instance", where), where + ".instance")};
        if (p.contains("semantic")) label.semantic = detail::unsigned_int<SemanticId>(p["semantic"], where + ".semantic");
        const auto pose = detail::rigid16(detail::field(p, "pose", where), where + ".pose");
        const auto obs = observation_from_json(detail::field(p, "observation", where), where + ".observation");
        auto r = reconstruct_pedestrian(gait.database, gait.library, obs, pose, label);
        report.push_back({{"instance", label.instance}, {"phase", r.match.phase}, {"likelihood", r.match.likelihood}});
        out.push_back(std::move(r.posed));
    }
    return out;
}

int run_voxelize(const VoxelizeArgs& a) {
    if (!(a.voxel_size > 0.0) || !std::isfinite(a.voxel_size)) throw UsageError("--voxel-size must be positive");
    if (a.lidar_region && !a.region.empty()) throw UsageError("--lidar-region and --region are exclusive");
    if (a.pedestrians.empty() != a.gait_db.empty()) throw UsageError("--pedestrians requires --gait-db and vice versa");
    if (a.encoding != "dense" && a.encoding != "sparse") throw UsageError("--encoding must be dense or sparse");
    const OccupancyRegion region = parse_region(a);
    VoxelizeOptions opt;
    opt.fill = parse_fill(a.solid_fill);
    opt.threads = resolve_threads(a.threads);

    const auto t0 = std::chrono::steady_clock::now();
    opt.priorities = load_priorities(a.priorities);
    const auto scene = load_scene(a.manifest);
    const RigidTransform pose = frame_pose(a.poses, a.frame);
    std::vector<PosedMesh> walkers;
    std::vector<json> walker_report;
    if (!a.pedestrians.empty()) walkers = reconstruct_pedestrians(a.pedestrians, load_gait(a.gait_db), walker_report);
    const auto t1 = std::chrono::steady_clock::now();
    const auto frame = voxelize_frame(scene.manifest, scene.library, pose, region, a.voxel_size, opt, walkers);
    const auto t2 = std::chrono::steady_clock::now();
    save_grid(a.out, frame.grid, a.encoding == "dense" ? GridEncoding::kDense : GridEncoding::kSparse);

    std::map<SemanticId, std::uint64_t> counts;
    for (const auto& l : frame.grid.labels())
        if (!l.free()) ++counts[l.semantic];
    json classes = json::object();
    std::string human;
    const auto& dims = frame.anchored.spec.dims;
    human += "wrote " + a.out + " (" + std::to_string(dims[0]) + "x" + std::to_string(dims[1]) + "x" +
             std::to_string(dims[2]) + ", " + std::to_string(frame.triangles) + " triangles)\n";
    for (const auto& [c, n] : counts) {
        classes[class_name(c)] = {{"id", c}, {"voxels", n}};
        human += "  " + class_name(c) + ": " + std::to_string(n) + "\n";
    }
    const double load_s = std::chrono::duration<double>(t1 - t0).count();
    const double vox_s = std::chrono::duration<double>(t2 - t1).count();
    human += "  time: load " + fmt(load_s, 3) + " s, voxelize " + fmt(vox_s, 3) + " s\n";
    emit({{"output", a.out},
          {"dims", dims},
          {"voxel_size", a.voxel_size},
          {"triangles", frame.triangles},
          {"classes", classes},
          {"pedestrians", walker_report},
          {"timing_s", {{"load", load_s}, {"voxelize", vox_s}}}},
         a.as_json, human);
    return 0;
}

// ------------------------------------------------------------------- score

struct ScoreArgs {
    std::string dataset, dynamic_classes = "default", aggregate = "dataset", out, csv;
    bool as_json = false;
};

int run_score(const ScoreArgs& a) {
    if (a.aggregate != "dataset" && a.aggregate != "per-frame")
        throw UsageError("--aggregate must be dataset or per-frame");
    QualityConfig cfg;
    if (a.dynamic_classes == "default") {
        cfg.dynamic_classes = SemanticTaxonomy::default_taxonomy().dynamic_classes();
    } else if (a.dynamic_classes != "none") {
        for (auto c : parse_id_list(a.dynamic_classes, "--dynamic-classes")) cfg.dynamic_classes.insert(c);
    }
    cfg.aggregate = a.aggregate == "dataset" ? QualityConfig::Aggregate::kDataset : QualityConfig::Aggregate::kPerFrame;

    const fs::path dir = fs::u8path(a.dataset);
    if (!fs::is_directory(dir)) throw std::runtime_error(a.dataset + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pocc") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error(a.dataset + ": no .pocc grid files");
    std::vector<PanopticGrid> grids;
    for (const auto& f : files) grids.push_back(load_grid(f));

    std::vector<RigidTransform> poses;
    if (fs::exists(dir / "poses.txt")) {
        poses = load_poses(dir / "poses.txt");
        if (poses.size() != grids.size())
            throw SchemaError("poses.txt holds " + std::to_string(poses.size()) + " poses for " +
                              std::to_string(grids.size()) + " grids");
    } else if (grids.size() > 1) {
        throw SchemaError(a.dataset + ": temporal consistency needs poses.txt for " + std::to_string(grids.size()) +
                          " frames");
    }

    json per_frame = json::array();
    std::vector<FramePair> pairs;
    for (std::size_t i = 0; i + 1 < grids.size(); ++i)
        pairs.push_back({grids[i], grids[i + 1], gravity_aligned_frame(poses[i]), gravity_aligned_frame(poses[i + 1])});
    for (std::size_t i = 0; i < grids.size(); ++i) {
        const auto c = continuity_counts(grids[i]);
        json f{{"file", files[i].filename().string()}, {"s_sc", c.score()}, {"occupied", c.occupied},
               {"isolated", c.isolated}};
        if (i < pairs.size()) {
            const auto t = temporal_counts(pairs[i], cfg);
            f["s_tc"] = t.score();
            f["matched"] = t.matched;
            f["valid"] = t.valid;
        }
        per_frame.push_back(std::move(f));
    }
    json result{{"frames", grids.size()}, {"s_sc", spatial_continuity(grids)}, {"per_frame", per_frame}};
    std::string human = "frames: " + std::to_string(grids.size()) + "\ns_sc: " + fmt(result["s_sc"].get<double>()) + "\n";
    if (!pairs.empty()) {
        result["s_tc"] = temporal_consistency(pairs, cfg);
        human += "s_tc: " + fmt(result["s_tc"].get<double>()) + "\n";
    }
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw std::runtime_error(a.out + ": cannot write");
        out << result.dump(2) << '\n';
    }
    if (!a.csv.empty()) {
        std::ofstream out(a.csv);
        if (!out) throw std::runtime_error(a.csv + ": cannot write");
        out.precision(17);
        out << "file,s_sc,s_tc\n";
        for (const auto& f : per_frame) {
            out << f["file"].get<std::string>() << ',' << f["s_sc"].get<double>() << ',';
            if (f.contains("s_tc")) out << f["s_tc"].get<double>();
            out << '\n';
        }
    }
    emit(result, a.as_json, human);
    return 0;
}

// -------------------------------------------------------------------- eval

int run_eval(const std::string& pred_path, const std::string& gt_path, bool as_json) {
    const auto r = panoptic_quality(load_grid(pred_path), load_grid(gt_path));
    json classes = json::object();
    std::string human = "iou " + fmt(r.iou) + "  miou " + fmt(r.miou) + "\npq " + fmt(r.pq) + "  sq " + fmt(r.sq) +
                        "  rq " + fmt(r.rq) + "\n";
    for (const auto& [c, s] : r.classes) {
        json e{{"id", c}, {"pq", s.pq}, {"sq", s.sq}, {"rq", s.rq}, {"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn}};
        if (auto it = r.class_iou.find(c); it != r.class_iou.end()) e["iou"] = it->second;
        classes[class_name(c)] = std::move(e);
        human += "  " + class_name(c) + ": pq " + fmt(s.pq) + " (tp " + std::to_string(s.tp) + ", fp " +
                 std::to_string(s.fp) + ", fn " + std::to_string(s.fn) + ")\n";
    }
    emit({{"iou", r.iou}, {"miou", r.miou}, {"pq", r.pq}, {"sq", r.sq}, {"rq", r.rq}, {"classes", classes}}, as_json,
         human);
    return 0;
}

// ----------------------------------------------------------------- rectify

struct RectifyArgs {
    std::string depth, semantic, manifest, calib, poses, out_dir;
    int frame = 0;
    double epsilon = 0.1;
    unsigned threads = 0;
    bool as_json = false;
};

int run_rectify(const RectifyArgs& a) {
    RectifyConfig cfg;
    cfg.epsilon = a.epsilon;
    if (!(a.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
    const auto raw_depth = read_depth_raster(read_file_bytes(a.depth));
    const auto raw_sem = read_semantic_raster(read_file_bytes(a.semantic));
    const auto scene = load_scene(a.manifest);
    PinholeCamera cam = load_calibration(a.calib);
    cam.cam_to_world = frame_pose(a.poses, a.frame) * cam.cam_to_world;
    const auto mesh = build_rectification_mesh(scene.manifest, scene.library);
    const auto f = rectify_frame(raw_depth, raw_sem, cam, mesh, cfg, resolve_threads(a.threads));

    const fs::path out = fs::u8path(a.out_dir);
    fs::create_directories(out);
    write_file_bytes(out / "depth.occr", write_depth_raster(f.depth));
    write_file_bytes(out / "semantic.occr", write_semantic_raster(f.semantic));
    write_file_bytes(out / "mask.occr", write_semantic_raster(encode_error_mask(f.transparency, f.omission)));
    auto count = [](const PixelMask& m) { return std::size_t(std::count(m.values.begin(), m.values.end(), 1)); };
    std::size_t changed = 0;
    for (std::size_t i = 0; i < raw_sem.size(); ++i) changed += raw_sem.values[i] != f.semantic.values[i];
    const json result{{"output_dir", a.out_dir},
                      {"pixels", raw_sem.size()},
                      {"rectification_triangles", mesh.triangle_labels.size()},
                      {"transparency_pixels", count(f.transparency)},
                      {"omission_pixels", count(f.omission)},
                      {"semantic_changed", changed}};
    emit(result, a.as_json,
         "wrote depth.occr, semantic.occr, mask.occr to " + a.out_dir + "\n  transparency pixels: " +
             std::to_string(count(f.transparency)) + "\n  omission pixels: " + std::to_string(count(f.omission)) +
             "\n  semantic pixels changed: " + std::to_string(changed) + "\n");
    return 0;
}

// -------------------------------------------------------------------- gait

int run_gait(const std::string& db_path, const std::string& obs_path, bool as_json) {
    const auto db = load_gait_database(db_path);
    const json j = detail::read_json_file(obs_path);
    std::vector<GaitObservation> observations;
    if (j.contains("observations")) {
        const auto& list = j["observations"];
        if (!list.is_array()) throw SchemaError(obs_path + ": observations must be an array");
        for (std::size_t i = 0; i < list.size(); ++i)
            observations.push_back(observation_from_json(list[i], "observations[" + std::to_string(i) + "]"));
    } else {
        observations.push_back(observation_from_json(j, "observation"));
    }
    json results = json::array();
    std::string human;
    for (const auto& obs : observations) {
        const auto d = observation_descriptor(obs);
        const auto m = match_phase(db, d);
        results.push_back({{"phase", m.phase},
                           {"mesh_id", db.phases()[m.phase].mesh_id},
                           {"likelihood", m.likelihood},
                           {"mahalanobis2", m.mahalanobis2},
                           {"descriptor", {d.forward_step, d.relative_angle}}});
        human += "phase " + std::to_string(m.phase) + " (" + db.phases()[m.phase].mesh_id + "), likelihood " +
                 fmt(m.likelihood) + "\n";
    }
    emit({{"matches", results}}, as_json, human);
    return 0;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
    std::uint64_t seed = 0;
    std::string out;
    int frames = 3;
    double step = 1.0;
    std::uint32_t gait_phases = 8;
    bool as_json = false;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot write");
    out << text;
}

void write_mesh_file(const fs::path& path, const TriangleMesh& mesh) {
    fs::create_directories(path.parent_path());
    std::ostringstream s;
    write_obj(s, mesh);
    write_text(path, s.str());
}

// Forward-facing camera on the LiDAR mount: camera z along ego x, camera x
// along ego -y, camera y along ego -z.
PinholeCamera synth_camera() {
    PinholeCamera cam;
    cam.width = 256;
    cam.height = 128;
    cam.fx = cam.fy = 128.0;
    cam.cx = 128.0;
    cam.cy = 64.0;
    Mat4 m = Mat4::Identity();
    m.block<3, 3>(0, 0) << 0, 0, 1, -1, 0, 0, 0, -1, 0;
    cam.cam_to_world = RigidTransform::from_matrix(m);
    return cam;
}

int run_synth(const SynthArgs& a) {
    if (a.frames < 1) throw UsageError("--frames must be at least 1");
    if (a.gait_phases < 2) throw UsageError("--gait-phases must be at least 2");
    const fs::path out = fs::u8path(a.out);
    fs::create_directories(out);
    const auto s = generate_synthetic_scene(a.seed);
    save_manifest(out / "manifest.json", s.manifest);
    for (const auto& [id, entry] : s.library.entries()) write_mesh_file(out / fs::u8path(id), entry.mesh);

    std::vector<RigidTransform> poses;
    for (int i = 0; i < a.frames; ++i) poses.push_back(RigidTransform::translate({a.step * i, 0, 0}) * s.lidar_pose);
    std::ostringstream ps;
    write_poses(ps, poses);
    write_text(out / "poses.txt", ps.str());

    const PinholeCamera cam = synth_camera();
    write_text(out / "calib.json", calibration_to_json(cam).dump(2) + "\n");

    // Raw camera frame 0 as a sensor that sees through transparent surfaces.
    SceneManifest opaque;
    for (auto p : s.manifest.objects) {
        if (p.transparent) continue;
        p.semantic_inconsistent = true;
        opaque.objects.push_back(p);
    }
    PinholeCamera world_cam = cam;
    world_cam.cam_to_world = poses[0] * cam.cam_to_world;
    const auto raw = raycast_depth(world_cam, build_rectification_mesh(opaque, s.library));
    write_file_bytes(out / "raw_depth.occr", write_depth_raster(raw.depth));
    write_file_bytes(out / "raw_semantic.occr", write_semantic_raster(raw.semantic));

    const auto gait = synthetic_gait_database(a.gait_phases);
    write_text(out / "gait_db.json", gait_database_to_json(gait.database).dump(2) + "\n");
    for (const auto& [id, entry] : gait.library.entries()) write_mesh_file(out / fs::u8path(id), entry.mesh);

    // One walker on the right sidewalk replaying phase 2's descriptor.
    InstanceId next = 1;
    for (const auto& p : s.manifest.objects) next = std::max<InstanceId>(next, p.label.instance + 1);
    const auto& target = gait.database.phases()[std::min<std::uint32_t>(2, a.gait_phases - 1)].descriptor;
    json window = json::array();
    for (int i = 0; i < 5; ++i)
        window.push_back({{"position", {8.0 + target.forward_step * i, -4.5, 0.15}}, {"angle", target.relative_angle}});
    const json observation{{"window", window}, {"heading", {1.0, 0.0, 0.0}}};
    const json walkers{{"pedestrians",
                        {{{"instance", next},
                          {"pose", detail::matrix_json(RigidTransform::translate({8.0 + target.forward_step * 2, -4.5, 0.15}))},
                          {"observation", observation}}}}};
    write_text(out / "pedestrians.json", walkers.dump(2) + "\n");
    write_text(out / "observation.json", observation.dump(2) + "\n");

    const json result{{"output_dir", a.out},
                      {"seed", a.seed},
                      {"objects", s.manifest.objects.size()},
                      {"meshes", s.library.size()},
                      {"frames", a.frames}};
    emit(result, a.as_json,
         "wrote synthetic scene (seed " + std::to_string(a.seed) + ", " + std::to_string(s.manifest.objects.size()) +
             " objects, " + std::to_string(a.frames) + " frames) to " + a.out + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occkit: panoptic occupancy generation, scoring and rectification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "occkit 1.0.0");

    VoxelizeArgs vox;
    auto* v = app.add_subcommand("voxelize", "Voxelize a scene manifest into a panoptic grid around a LiDAR pose");
    v->add_option("manifest", vox.manifest, "Scene manifest JSON")->required()->check(CLI::ExistingFile);
    v->add_option("-o,--out", vox.out, "Output grid file")->required();
    v->add_option("--pose", vox.poses, "Pose file (LiDAR-to-world, one 4x4 per line)")->check(CLI::ExistingFile);
    v->add_option("--frame", vox.frame, "Frame index into the pose file")->capture_default_str();
    v->add_flag("--lidar-region", vox.lidar_region, "Use the default LiDAR region (51.2/25.6/25.6/25.6, 13 m tall)");
    v->add_option("--region", vox.region, "Region extents: forward,backward,left,right,up,down (m)");
    v->add_option("--voxel-size", vox.voxel_size, "Voxel edge length (m)")->capture_default_str();
    v->add_option("--solid-fill", vox.solid_fill, "Interior filling: auto, off, stuff or things")->capture_default_str();
    v->add_option("--priorities", vox.priorities, "JSON object of class -> priority rank")->check(CLI::ExistingFile);
    v->add_option("--encoding", vox.encoding, "Grid payload: dense or sparse")->capture_default_str();
    v->add_option("--pedestrians", vox.pedestrians, "Pedestrian observations JSON")->check(CLI::ExistingFile);
    v->add_option("--gait-db", vox.gait_db, "Gait database JSON")->check(CLI::ExistingFile);
    v->add_option("--threads", vox.threads, "Worker threads (0: OCCKIT_THREADS or hardware)");
    v->add_flag("--json", vox.as_json, "Machine-readable output");

    ScoreArgs score;
    auto* sc = app.add_subcommand("score", "Spatial continuity and temporal consistency of a grid dataset");
    sc->add_option("dataset", score.dataset, "Directory of .pocc grids plus poses.txt")->required();
    sc->add_option("--dynamic-classes", score.dynamic_classes,
                   "Comma-separated classes excluded from temporal scoring, 'default' or 'none'")
        ->capture_default_str();
    sc->add_option("--aggregate", score.aggregate, "dataset (pooled counts) or per-frame (mean)")->capture_default_str();
    sc->add_option("--out", score.out, "Also write the JSON result here");
    sc->add_option("--csv", score.csv, "Per-frame CSV output");
    sc->add_flag("--json", score.as_json, "Machine-readable output");

    std::string pred, gt;
    bool eval_json = false;
    auto* ev = app.add_subcommand("eval", "IoU, mIoU and panoptic quality of a prediction against ground truth");
    ev->add_option("pred", pred, "Predicted grid")->required()->check(CLI::ExistingFile);
    ev->add_option("gt", gt, "Ground-truth grid")->required()->check(CLI::ExistingFile);
    ev->add_flag("--json", eval_json, "Machine-readable output");

    RectifyArgs rect;
    auto* rc = app.add_subcommand("rectify", "Repair raw depth and semantic rasters with instance geometry");
    rc->add_option("--depth", rect.depth, "Raw depth raster")->required()->check(CLI::ExistingFile);
    rc->add_option("--semantic", rect.semantic, "Raw semantic raster")->required()->check(CLI::ExistingFile);
    rc->add_option("--manifest", rect.manifest, "Scene manifest JSON")->required()->check(CLI::ExistingFile);
    rc->add_option("--calib", rect.calib, "Camera calibration JSON")->required()->check(CLI::ExistingFile);
    rc->add_option("--pose", rect.poses, "Ego pose file")->check(CLI::ExistingFile);
    rc->add_option("--frame", rect.frame, "Frame index into the pose file")->capture_default_str();
    rc->add_option("--epsilon", rect.epsilon, "Depth discrepancy threshold (m)")->capture_default_str();
    rc->add_option("-o,--out-dir", rect.out_dir, "Output directory")->required();
    rc->add_option("--threads", rect.threads, "Worker threads (0: OCCKIT_THREADS or hardware)");
    rc->add_flag("--json", rect.as_json, "Machine-readable output");

    std::string db_path, obs_path;
    bool gait_json = false;
    auto* ga = app.add_subcommand("gait", "Match observed pedestrian motion to a gait phase");
    ga->add_option("--db", db_path, "Gait database JSON")->required()->check(CLI::ExistingFile);
    ga->add_option("--observations", obs_path, "Observation JSON")->required()->check(CLI::ExistingFile);
    ga->add_flag("--json", gait_json, "Machine-readable output");

    SynthArgs syn;
    auto* sy = app.add_subcommand("synth", "Write a seeded synthetic street scene");
    sy->add_option("--seed", syn.seed, "Random seed")->capture_default_str();
    sy->add_option("-o,--out", syn.out, "Output directory")->required();
    sy->add_option("--frames", syn.frames, "Number of poses")->capture_default_str();
    sy->add_option("--step", syn.step, "Forward motion per frame (m)")->capture_default_str();
    sy->add_option("--gait-phases", syn.gait_phases, "Phases in the gait database")->capture_default_str();
    sy->add_flag("--json", syn.as_json, "Machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*v) return run_voxelize(vox);
        if (*sc) return run_score(score);
        if (*ev) return run_eval(pred, gt, eval_json);
        if (*rc) return run_rectify(rect);
        if (*ga) return run_gait(db_path, obs_path, gait_json);
        if (*sy) return run_synth(syn);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
