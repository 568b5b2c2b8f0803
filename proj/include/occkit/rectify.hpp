#pragma once

#include "occkit/binary.hpp"
#include "occkit/bvh.hpp"
#include "occkit/geometry.hpp"
#include "occkit/grid.hpp"
#include "occkit/parallel.hpp"
#include "occkit/scene.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace occkit {

class RectifyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Row-major raster of per-pixel values.
template <typename T>
struct Raster {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<T> values;

    Raster() = default;
    Raster(std::uint32_t w, std::uint32_t h, T fill) : width(w), height(h), values(std::size_t(w) * h, fill) {}

    T& at(std::uint32_t u, std::uint32_t v) { return values[std::size_t(v) * width + u]; }
    const T& at(std::uint32_t u, std::uint32_t v) const { return values[std::size_t(v) * width + u]; }
    std::size_t size() const { return values.size(); }
    bool same_shape(std::uint32_t w, std::uint32_t h) const { return width == w && height == h; }

    template <typename U>
    bool same_shape(const Raster<U>& o) const {
        return width == o.width && height == o.height;
    }

    bool operator==(const Raster&) const = default;
};

// z-depth in metres; kDepthMiss marks pixels with no surface.
using DepthMap = Raster<float>;
using SemanticMap = Raster<std::uint16_t>;
using PixelMask = Raster<std::uint8_t>;

inline constexpr float kDepthMiss = std::numeric_limits<float>::max();
inline constexpr std::uint16_t kEmptySemantic = std::numeric_limits<std::uint16_t>::max();

struct RectifyConfig {
    double epsilon = 0.1;  // metres

    void validate() const {
        if (!(epsilon > 0.0)) throw RectifyError("epsilon must be positive");
    }
};

// Triangles of transparent or semantically inconsistent placements, in
// world space, with the label of each triangle's source placement.
struct RectificationMesh {
    Bvh bvh;
    std::vector<PanopticLabel> triangle_labels;
};

inline RectificationMesh build_rectification_mesh(const SceneManifest& scene, const MeshLibrary& lib) {
    std::vector<Triangle> soup;
    std::vector<PanopticLabel> labels;
    for (const auto& p : scene.objects) {
        if (!p.transparent && !p.semantic_inconsistent) continue;
        const TriangleMesh world = transform_mesh(lib.at(p.mesh_id).mesh, p.transform);
        for (std::size_t i = 0; i < world.triangle_count(); ++i) {
            soup.push_back(world.triangle(i));
            labels.push_back(p.label);
        }
    }
    return {Bvh(std::move(soup)), std::move(labels)};
}

struct RaycastResult {
    DepthMap depth;
    SemanticMap semantic;
};

// One ray per pixel centre. Depth is the hit distance projected on the
// camera's forward axis.
inline RaycastResult raycast_depth(const PinholeCamera& cam, const RectificationMesh& mesh, unsigned threads = 1) {
    cam.validate();
    RaycastResult out{DepthMap(cam.width, cam.height, kDepthMiss), SemanticMap(cam.width, cam.height, kEmptySemantic)};
    const Vec3 forward = cam.forward();
    parallel_chunks(0, cam.height, resolve_threads(threads), [&](std::size_t v0, std::size_t v1) {
        for (std::size_t v = v0; v < v1; ++v) {
            for (std::uint32_t u = 0; u < cam.width; ++u) {
                const Ray ray = pixel_ray(cam, u, double(v));
                const auto hit = mesh.bvh.cast_ray(ray);
                if (!hit) continue;
                out.depth.at(u, std::uint32_t(v)) = static_cast<float>(hit->t * ray.direction.dot(forward));
                out.semantic.at(u, std::uint32_t(v)) = mesh.triangle_labels[hit->triangle].semantic;
            }
        }
    });
    return out;
}

inline DepthMap fuse_depth(const DepthMap& raw, const DepthMap& cast) {
    if (!raw.same_shape(cast)) throw RectifyError("depth maps differ in size");
    DepthMap out = raw;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = std::min(raw.values[i], cast.values[i]);
    return out;
}

// Pixels where the raw depth lies at least epsilon behind the fused depth.
inline PixelMask transparency_region(const DepthMap& raw, const DepthMap& fused, const RectifyConfig& cfg) {
    cfg.validate();
    if (!raw.same_shape(fused)) throw RectifyError("depth maps differ in size");
    PixelMask mask(raw.width, raw.height, 0);
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask.values[i] = double(raw.values[i]) - double(fused.values[i]) >= cfg.epsilon;
    return mask;
}

inline PixelMask omission_region(const SemanticMap& raw) {
    PixelMask mask(raw.width, raw.height, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) mask.values[i] = raw.values[i] == kEmptySemantic;
    return mask;
}

inline PixelMask mask_union(const PixelMask& a, const PixelMask& b) {
    if (!a.same_shape(b)) throw RectifyError("masks differ in size");
    PixelMask out(a.width, a.height, 0);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = a.values[i] || b.values[i];
    return out;
}

inline SemanticMap rectify_semantics(const SemanticMap& raw, const SemanticMap& cast, const PixelMask& error_region) {
    if (!raw.same_shape(cast) || !raw.same_shape(error_region))
        throw RectifyError("semantic maps and mask differ in size");
    SemanticMap out = raw;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (error_region.values[i]) out.values[i] = cast.values[i];
    return out;
}

struct RectifiedFrame {
    DepthMap depth;
    SemanticMap semantic;
    DepthMap cast_depth;
    SemanticMap cast_semantic;
    PixelMask transparency;
    PixelMask omission;
};

inline RectifiedFrame rectify_frame(const DepthMap& raw_depth, const SemanticMap& raw_semantic,
                                    const PinholeCamera& cam, const RectificationMesh& mesh,
                                    const RectifyConfig& cfg = {}, unsigned threads = 1) {
    if (!raw_depth.same_shape(cam.width, cam.height) || !raw_semantic.same_shape(cam.width, cam.height))
        throw RectifyError("raw rasters do not match the camera resolution");
    RectifiedFrame f;
    auto cast = raycast_depth(cam, mesh, threads);
    f.cast_depth = std::move(cast.depth);
    f.cast_semantic = std::move(cast.semantic);
    f.depth = fuse_depth(raw_depth, f.cast_depth);
    f.transparency = transparency_region(raw_depth, f.depth, cfg);
    f.omission = omission_region(raw_semantic);
    f.semantic = rectify_semantics(raw_semantic, f.cast_semantic, mask_union(f.transparency, f.omission));
    return f;
}

// OCCR raster file: magic "OCCR", format u32 (1 float32 depth, 2 u16
// semantic), width u32, height u32, then the row-major payload. All
// little-endian.
enum class RasterFormat : std::uint32_t { kDepth = 1, kSemantic = 2 };

namespace detail {

template <typename T>
std::vector<std::uint8_t> write_raster(const Raster<T>& r, RasterFormat format) {
    ByteWriter w;
    w.raw("OCCR", 4);
    w.le<std::uint32_t>(static_cast<std::uint32_t>(format));
    w.le<std::uint32_t>(r.width);
    w.le<std::uint32_t>(r.height);
    for (const auto& v : r.values) w.le<T>(v);
    return w.take();
}

template <typename T>
Raster<T> read_raster(std::span<const std::uint8_t> bytes, RasterFormat expected) {
    ByteReader rd(bytes);
    const auto magic = rd.take(4, "raster magic");
    if (std::memcmp(magic.data(), "OCCR", 4) != 0) throw FormatError(FormatErrorKind::kBadMagic, "not an OCCR raster");
    const auto format = rd.le<std::uint32_t>("raster format");
    if (format != 1 && format != 2)
        throw FormatError(FormatErrorKind::kUnsupportedVersion, "raster format " + std::to_string(format));
    const auto width = rd.le<std::uint32_t>("raster width");
    const auto height = rd.le<std::uint32_t>("raster height");
    if (format != static_cast<std::uint32_t>(expected))
        throw FormatError(FormatErrorKind::kCorrupt, "raster holds format " + std::to_string(format) + ", expected " +
                                                         std::to_string(static_cast<std::uint32_t>(expected)));
    const std::size_t n = std::size_t(width) * height;
    if (rd.remaining() / sizeof(T) < n) throw FormatError(FormatErrorKind::kTruncated, "raster payload");
    Raster<T> r;
    r.width = width;
    r.height = height;
    r.values.resize(n);
    for (auto& v : r.values) v = rd.le<T>("raster payload");
    if (rd.remaining() != 0) throw FormatError(FormatErrorKind::kCorrupt, "trailing bytes after raster payload");
    return r;
}

}  // namespace detail

inline std::vector<std::uint8_t> write_depth_raster(const DepthMap& d) {
    return detail::write_raster(d, RasterFormat::kDepth);
}
inline std::vector<std::uint8_t> write_semantic_raster(const SemanticMap& s) {
    return detail::write_raster(s, RasterFormat::kSemantic);
}
inline DepthMap read_depth_raster(std::span<const std::uint8_t> bytes) {
    return detail::read_raster<float>(bytes, RasterFormat::kDepth);
}
inline SemanticMap read_semantic_raster(std::span<const std::uint8_t> bytes) {
    return detail::read_raster<std::uint16_t>(bytes, RasterFormat::kSemantic);
}

// Debug raster of the error regions as a format-2 raster: bit 0 marks the
// transparency region, bit 1 the omission region.
inline SemanticMap encode_error_mask(const PixelMask& transparency, const PixelMask& omission) {
    if (!transparency.same_shape(omission)) throw RectifyError("masks differ in size");
    SemanticMap out(transparency.width, transparency.height, 0);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = std::uint16_t((transparency.values[i] ? 1 : 0) | (omission.values[i] ? 2 : 0));
    return out;
}

}  // namespace occkit
