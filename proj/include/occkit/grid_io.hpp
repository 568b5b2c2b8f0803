#pragma once

#include "occkit/binary.hpp"
#include "occkit/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

namespace occkit {

// POCC panoptic grid file.
//
//   0  magic "POCC"
//   4  version        u32
//   8  dims X, Y, Z   3 x u32
//  20  voxel_size     f32
//  24  origin         3 x f64
//  48  encoding       u8 (0 dense, 1 sparse)
//  49  zero padding up to 64
//
// Dense payload: X*Y*Z records of (semantic u16, instance u16) in linear
// order. Sparse payload: count u64, then (index u32, semantic u16,
// instance u16) for every non-free voxel with strictly increasing index.
// Everything little-endian.
enum class GridEncoding : std::uint8_t { kDense = 0, kSparse = 1 };

inline constexpr std::uint32_t kGridFileVersion = 1;
inline constexpr std::size_t kGridHeaderSize = 64;

inline std::vector<std::uint8_t> write_grid(const PanopticGrid& grid, GridEncoding encoding = GridEncoding::kDense) {
    const GridSpec& spec = grid.spec();
    ByteWriter w;
    w.raw("POCC", 4);
    w.le<std::uint32_t>(kGridFileVersion);
    for (auto d : spec.dims) w.le<std::uint32_t>(d);
    w.le<float>(static_cast<float>(spec.voxel_size));
    for (int a = 0; a < 3; ++a) w.le<double>(spec.origin[a]);
    w.le<std::uint8_t>(static_cast<std::uint8_t>(encoding));
    w.pad_to(kGridHeaderSize);
    if (encoding == GridEncoding::kDense) {
        for (const auto& l : grid.labels()) {
            w.le<std::uint16_t>(l.semantic);
            w.le<std::uint16_t>(l.instance);
        }
    } else {
        if (grid.size() > std::numeric_limits<std::uint32_t>::max())
            throw FormatError(FormatErrorKind::kCorrupt, "grid too large for sparse u32 indices");
        std::uint64_t count = 0;
        for (const auto& l : grid.labels()) count += !l.free();
        w.le<std::uint64_t>(count);
        for (LinearIndex i = 0; i < grid.size(); ++i) {
            const auto& l = grid[i];
            if (l.free()) continue;
            w.le<std::uint32_t>(static_cast<std::uint32_t>(i));
            w.le<std::uint16_t>(l.semantic);
            w.le<std::uint16_t>(l.instance);
        }
    }
    return w.take();
}

inline PanopticGrid read_grid(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const auto magic = r.take(4, "grid magic");
    if (std::memcmp(magic.data(), "POCC", 4) != 0) throw FormatError(FormatErrorKind::kBadMagic, "not a POCC grid file");
    const auto version = r.le<std::uint32_t>("grid version");
    if (version != kGridFileVersion)
        throw FormatError(FormatErrorKind::kUnsupportedVersion, "grid version " + std::to_string(version));
    r.require(kGridHeaderSize - r.position(), "grid header");
    GridSpec spec;
    for (auto& d : spec.dims) d = r.le<std::uint32_t>("grid dims");
    spec.voxel_size = r.le<float>("voxel size");
    for (int a = 0; a < 3; ++a) spec.origin[a] = r.le<double>("grid origin");
    const auto encoding = r.le<std::uint8_t>("grid encoding");
    r.seek(kGridHeaderSize, "grid header");
    try {
        spec.validate();
    } catch (const GridError& e) {
        throw FormatError(FormatErrorKind::kCorrupt, e.what());
    }

    const std::size_t n = spec.voxel_count();
    std::vector<PanopticLabel> labels(n);
    if (encoding == static_cast<std::uint8_t>(GridEncoding::kDense)) {
        if (r.remaining() / 4 < n) throw FormatError(FormatErrorKind::kTruncated, "dense payload");
        for (auto& l : labels) {
            l.semantic = r.le<std::uint16_t>("dense payload");
            l.instance = r.le<std::uint16_t>("dense payload");
        }
    } else if (encoding == static_cast<std::uint8_t>(GridEncoding::kSparse)) {
        const auto count = r.le<std::uint64_t>("sparse count");
        if (count > n) throw FormatError(FormatErrorKind::kCorrupt, "sparse count exceeds voxel count");
        if (r.remaining() / 8 < count) throw FormatError(FormatErrorKind::kTruncated, "sparse payload");
        std::int64_t previous = -1;
        for (std::uint64_t k = 0; k < count; ++k) {
            const auto index = r.le<std::uint32_t>("sparse record");
            PanopticLabel l{r.le<std::uint16_t>("sparse record"), r.le<std::uint16_t>("sparse record")};
            if (std::int64_t(index) <= previous || index >= n)
                throw FormatError(FormatErrorKind::kCorrupt, "sparse indices must increase and stay in range");
            if (l.free()) throw FormatError(FormatErrorKind::kCorrupt, "sparse record for free voxel");
            previous = index;
            labels[index] = l;
        }
    } else {
        throw FormatError(FormatErrorKind::kCorrupt, "unknown grid encoding " + std::to_string(encoding));
    }
    if (r.remaining() != 0) throw FormatError(FormatErrorKind::kCorrupt, "trailing bytes after grid payload");
    for (const auto& l : labels)
        if (!l.valid()) throw FormatError(FormatErrorKind::kCorrupt, "free voxel with an instance id");
    return PanopticGrid(spec, std::move(labels));
}

inline PanopticGrid load_grid(const std::filesystem::path& path) { return read_grid(read_file_bytes(path)); }

inline void save_grid(const std::filesystem::path& path, const PanopticGrid& grid,
                      GridEncoding encoding = GridEncoding::kDense) {
    write_file_bytes(path, write_grid(grid, encoding));
}

}  // namespace occkit
