#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace occkit {

enum class FormatErrorKind { kBadMagic, kUnsupportedVersion, kTruncated, kCorrupt, kIo };

inline const char* to_string(FormatErrorKind k) {
    switch (k) {
        case FormatErrorKind::kBadMagic: return "bad magic";
        case FormatErrorKind::kUnsupportedVersion: return "unsupported version";
        case FormatErrorKind::kTruncated: return "truncated";
        case FormatErrorKind::kCorrupt: return "corrupt";
        case FormatErrorKind::kIo: return "io";
    }
    return "unknown";
}

class FormatError : public std::runtime_error {
public:
    FormatError(FormatErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    FormatErrorKind kind() const { return kind_; }

private:
    FormatErrorKind kind_;
};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

class ByteWriter {
public:
    void raw(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        bytes_.insert(bytes_.end(), p, p + n);
    }

    template <typename T>
    void le(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        std::uint8_t buf[sizeof(T)];
        std::memcpy(buf, &value, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
        raw(buf, sizeof(T));
    }

    void pad_to(std::size_t size) {
        if (bytes_.size() < size) bytes_.resize(size, 0);
    }

    std::size_t size() const { return bytes_.size(); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::size_t position() const { return pos_; }

    void require(std::size_t n, const char* what) const {
        if (remaining() < n) throw FormatError(FormatErrorKind::kTruncated, what);
    }

    std::span<const std::uint8_t> take(std::size_t n, const char* what) {
        require(n, what);
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    template <typename T>
    T le(const char* what) {
        auto src = take(sizeof(T), what);
        std::uint8_t buf[sizeof(T)];
        std::memcpy(buf, src.data(), sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
        T value;
        std::memcpy(&value, buf, sizeof(T));
        return value;
    }

    void seek(std::size_t pos, const char* what) {
        if (pos > bytes_.size()) throw FormatError(FormatErrorKind::kTruncated, what);
        pos_ = pos;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::kIo, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::kIo, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatErrorKind::kIo, "short write to " + path.string());
}

}  // namespace occkit
