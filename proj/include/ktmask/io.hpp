#pragma once

// On-disk formats. All binary fields are little-endian regardless of host:
//
//   volume file: 12-byte magic "KTMASKVOL\0\0\0", uint32 version,
//                uint32 N, uint32 N, uint32 T,
//                then N*N*T (re, im) pairs of 64-bit floats, frame-major.
//   sidecar:     "<volume path>.meta", one "key: value" per line.
//   mask file:   text; first line "N T n", then n lines "frame row" in
//                acquisition order.
//
// Round trips are bit-exact for volumes and masks.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ktmask/core.hpp"

namespace ktmask {

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline double get_f64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

constexpr char volume_magic[12] = {'K', 'T', 'M', 'A', 'S', 'K', 'V', 'O', 'L', 0, 0, 0};
constexpr std::uint32_t volume_version = 1;

} // namespace detail

inline void write_sidecar(const std::string& path, const std::map<std::string, std::string>& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file: " + path);
    for (const auto& [key, value] : meta) out << key << ": " << value << "\n";
}

inline std::map<std::string, std::string> read_sidecar(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::map<std::string, std::string> meta;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw std::runtime_error("malformed sidecar line: " + line);
        std::string key = line.substr(0, colon);
        std::string value = line.substr(colon + 1);
        while (!value.empty() && value.front() == ' ') value.erase(value.begin());
        meta[key] = value;
    }
    return meta;
}

inline void write_volume(const std::string& path, const DynamicImage& image,
                         const std::map<std::string, std::string>& meta = {}) {
    image.validate();
    std::string buf;
    buf.reserve(28 + image.data.size() * 16);
    buf.append(detail::volume_magic, sizeof detail::volume_magic);
    detail::put_u32(buf, detail::volume_version);
    detail::put_u32(buf, static_cast<std::uint32_t>(image.size));
    detail::put_u32(buf, static_cast<std::uint32_t>(image.size));
    detail::put_u32(buf, static_cast<std::uint32_t>(image.frames));
    for (const auto& v : image.data) {
        detail::put_f64(buf, v.real());
        detail::put_f64(buf, v.imag());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
    if (!meta.empty()) write_sidecar(path + ".meta", meta);
}

inline DynamicImage read_volume(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 28 || std::memcmp(buf.data(), detail::volume_magic, sizeof detail::volume_magic) != 0)
        throw std::runtime_error("not a volume file: " + path);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    if (detail::get_u32(p + 12) != detail::volume_version)
        throw std::runtime_error("unsupported volume version: " + path);
    const std::uint32_t ny = detail::get_u32(p + 16);
    const std::uint32_t nx = detail::get_u32(p + 20);
    const std::uint32_t nt = detail::get_u32(p + 24);
    if (ny != nx || ny == 0 || nt == 0) throw std::runtime_error("bad volume dims: " + path);
    const std::size_t count = static_cast<std::size_t>(ny) * nx * nt;
    if (buf.size() != 28 + count * 16) throw std::runtime_error("truncated volume file: " + path);
    DynamicImage image(static_cast<int>(ny), static_cast<int>(nt));
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned char* q = p + 28 + i * 16;
        image.data[i] = cplx{detail::get_f64(q), detail::get_f64(q + 8)};
    }
    return image;
}

inline void write_mask(const std::string& path, const Mask& mask) {
    mask.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file: " + path);
    out << mask.dims.size << " " << mask.dims.frames << " " << mask.line_count() << "\n";
    for (const auto& ln : mask.lines) out << ln.frame << " " << ln.row << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline Mask read_mask(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    int n = 0, t = 0, count = 0;
    if (!(in >> n >> t >> count)) throw std::runtime_error("malformed mask header: " + path);
    Mask mask(Dims{n, t});
    for (int i = 0; i < count; ++i) {
        Line ln;
        if (!(in >> ln.frame >> ln.row)) throw std::runtime_error("malformed mask line: " + path);
        mask.lines.push_back(ln);
    }
    mask.validate();
    return mask;
}

// Fixed-precision float formatting for CSV output; infinities render as
// "inf"/"-inf" so files stay parseable.
inline std::string format_g(double v, int digits) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::string format_g6(double v) { return format_g(v, 6); }
inline std::string format_g12(double v) { return format_g(v, 12); }

} // namespace ktmask
