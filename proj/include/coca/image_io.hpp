#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "coca/error.hpp"
#include "coca/metrics.hpp"
#include "coca/tensor.hpp"

namespace coca {

namespace detail {

inline int next_pnm_token(std::istream& in) {
    // skips whitespace and '#' comments, returns the next integer
    char c;
    while (in.get(c)) {
        if (c == '#') {
            while (in.get(c) && c != '\n') {}
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            in.unget();
            int v;
            if (!(in >> v)) break;
            return v;
        }
    }
    throw IoError("pnm: truncated header");
}

inline void put_u16be(std::ostream& out, std::uint16_t v) {
    out.put(static_cast<char>(v >> 8));
    out.put(static_cast<char>(v & 0xff));
}

inline void put_u32be(std::ostream& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.put(static_cast<char>((v >> s) & 0xff));
}

inline std::uint16_t get_u16be(std::istream& in) {
    const int a = in.get(), b = in.get();
    if (a < 0 || b < 0) throw IoError("label sidecar: truncated");
    return static_cast<std::uint16_t>((a << 8) | b);
}

inline std::uint32_t get_u32be(std::istream& in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        const int b = in.get();
        if (b < 0) throw IoError("label sidecar: truncated");
        v = (v << 8) | static_cast<std::uint32_t>(b);
    }
    return v;
}

}  // namespace detail

// Binary P6, 8-bit channels mapped to [0, 1].
inline Tensor read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_ppm: cannot open " + path);
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P6") throw IoError("read_ppm: not a binary P6 file: " + path);
    const int w = detail::next_pnm_token(in);
    const int h = detail::next_pnm_token(in);
    const int maxval = detail::next_pnm_token(in);
    if (w <= 0 || h <= 0) throw IoError("read_ppm: bad dimensions");
    if (maxval <= 0 || maxval > 255) throw IoError("read_ppm: only 8-bit maxval supported");
    in.get();  // single whitespace after maxval
    std::vector<char> raw(static_cast<std::size_t>(w) * h * 3);
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw IoError("read_ppm: truncated pixel data");
    Tensor img({static_cast<std::size_t>(h), static_cast<std::size_t>(w), 3});
    for (std::size_t i = 0; i < raw.size(); ++i)
        img.data[i] = static_cast<double>(static_cast<unsigned char>(raw[i])) /
                      static_cast<double>(maxval);
    return img;
}

inline void write_ppm(const std::string& path, const Tensor& img) {
    if (img.shape.size() != 3 || img.shape[2] != 3)
        throw ConfigError("write_ppm: expected an [h, w, 3] tensor");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_ppm: cannot open " + path);
    out << "P6\n" << img.shape[1] << " " << img.shape[0] << "\n255\n";
    for (double v : img.data) {
        const double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        out.put(static_cast<char>(static_cast<int>(clamped * 255.0 + 0.5)));
    }
    if (!out) throw IoError("write_ppm: write failed");
}

// Binary P5, values in [0, 1] scaled to 8 bits.
inline void write_pgm(const std::string& path, const Tensor& gray) {
    if (gray.shape.size() != 2) throw ConfigError("write_pgm: expected an [h, w] tensor");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_pgm: cannot open " + path);
    out << "P5\n" << gray.shape[1] << " " << gray.shape[0] << "\n255\n";
    for (double v : gray.data) {
        const double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        out.put(static_cast<char>(static_cast<int>(clamped * 255.0 + 0.5)));
    }
    if (!out) throw IoError("write_pgm: write failed");
}

// Label sidecar layout, all integers big-endian:
//   bytes 0..7   magic "COCALBL1"
//   bytes 8..11  u32 height
//   bytes 12..15 u32 width
//   bytes 16..17 u16 background-id count
//   then         u16 per background id
//   then         u16 per pixel, row-major
inline void write_labels(const std::string& path, const LabelMap& m,
                         const std::set<int>& bg_ids = {}) {
    for (int id : bg_ids)
        if (id < 0 || id > 65535) throw ConfigError("write_labels: background id out of range");
    for (int v : m.labels)
        if (v < 0 || v > 65535) throw ConfigError("write_labels: label out of range");
    if (m.labels.size() != m.h * m.w) throw ConfigError("write_labels: label/shape mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_labels: cannot open " + path);
    out.write("COCALBL1", 8);
    detail::put_u32be(out, static_cast<std::uint32_t>(m.h));
    detail::put_u32be(out, static_cast<std::uint32_t>(m.w));
    detail::put_u16be(out, static_cast<std::uint16_t>(bg_ids.size()));
    for (int id : bg_ids) detail::put_u16be(out, static_cast<std::uint16_t>(id));
    for (int v : m.labels) detail::put_u16be(out, static_cast<std::uint16_t>(v));
    if (!out) throw IoError("write_labels: write failed");
}

struct LabelFile {
    LabelMap map;
    std::set<int> bg_ids;
};

inline LabelFile read_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_labels: cannot open " + path);
    std::string magic(8, '\0');
    in.read(magic.data(), 8);
    if (magic != "COCALBL1") throw IoError("read_labels: bad magic in " + path);
    LabelFile f;
    f.map.h = detail::get_u32be(in);
    f.map.w = detail::get_u32be(in);
    const std::uint16_t nbg = detail::get_u16be(in);
    for (std::uint16_t i = 0; i < nbg; ++i) f.bg_ids.insert(detail::get_u16be(in));
    f.map.labels.resize(f.map.h * f.map.w);
    for (auto& v : f.map.labels) v = detail::get_u16be(in);
    if (!in) throw IoError("read_labels: truncated label data in " + path);
    return f;
}

}  // namespace coca
