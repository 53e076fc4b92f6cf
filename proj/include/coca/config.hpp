#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coca/error.hpp"
#include "coca/hierarchy.hpp"

namespace coca {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
    if (used != v.size()) throw ConfigError("config: trailing junk in " + key + ": '" + v + "'");
    return out;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    if (v.empty() || v[0] == '-')
        throw ConfigError("config: expected a nonnegative integer for " + key);
    std::size_t used = 0;
    std::uint64_t out;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
    }
    if (used != v.size()) throw ConfigError("config: trailing junk in " + key + ": '" + v + "'");
    return out;
}

}  // namespace detail

// Flat key=value format with dotted prefixes; '#' starts a comment, blank lines
// are skipped, layer indices are 1-based and must be contiguous.
inline NetConfig parse_config(const std::string& text) {
    NetConfig cfg;
    std::map<std::size_t, LayerConfig> layers;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config: empty key or value on line " + std::to_string(lineno));

        if (key == "encoder.d0") {
            cfg.encoder.d0 = static_cast<std::size_t>(detail::parse_uint(key, val));
        } else if (key == "encoder.color_weight") {
            cfg.encoder.color_weight = detail::parse_double(key, val);
        } else if (key == "encoder.position_weight") {
            cfg.encoder.position_weight = detail::parse_double(key, val);
        } else if (key == "encoder.smoothing_radius") {
            cfg.encoder.smoothing_radius = static_cast<std::size_t>(detail::parse_uint(key, val));
        } else if (key == "encoder.projection_seed") {
            cfg.encoder.projection_seed = detail::parse_uint(key, val);
        } else if (key == "stop.threshold") {
            cfg.dynamic_threshold = detail::parse_double(key, val);
        } else if (key == "anchor.mode") {
            if (val == "compact")
                cfg.anchor_mode = AnchorMode::Compact;
            else if (val == "random")
                cfg.anchor_mode = AnchorMode::Random;
            else
                throw ConfigError("config: anchor.mode must be 'compact' or 'random'");
        } else if (key == "anchor.seed") {
            cfg.anchor_seed = detail::parse_uint(key, val);
        } else if (key.rfind("layer.", 0) == 0) {
            const auto rest = key.substr(6);
            const auto dot = rest.find('.');
            if (dot == std::string::npos)
                throw ConfigError("config: malformed layer key '" + key + "'");
            const std::size_t idx =
                static_cast<std::size_t>(detail::parse_uint(key, rest.substr(0, dot)));
            if (idx == 0) throw ConfigError("config: layer indices are 1-based");
            const std::string field = rest.substr(dot + 1);
            LayerConfig& lc = layers[idx];
            if (field == "t") {
                lc.t = static_cast<std::size_t>(detail::parse_uint(key, val));
            } else if (field == "k") {
                lc.k = val == "dynamic" ? 0 : static_cast<std::size_t>(detail::parse_uint(key, val));
            } else if (field == "tau") {
                lc.tau = detail::parse_double(key, val);
            } else if (field == "groups") {
                lc.groups = static_cast<std::size_t>(detail::parse_uint(key, val));
            } else if (field == "smoothing_radius") {
                lc.smoothing_radius = static_cast<std::size_t>(detail::parse_uint(key, val));
            } else if (field == "smoothing_strength") {
                lc.smoothing_strength = detail::parse_double(key, val);
            } else if (field == "projection") {
                if (val == "identity")
                    lc.projection = Projection::Identity;
                else if (val == "orthogonal")
                    lc.projection = Projection::SeededOrthogonal;
                else
                    throw ConfigError("config: layer projection must be 'identity' or 'orthogonal'");
            } else if (field == "projection_seed") {
                lc.projection_seed = detail::parse_uint(key, val);
            } else {
                throw ConfigError("config: unknown layer field '" + field + "'");
            }
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    if (layers.empty()) throw ConfigError("config: no layers declared");
    std::size_t expect = 1;
    for (const auto& [idx, lc] : layers) {
        if (idx != expect)
            throw ConfigError("config: layer indices must be contiguous from 1, missing layer." +
                              std::to_string(expect));
        cfg.layers.push_back(lc);
        ++expect;
    }
    if (cfg.dynamic_threshold <= 0.0 || cfg.dynamic_threshold >= 1.0)
        throw ConfigError("config: stop.threshold must be in (0, 1)");
    return cfg;
}

inline NetConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace coca
