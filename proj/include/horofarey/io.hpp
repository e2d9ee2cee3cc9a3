#pragma once

// On-disk formats: the reference-law cache (one sorted sample per CSV row
// plus a JSON sidecar) and fixed-precision number formatting.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "horofarey/errors.hpp"
#include "horofarey/lattice.hpp"
#include "horofarey/limit_laws.hpp"

namespace horofarey {

inline constexpr int kCacheFormatVersion = 1;
inline constexpr const char* kCacheDirEnv = "HOROFAREY_CACHE_DIR";

/// 12 significant digits, the precision of every printed number.
inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Round-trip precision for cached samples.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::filesystem::path default_cache_dir() {
    if (const char* env = std::getenv(kCacheDirEnv); env != nullptr && *env != '\0') return env;
    return std::filesystem::path(".horofarey_cache");
}

/// File stem encoding (kind, d, sigma or t, observable, n, seed).
inline std::string cache_key(const ReferenceMeta& m) {
    std::string obs = to_string(m.observable);
    for (char& c : obs)
        if (c == ':') c = '_';
    std::ostringstream os;
    os << to_string(m.kind) << "_d" << m.d;
    if (m.kind == LawKind::case_b_mc) os << "_sigma" << fmt12(m.sigma);
    if (m.kind == LawKind::haar_empirical_horosphere) os << "_t" << fmt12(m.t);
    os << "_" << obs << "_n" << m.n << "_seed" << m.seed;
    return os.str();
}

inline nlohmann::json to_json(const ReferenceMeta& m) {
    return {{"kind", to_string(m.kind)}, {"d", m.d},   {"sigma", m.sigma}, {"t", m.t},
            {"observable", to_string(m.observable)}, {"n", m.n}, {"seed", m.seed}, {"version", kCacheFormatVersion}};
}

inline void save_reference_law(const ReferenceLaw& law, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::string key = cache_key(law.meta);
    {
        std::ofstream csv(dir / (key + ".csv"));
        if (!csv) throw std::runtime_error("cannot write " + (dir / (key + ".csv")).string());
        csv << "value\n";
        for (double v : law.samples) csv << fmt17(v) << '\n';
    }
    std::ofstream side(dir / (key + ".json"));
    if (!side) throw std::runtime_error("cannot write sidecar for " + key);
    side << to_json(law.meta).dump(2) << '\n';
}

/// Returns the cached law for `meta` if both files exist and the sidecar
/// matches.
inline std::optional<ReferenceLaw> load_reference_law(const ReferenceMeta& meta, const std::filesystem::path& dir) {
    const std::string key = cache_key(meta);
    std::ifstream side(dir / (key + ".json"));
    std::ifstream csv(dir / (key + ".csv"));
    if (!side || !csv) return std::nullopt;
    nlohmann::json j;
    try {
        side >> j;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (j != to_json(meta)) return std::nullopt;
    ReferenceLaw law{meta, {}};
    std::string line;
    std::getline(csv, line);
    if (line != "value") return std::nullopt;
    law.samples.reserve(meta.n);
    while (std::getline(csv, line)) {
        if (!line.empty()) law.samples.push_back(std::strtod(line.c_str(), nullptr));
    }
    if (law.samples.size() != meta.n) return std::nullopt;
    return law;
}

} // namespace horofarey
