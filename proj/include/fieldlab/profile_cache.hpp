#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fieldlab/profile.hpp"
#include "fieldlab/shooter.hpp"
#include "json.hpp"

namespace fieldlab {

inline constexpr const char* kToolVersion = "fieldlab 0.1.0";

nlohmann::json options_to_json(const ShootingOptions& opts);

/// {dimension, f, shoot_height, radii, values, derivs, node_count, tail,
///  integrator, tool_version}. Cached norms are deliberately left out.
nlohmann::json profile_to_json(const RadialProfile& p, const ShootingOptions& opts);

/// Inverse of profile_to_json; f must be the nonlinearity named in the file.
/// Throws ConfigError on malformed documents.
RadialProfile profile_from_json(const nlohmann::json& j, NonlinearityPtr f);

/// 16 hex digits of FNV-1a over the canonical dump of
/// {f descriptor, N, nodes, tolerances}.
std::string cache_key(const nlohmann::json& f_descriptor, int dimension, int nodes, const ShootingOptions& opts);

class ProfileCache {
public:
    explicit ProfileCache(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    std::optional<nlohmann::json> load(const std::string& key) const;
    void store(const std::string& key, const nlohmann::json& doc) const;
    /// Every *.json entry, sorted by name.
    std::vector<std::filesystem::path> entries() const;

private:
    std::filesystem::path dir_;
};

/// Exclusive run lock: creates <dir>/.fieldlab.lock and removes it on
/// destruction. Throws ConfigError when another run holds it.
class CacheLock {
public:
    explicit CacheLock(const std::filesystem::path& dir);
    ~CacheLock();
    CacheLock(const CacheLock&) = delete;
    CacheLock& operator=(const CacheLock&) = delete;

private:
    std::filesystem::path path_;
};

} // namespace fieldlab
