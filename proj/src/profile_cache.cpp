#include "fieldlab/profile_cache.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>

#include "fieldlab/errors.hpp"

namespace fieldlab {

namespace fs = std::filesystem;

nlohmann::json options_to_json(const ShootingOptions& opts)
{
    const auto& io = opts.integrator;
    nlohmann::json j = {{"abs_tol", io.abs_tol},
                        {"rel_tol", io.rel_tol},
                        {"max_step", io.max_step},
                        {"bisection_tol", opts.bisection_tol},
                        {"tail_threshold", opts.tail_threshold},
                        {"tail_margin", opts.tail_margin}};
    if (io.max_radius)
        j["max_radius"] = *io.max_radius;
    if (io.blowup_bound)
        j["blowup_bound"] = *io.blowup_bound;
    return j;
}

nlohmann::json profile_to_json(const RadialProfile& p, const ShootingOptions& opts)
{
    nlohmann::json j = {{"dimension", p.dimension},
                        {"f", p.f ? p.f->descriptor() : nlohmann::json()},
                        {"shoot_height", p.shoot_height},
                        {"radii", p.radii},
                        {"values", p.values},
                        {"derivs", p.derivs},
                        {"node_count", p.node_count},
                        {"integrator", options_to_json(opts)},
                        {"tool_version", kToolVersion}};
    if (p.tail)
        j["tail"] = {{"match_radius", p.tail->match_radius},
                     {"amplitude", p.tail->amplitude},
                     {"decay_rate", p.tail->decay_rate},
                     {"algebraic_power", p.tail->algebraic_power}};
    return j;
}

RadialProfile profile_from_json(const nlohmann::json& j, NonlinearityPtr f)
{
    try {
        RadialProfile p;
        p.dimension = j.at("dimension").get<int>();
        p.shoot_height = j.at("shoot_height").get<double>();
        p.radii = j.at("radii").get<std::vector<double>>();
        p.values = j.at("values").get<std::vector<double>>();
        p.derivs = j.at("derivs").get<std::vector<double>>();
        p.node_count = j.at("node_count").get<int>();
        if (j.contains("tail")) {
            const auto& t = j["tail"];
            TailModel tm;
            tm.match_radius = t.at("match_radius").get<double>();
            tm.amplitude = t.at("amplitude").get<double>();
            tm.decay_rate = t.at("decay_rate").get<double>();
            tm.algebraic_power = t.at("algebraic_power").get<double>();
            p.tail = tm;
        }
        p.f = std::move(f);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed profile document: ") + e.what());
    }
}

std::string cache_key(const nlohmann::json& f_descriptor, int dimension, int nodes, const ShootingOptions& opts)
{
    const nlohmann::json key = {
        {"f", f_descriptor}, {"dimension", dimension}, {"nodes", nodes}, {"tolerances", options_to_json(opts)}};
    // nlohmann::json objects keep keys sorted, so dump() is canonical.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : key.dump()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ProfileCache::ProfileCache(fs::path dir) : dir_(std::move(dir))
{
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
        throw ConfigError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::optional<nlohmann::json> ProfileCache::load(const std::string& key) const
{
    std::ifstream in(dir_ / (key + ".json"));
    if (!in)
        return std::nullopt;
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

void ProfileCache::store(const std::string& key, const nlohmann::json& doc) const
{
    const fs::path target = dir_ / (key + ".json");
    const fs::path tmp = dir_ / (key + ".json.tmp");
    {
        std::ofstream out(tmp);
        if (!out)
            throw ConfigError("cannot write cache file " + tmp.string());
        out << doc.dump() << '\n';
    }
    fs::rename(tmp, target);
}

std::vector<fs::path> ProfileCache::entries() const
{
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir_))
        if (e.is_regular_file() && e.path().extension() == ".json")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

CacheLock::CacheLock(const fs::path& dir) : path_(dir / ".fieldlab.lock")
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::FILE* fp = std::fopen(path_.c_str(), "wx");
    if (!fp)
        throw ConfigError("cache directory " + dir.string() + " is locked by another run (" + path_.string() + ")");
    std::fclose(fp);
}

CacheLock::~CacheLock()
{
    std::error_code ec;
    fs::remove(path_, ec);
}

} // namespace fieldlab
