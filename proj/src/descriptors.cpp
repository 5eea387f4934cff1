#include "fieldlab/descriptors.hpp"

#include "fieldlab/envelope.hpp"
#include "fieldlab/errors.hpp"

namespace fieldlab {

namespace {

double number(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError(std::string("descriptor field '") + key + "' must be a number in " + j.dump());
    return j[key].get<double>();
}

double number_or(const nlohmann::json& j, const char* key, double fallback)
{
    return j.contains(key) ? number(j, key) : fallback;
}

std::string family_of(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
        throw ConfigError("descriptor needs a string 'family' field: " + j.dump());
    return j["family"].get<std::string>();
}

const char* q_slot(const std::string& fam)
{
    if (fam == "affine")
        return "b";
    if (fam == "power_m" || fam == "exp_m")
        return "q";
    throw ConfigError("Kirchhoff family '" + fam + "' has no q parameter");
}

} // namespace

NonlinearityPtr nonlinearity_from_json(const nlohmann::json& j, int dimension)
{
    const std::string fam = family_of(j);
    try {
        if (fam == "power")
            return make_power_nonlinearity(number(j, "mu"), number(j, "p"), dimension);
        if (fam == "tabulated") {
            if (!j.contains("t") || !j.contains("f"))
                throw ConfigError("tabulated nonlinearity needs 't' and 'f' arrays");
            const auto t = j["t"].get<std::vector<double>>();
            const auto f = j["f"].get<std::vector<double>>();
            return make_tabulated_nonlinearity(j.value("name", std::string("table")), t, f,
                                               number_or(j, "omega", 0.0));
        }
        if (fam == "aux") {
            if (!j.contains("source"))
                throw ConfigError("aux nonlinearity needs a 'source' descriptor");
            const NonlinearityPtr src = nonlinearity_from_json(j["source"], dimension);
            const double p0 = number_or(j, "p0", default_p0(dimension));
            const double t_max = number_or(j, "grid_max", 1e3 * std::max(1.0, src->zeta()));
            const auto n = std::size_t(number_or(j, "grid_points", 20001));
            const Envelope e = build_envelope(src, p0, uniform_grid(t_max, n), dimension);
            return aux_problem_nonlinearity(e, number_or(j, "m0", 1.0));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad nonlinearity descriptor: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown nonlinearity family '" + fam + "'");
}

KirchhoffFunction kirchhoff_from_json(const nlohmann::json& j)
{
    const std::string fam = family_of(j);
    try {
        if (fam == "constant")
            return make_constant_m(number_or(j, "m0", 1.0));
        if (fam == "affine")
            return make_affine_m(number(j, "a"), number(j, "b"));
        if (fam == "power_m")
            return make_power_m(number(j, "m0"), number(j, "q"), number(j, "s"));
        if (fam == "exp_m")
            return make_exp_m(number(j, "q"));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown Kirchhoff family '" + fam + "'");
}

KirchhoffFamily kirchhoff_family_from_json(const nlohmann::json& j)
{
    const std::string fam = family_of(j);
    const std::string slot = q_slot(fam);
    nlohmann::json probe = j;
    probe[slot] = 1.0;
    kirchhoff_from_json(probe);
    nlohmann::json desc = j;
    desc.erase(slot);
    desc["q_parameter"] = slot;
    return {[j, slot](double q) {
                nlohmann::json d = j;
                d[slot] = q;
                return kirchhoff_from_json(d);
            },
            desc};
}

} // namespace fieldlab
