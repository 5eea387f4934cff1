#pragma once

#include "fieldlab/kirchhoff.hpp"
#include "fieldlab/nonlinearity.hpp"
#include "json.hpp"

namespace fieldlab {

/// Rebuilds a nonlinearity from its descriptor. Accepted families:
///   {"family":"power","mu":μ,"p":p}
///   {"family":"tabulated","name":..,"t":[..],"f":[..],"omega":ω or 0}
///   {"family":"aux","source":{..},"m0":m0,"p0":p0,"grid_max":T,"grid_points":n}
/// Malformed input raises ConfigError.
NonlinearityPtr nonlinearity_from_json(const nlohmann::json& j, int dimension);

/// {"family":"constant","m0"} | {"family":"affine","a","b"} |
/// {"family":"power_m","m0","q","s"} | {"family":"exp_m","q"}.
KirchhoffFunction kirchhoff_from_json(const nlohmann::json& j);

/// Same descriptors with the q-slot left free (b for affine, q otherwise).
KirchhoffFamily kirchhoff_family_from_json(const nlohmann::json& j);

} // namespace fieldlab
