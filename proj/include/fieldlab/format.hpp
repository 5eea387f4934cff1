#pragma once

#include <string>

namespace fieldlab {

/// Shortest-safe round-trip text for a double: "%.17g".
std::string fmt17(double x);

} // namespace fieldlab
