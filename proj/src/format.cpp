#include "fieldlab/format.hpp"

#include <cstdio>

namespace fieldlab {

std::string fmt17(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace fieldlab
