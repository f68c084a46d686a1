#include "cpoll/format.hpp"

#include <cmath>

#include <fmt/format.h>

namespace cpoll {

std::string fmt_real(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return fmt::format("{:.9g}", x);
}

}  // namespace cpoll
