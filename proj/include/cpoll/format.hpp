#pragma once

#include <string>

namespace cpoll {

// Nine significant digits, '.' separator; "nan"/"inf" for non-finite values.
std::string fmt_real(double x);

}  // namespace cpoll
