#include "cpoll/stats.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "cpoll/errors.hpp"

namespace cpoll {

double student_t_975(std::size_t df)
{
    static constexpr std::array<double, 31> table = {
        0.0,     12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646, 2.3060, 2.2622, 2.2281,
        2.2010,  2.1788,  2.1604, 2.1448, 2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860, 2.0796,
        2.0739,  2.0687,  2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423};
    if (df == 0)
        throw TooFewReplications("t quantile needs at least one degree of freedom");
    if (df < table.size())
        return table[df];
    return 1.959964;
}

Estimate replication_ci(std::span<const double> values)
{
    if (values.size() < 2)
        throw TooFewReplications(
            fmt::format("confidence interval needs >= 2 replications, got {}", values.size()));
    double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values)
        sum += v;
    double mean = sum / n;
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    return {mean, student_t_975(values.size() - 1) * sd / std::sqrt(n), values.size()};
}

double time_average(double accumulated, double elapsed)
{
    if (!(elapsed > 0.0))
        throw ZeroElapsed(fmt::format("time average over non-positive window {}", elapsed));
    return accumulated / elapsed;
}

}  // namespace cpoll
