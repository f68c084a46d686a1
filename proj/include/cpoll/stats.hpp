#pragma once

#include <cstddef>
#include <span>

namespace cpoll {

struct Estimate {
    double mean = 0.0;
    double halfwidth_95 = 0.0;
    std::size_t n = 0;

    double lower() const { return mean - halfwidth_95; }
    double upper() const { return mean + halfwidth_95; }
    bool covers(double value) const { return value >= lower() && value <= upper(); }
};

// Two-sided 97.5% Student-t quantile. Tabulated for df <= 30, normal above.
double student_t_975(std::size_t df);

// Sample mean and Student-t 95% half-width across replication means.
// Throws TooFewReplications for fewer than two values.
Estimate replication_ci(std::span<const double> values);

// Time average of a piecewise-constant process from its accumulated integral.
double time_average(double accumulated, double elapsed);

}  // namespace cpoll
