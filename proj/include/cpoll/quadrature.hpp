#pragma once

#include <functional>

namespace cpoll {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    int max_subdivisions = 10'000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // sum of |K15 - G7| over the final panels
    int panels = 0;
};

// Globally adaptive Gauss-Kronrod (7/15) on [a, b]: the panel with the
// largest error estimate is bisected until the summed estimate is below
// abs_tol. Throws QuadratureFailure when max_subdivisions is exhausted.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureOptions& opts = {});

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& opts = {})
{
    return integrate_adaptive(f, a, b, opts).value;
}

}  // namespace cpoll
