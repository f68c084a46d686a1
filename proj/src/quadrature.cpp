#include "cpoll/quadrature.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "cpoll/errors.hpp"

namespace cpoll {

namespace {

struct Panel {
    double a;
    double b;
    double value;
    double error;

    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b)
{
    using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
    using gauss = boost::math::quadrature::gauss<double, 7>;
    const auto& x = kronrod::abscissa();
    const auto& wk = kronrod::weights();
    const auto& wg = gauss::weights();

    double mid = 0.5 * (a + b);
    double half = 0.5 * (b - a);
    double f0 = f(mid);
    double k = f0 * wk[0];
    double g = f0 * wg[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        double s = f(mid + half * x[i]) + f(mid - half * x[i]);
        k += s * wk[i];
        // Gauss-7 nodes sit at the even Kronrod indices.
        if (i % 2 == 0)
            g += s * wg[i / 2];
    }
    return Panel{a, b, half * k, std::abs(half * (k - g))};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureOptions& opts)
{
    if (a == b)
        return {};
    std::priority_queue<Panel> panels;
    Panel first = gk15(f, a, b);
    double total = first.value;
    double error = first.error;
    panels.push(first);

    int subdivisions = 0;
    while (error > opts.abs_tol) {
        if (!std::isfinite(total))
            throw QuadratureFailure("integrand is not finite on the interval");
        if (subdivisions >= opts.max_subdivisions)
            throw QuadratureFailure(fmt::format(
                "tolerance {} not met after {} subdivisions (error estimate {})", opts.abs_tol,
                subdivisions, error));
        Panel worst = panels.top();
        panels.pop();
        double mid = 0.5 * (worst.a + worst.b);
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++subdivisions;
        // Running sums drift; recompute occasionally.
        if (subdivisions % 64 == 0) {
            auto copy = panels;
            total = 0.0;
            error = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                error += copy.top().error;
                copy.pop();
            }
        }
    }
    if (!std::isfinite(total))
        throw QuadratureFailure("integrand is not finite on the interval");
    return {total, error, static_cast<int>(panels.size())};
}

}  // namespace cpoll
