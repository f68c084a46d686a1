#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cpoll/errors.hpp"
#include "cpoll/quadrature.hpp"

using namespace cpoll;

TEST_CASE("polynomials and smooth integrands")
{
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0) ==
          doctest::Approx(std::expm1(1.0)).epsilon(1e-14));
    // 4 - 2 e^{1/2}
    double v = integrate([](double x) { return std::exp(0.5 * x) * x; }, 0.0, 1.0);
    CHECK(std::abs(v - (4.0 - 2.0 * std::exp(0.5))) < 1e-12);
}

TEST_CASE("adapts to sharp features")
{
    auto r = integrate_adaptive([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0);
    double exact = 2.0 * std::atan(1.0 / 1e-2) / 1e-2;
    CHECK(std::abs(r.value - exact) < 1e-8);
    CHECK(r.panels > 1);
    CHECK(r.error <= 1e-10);
}

TEST_CASE("degenerate and reversed intervals")
{
    CHECK(integrate([](double) { return 1.0; }, 0.3, 0.3) == 0.0);
    CHECK(integrate([](double x) { return x; }, 1.0, 0.0) == doctest::Approx(-0.5));
}

TEST_CASE("failure modes")
{
    QuadratureOptions tight{1e-15, 3};
    CHECK_THROWS_AS(integrate([](double x) { return std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, tight),
                    QuadratureFailure);
    CHECK_THROWS_AS(integrate([](double) { return std::nan(""); }, 0.0, 1.0), QuadratureFailure);
}
