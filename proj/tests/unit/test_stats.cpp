#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "cpoll/errors.hpp"
#include "cpoll/stats.hpp"

using namespace cpoll;

TEST_CASE("replication_ci examples")
{
    std::vector<double> same{1, 1, 1, 1};
    auto e = replication_ci(same);
    CHECK(e.mean == 1.0);
    CHECK(e.halfwidth_95 == 0.0);
    CHECK(e.n == 4);

    std::vector<double> two{0, 2};
    e = replication_ci(two);
    CHECK(e.mean == 1.0);
    CHECK(e.halfwidth_95 == doctest::Approx(12.706).epsilon(1e-4));

    std::vector<double> one{3};
    CHECK_THROWS_AS(replication_ci(one), TooFewReplications);
    CHECK_THROWS_AS(replication_ci(std::vector<double>{}), TooFewReplications);
}

TEST_CASE("t quantiles")
{
    CHECK(student_t_975(1) == doctest::Approx(12.7062).epsilon(1e-5));
    CHECK(student_t_975(9) == doctest::Approx(2.2622).epsilon(1e-4));
    CHECK(student_t_975(19) == doctest::Approx(2.0930).epsilon(1e-4));
    CHECK(student_t_975(30) == doctest::Approx(2.0423).epsilon(1e-4));
    CHECK(student_t_975(1000) == doctest::Approx(1.959964).epsilon(1e-6));
    for (std::size_t df = 2; df <= 31; ++df)
        CHECK(student_t_975(df) < student_t_975(df - 1));
    CHECK(student_t_975(31) == student_t_975(500));
}

TEST_CASE("time_average")
{
    CHECK(time_average(0.0, 5.0) == 0.0);
    CHECK(time_average(5.0, 5.0) == 1.0);
    // L = 2 on half the window
    CHECK(time_average(2.0 * 5.0, 10.0) == 1.0);
    CHECK_THROWS_AS(time_average(1.0, 0.0), ZeroElapsed);
    CHECK_THROWS_AS(time_average(1.0, -1.0), ZeroElapsed);
}

TEST_CASE("coverage of the 95% interval")
{
    std::mt19937_64 g(20240611);
    std::normal_distribution<double> z(3.0, 2.0);
    int covered = 0;
    const int trials = 1000;
    std::vector<double> v(10);
    for (int t = 0; t < trials; ++t) {
        for (auto& x : v)
            x = z(g);
        if (replication_ci(v).covers(3.0))
            ++covered;
    }
    CHECK(covered >= 930);
    CHECK(covered <= 970);
}
