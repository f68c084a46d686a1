#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cpoll/analytic.hpp"
#include "cpoll/errors.hpp"
#include "support/random_params.hpp"

using namespace cpoll;

namespace {

SystemParams config_a()
{
    return make_system(0.5, 1.0, BatchSpec::deterministic(1), ServiceSpec::exponential(1.0));
}

SystemParams two_batch(double lambda = 0.2)
{
    return make_system(lambda, 1.0, BatchSpec::deterministic(2), ServiceSpec::deterministic(0.5));
}

// E[B] + int_0^1 sum_k p_k k x^{k-1} E[W | X = x, K = k] dx
double sojourn_by_conditioning(const SystemParams& p)
{
    auto pmf = p.batch.pmf();
    auto integrand = [&](double x) {
        double s = 0.0;
        for (std::size_t k = 1; k < pmf.size(); ++k) {
            if (pmf[k] == 0.0)
                continue;
            s += pmf[k] * k * std::pow(x, static_cast<double>(k) - 1.0) *
                 conditional_batch_wait(p, x, static_cast<int>(k));
        }
        return s;
    };
    // x = 0 is excluded from the conditional wait's domain; the integrand is
    // bounded there, so start just inside.
    return p.service.mean() + integrate(integrand, 1e-300, 1.0, {1e-12, 10'000});
}

}  // namespace

TEST_CASE("utilization")
{
    CHECK(utilization(config_a()) == 0.5);
    CHECK(utilization(two_batch()) == doctest::Approx(0.2).epsilon(1e-15));
    auto heavy = two_batch(1.0);
    CHECK(utilization(heavy) == 1.0);
    CHECK_THROWS_AS(mean_waiting_customers(heavy), UnstableSystem);
    CHECK_THROWS_AS(density_f(heavy), UnstableSystem);
    CHECK_THROWS_AS(mean_batch_sojourn(heavy), UnstableSystem);
    CHECK_THROWS_AS(analyze(heavy), UnstableSystem);
}

TEST_CASE("mean number of waiting customers")
{
    CHECK(mean_waiting_customers(config_a()) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mean_waiting_customers(two_batch()) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(mean_waiting_customers(two_batch(1e-12)) < 1e-11);
    CHECK(mean_waiting_customers(two_batch(0.0)) == 0.0);
}

TEST_CASE("generated waiting times")
{
    auto a = config_a();
    CHECK(gen_wait_service(a, 0.0) == 1.0);
    CHECK(gen_wait_service(a, 1.0) == doctest::Approx(1.6487213).epsilon(1e-7));
    CHECK(gen_wait_travel(a, 0.0) == 0.0);
    CHECK(gen_wait_travel(a, 1.0) == doctest::Approx(1.2974425).epsilon(1e-7));
    CHECK(gen_wait_residual(a, 0.0) == 1.0);
    CHECK(gen_wait_residual(a, 1.0) == doctest::Approx(1.6487213).epsilon(1e-7));
    CHECK(gen_wait_residual(two_batch(), 0.0) == 0.25);

    auto idle = two_batch(0.0);
    CHECK(gen_wait_service(idle, 0.7) == 0.5);
    CHECK(gen_wait_travel(idle, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
    auto tiny = two_batch(1e-12);
    CHECK(gen_wait_travel(tiny, 0.7) == doctest::Approx(0.7).epsilon(1e-11));

    CHECK_THROWS_AS(gen_wait_service(a, -0.1), DomainError);
    CHECK_THROWS_AS(gen_wait_service(a, 1.1), DomainError);
    CHECK_THROWS_AS(gen_wait_travel(a, 1.5), DomainError);
    CHECK_THROWS_AS(gen_wait_residual(a, -1.0), DomainError);
    CHECK_THROWS_AS(gen_wait_service(two_batch(1.0), 0.5), UnstableSystem);
}

TEST_CASE("expm1_ratio")
{
    CHECK(expm1_ratio(0.0) == 1.0);
    CHECK(expm1_ratio(1e-10) == doctest::Approx(1.0 + 5e-11).epsilon(1e-16));
    CHECK(expm1_ratio(1.0) == doctest::Approx(std::expm1(1.0)).epsilon(1e-15));
    CHECK(expm1_ratio(-2.0) == doctest::Approx(-std::expm1(-2.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("spatial density")
{
    auto f = density_f(config_a());
    CHECK(f.c0 == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(f.c1 == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(f(0.0) == doctest::Approx(1.75));
    CHECK(f(1.0) == doctest::Approx(0.25));
    CHECK(f.second_derivative() == 0.0);
    CHECK(cum_density(f, 0.0) == 0.0);
    CHECK(cum_density(f, 0.5) == doctest::Approx(0.6875).epsilon(1e-15));
    CHECK(cum_density(f, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(cum_density(f, 1.01), DomainError);

    auto zero = density_f(two_batch(0.0));
    CHECK(zero.c0 == 0.0);
    CHECK(zero.c1 == 0.0);
}

TEST_CASE("integral equation residual")
{
    auto a = config_a();
    auto f = density_f(a);
    for (int i = 0; i <= 100; ++i)
        CHECK(std::abs(integral_equation_residual(a, f, i / 100.0)) < 1e-8);

    AffineDensity bumped{f.c0 + 0.1, f.c1};
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
        double x = i / 100.0;
        double r = integral_equation_residual(a, bumped, x);
        // exact: 0.1 (1 - rho int_0^x e^{rho (x - z)} dz) = 0.1 (2 - e^{x/2})
        CHECK(r == doctest::Approx(0.1 * (2.0 - std::exp(0.5 * x))).epsilon(1e-9));
        worst = std::max(worst, std::abs(r));
    }
    CHECK(worst > 0.05);

    CHECK(integral_equation_residual(a, [](double) { return 0.0; }, 0.0) ==
          doctest::Approx(-0.25).epsilon(1e-15));
    CHECK_THROWS_AS(integral_equation_residual(a, f, 1.5), DomainError);
    CHECK_THROWS_AS(integral_equation_residual(a, f, -0.5), DomainError);
}

TEST_CASE("conditional batch wait")
{
    auto a = config_a();
    CHECK(conditional_batch_wait(a, 1.0, 1) == doctest::Approx(3.5).epsilon(1e-14));
    CHECK(conditional_batch_wait(a, 1e-12, 1) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK_THROWS_AS(conditional_batch_wait(a, 0.0, 1), DomainError);
    CHECK_THROWS_AS(conditional_batch_wait(a, 1.2, 1), DomainError);
    CHECK_THROWS_AS(conditional_batch_wait(a, 0.5, 0), DomainError);
    CHECK_THROWS_AS(conditional_batch_wait(two_batch(1.0), 0.5, 1), UnstableSystem);
}

TEST_CASE("pgf integral")
{
    CHECK(std::abs(pgf_integral(config_a()) - (4.0 - 2.0 * std::exp(0.5))) < 1e-12);
    CHECK(std::abs(pgf_integral(two_batch()) - 0.387565423) < 1e-9);
    auto g = make_system(0.0, 1.0, BatchSpec::geometric(0.2), ServiceSpec::exponential(1.0));
    auto gd = make_batch_dist(BatchSpec::geometric(0.2));
    CHECK(std::abs(pgf_integral(g) - (1.0 - gd.mean_k_over_k1())) < 1e-10);
}

TEST_CASE("mean batch sojourn: frozen values")
{
    CHECK(mean_batch_sojourn(config_a()) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(unit_batch_sojourn(config_a()) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(std::abs(mean_batch_sojourn(two_batch()) - 1.99201143669) < 1e-9);
    CHECK(std::abs(mean_batch_sojourn(two_batch(1e-10)) - 5.0 / 3.0) < 1e-8);
    CHECK(light_traffic_sojourn(two_batch()) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));

    auto weightless = make_system(0.3, 1.0, BatchSpec::deterministic(2), ServiceSpec::deterministic(0.0));
    CHECK(mean_batch_sojourn(weightless) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    // the continuous curve of the first convergence study
    const double expected[] = {7.20842897, 10.4263926, 19.1780719, 116.324896};
    const double rhos[] = {0.2, 0.45, 0.7, 0.95};
    for (int i = 0; i < 4; ++i) {
        auto p = make_system(rhos[i] / 5.0, 1.0, BatchSpec::deterministic(5), ServiceSpec::exponential(1.0));
        CHECK(mean_batch_sojourn(p) == doctest::Approx(expected[i]).epsilon(5e-9));
    }

    CHECK_THROWS_AS(unit_batch_sojourn(two_batch()), WrongDistribution);
}

TEST_CASE("analyze report")
{
    auto r = analyze(config_a());
    CHECK(r.rho == 0.5);
    CHECK(r.mean_l == doctest::Approx(1.0));
    CHECK(r.density.c0 == doctest::Approx(0.25));
    CHECK(r.density.c1 == doctest::Approx(1.5));
    CHECK(r.mean_sojourn_batch == doctest::Approx(3.0));
    CHECK(r.pgf_integral_value == doctest::Approx(0.7025574586).epsilon(1e-10));
}

TEST_CASE("properties over random systems")
{
    std::mt19937_64 g(7);
    for (int i = 0; i < 200; ++i) {
        auto p = testing::random_system(g);
        CAPTURE(p.lambda);
        CAPTURE(p.batch.label());
        CAPTURE(p.service.label());
        auto f = density_f(p);
        CHECK(f.c0 >= 0.0);
        CHECK(f.c1 >= 0.0);
        CHECK(std::abs(cum_density(f, 1.0) - mean_waiting_customers(p)) <= 1e-10);
        double worst = 0.0;
        for (int j = 0; j <= 100; ++j)
            worst = std::max(worst, std::abs(integral_equation_residual(p, f, j / 100.0)));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("conditioning on the furthest customer reproduces the sojourn")
{
    std::mt19937_64 g(99);
    for (int i = 0; i < 50; ++i) {
        auto p = testing::random_system(g);
        CAPTURE(p.batch.label());
        double direct = mean_batch_sojourn(p);
        CHECK(std::abs(sojourn_by_conditioning(p) - direct) < 1e-8);
    }
}

TEST_CASE("unit batches")
{
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        auto s = testing::random_service(g);
        double alpha = 0.1 + 3.0 * u(g);
        auto probe = make_system(1.0, alpha, BatchSpec::deterministic(1), s);
        double lambda = (0.01 + 0.97 * u(g)) / probe.service.mean();
        auto p = make_system(lambda, alpha, BatchSpec::deterministic(1), s);
        CHECK(std::abs(mean_batch_sojourn(p) - unit_batch_sojourn(p)) <= 1e-12 * unit_batch_sojourn(p));
    }
}

TEST_CASE("limits")
{
    std::mt19937_64 g(17);
    for (int i = 0; i < 50; ++i) {
        auto p = testing::random_system(g);
        auto light = p;
        light.lambda = 1e-8;
        CHECK(std::abs(mean_batch_sojourn(light) - light_traffic_sojourn(light)) <= 1e-5);

        BatchSpec b = testing::random_batch(g);
        auto no_work = make_system(p.lambda, p.alpha, b, ServiceSpec::deterministic(1e-8));
        CHECK(std::abs(mean_batch_sojourn(no_work) - p.alpha * no_work.batch.mean_k_over_k1()) <= 1e-5);
    }
}

TEST_CASE("sojourn grows with load")
{
    std::mt19937_64 g(23);
    for (int i = 0; i < 20; ++i) {
        auto base = testing::random_system(g, 0.5, 0.5);
        double prev = 0.0;
        for (int j = 1; j < 100; ++j) {
            auto p = base;
            p.lambda = base.lambda * 2.0 * j / 100.0;  // rho from 0.01 to 0.99
            double s = mean_batch_sojourn(p);
            CHECK(s > prev);
            prev = s;
        }
    }
}
