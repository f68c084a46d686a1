#include "cpoll/analytic.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cpoll/errors.hpp"

namespace cpoll {

namespace {

void require_distance(double x, const char* what)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError(fmt::format("{}: distance must lie in [0, 1], got {}", what, x));
}

// Shorthands shared by the closed forms.
struct Moments {
    double lambda;
    double alpha;
    double ek;    // E[K]
    double fk2;   // E[K(K-1)]
    double eb;    // E[B]
    double eb2;   // E[B^2]
    double rho;

    explicit Moments(const SystemParams& p)
        : lambda(p.lambda),
          alpha(p.alpha),
          ek(p.batch.mean()),
          fk2(p.batch.factorial_moment2()),
          eb(p.service.mean()),
          eb2(p.service.second_moment()),
          rho(p.rho())
    {
    }

    // E[B] E[K(K-1)] / E[K]
    double batch_work_term() const { return eb * fk2 / ek; }
};

}  // namespace

double expm1_ratio(double z)
{
    if (std::abs(z) < 1e-8)
        return 1.0 + z / 2.0 + z * z / 6.0;
    return std::expm1(z) / z;
}

double utilization(const SystemParams& p) { return p.rho(); }

double mean_waiting_customers(const SystemParams& p)
{
    p.require_stable();
    Moments m(p);
    return m.lambda * m.ek / (2.0 * (1.0 - m.rho)) *
           (m.alpha + m.lambda * m.ek * m.eb2 + m.batch_work_term());
}

double gen_wait_service(const SystemParams& p, double x)
{
    require_distance(x, "gen_wait_service");
    p.require_stable();
    return p.service.mean() * std::exp(p.rho() * x);
}

double gen_wait_travel(const SystemParams& p, double x)
{
    require_distance(x, "gen_wait_travel");
    double rho = p.rho();
    return p.alpha * x * expm1_ratio(rho * x);
}

double gen_wait_residual(const SystemParams& p, double x)
{
    require_distance(x, "gen_wait_residual");
    p.require_stable();
    return p.service.residual_mean() * std::exp(p.rho() * x);
}

AffineDensity density_f(const SystemParams& p)
{
    p.require_stable();
    Moments m(p);
    double lek = m.lambda * m.ek;
    // rho lambda E[K] E[B^2] / (2 E[B]) written without the E[B] division.
    double c0 = lek * lek * m.eb2 / 2.0;
    double c1 = (m.alpha * lek + m.rho * lek * lek * m.eb2 + m.rho * m.fk2 / m.ek) / (1.0 - m.rho);
    return {c0, c1};
}

double cum_density(const AffineDensity& d, double x)
{
    require_distance(x, "cum_density");
    return d.c0 * x + d.c1 * x - d.c1 * x * x / 2.0;
}

double integral_equation_residual(const SystemParams& p, const std::function<double(double)>& f,
                                  double x, const QuadratureOptions& opts)
{
    require_distance(x, "integral_equation_residual");
    Moments m(p);
    double lek = m.lambda * m.ek;
    double e = std::exp(m.rho * x);
    // (1/rho)(e^{rho x} - 1) written as x * expm1_ratio(rho x).
    double growth = x * expm1_ratio(m.rho * x);
    double convolution = 0.0;
    if (x > 0.0 && m.eb > 0.0) {
        convolution = integrate(
            [&](double z) { return m.eb * std::exp(m.rho * (x - z)) * f(z); }, 0.0, x, opts);
    }
    double rhs = lek * (m.alpha * growth + lek * m.eb2 / 2.0 * e + m.batch_work_term() * growth +
                        convolution);
    return f(1.0 - x) - rhs;
}

double conditional_batch_wait(const SystemParams& p, double x, int k)
{
    if (!(x > 0.0 && x <= 1.0))
        throw DomainError(fmt::format("conditional_batch_wait: distance must lie in (0, 1], got {}", x));
    if (k < 1)
        throw DomainError(fmt::format("conditional_batch_wait: batch size must be >= 1, got {}", k));
    p.require_stable();
    Moments m(p);
    double lek = m.lambda * m.ek;
    double one_minus = 1.0 - m.rho;
    double phi = expm1_ratio(m.rho * x);
    return m.alpha * x / one_minus + lek * m.eb2 / 2.0 + m.rho * lek * m.eb2 * x / one_minus +
           m.batch_work_term() * x / one_minus + (k - 1) * m.eb * phi -
           m.batch_work_term() * x * phi;
}

double pgf_integral(const SystemParams& p, const QuadratureOptions& opts)
{
    p.require_stable();
    double rho = p.rho();
    const BatchDist& batch = p.batch;
    return integrate([&](double x) { return std::exp(rho * x) * batch.pgf(x); }, 0.0, 1.0, opts);
}

double mean_batch_sojourn(const SystemParams& p, const QuadratureOptions& opts)
{
    p.require_stable();
    Moments m(p);
    double lek = m.lambda * m.ek;
    double one_minus = 1.0 - m.rho;
    double kk1 = p.batch.mean_k_over_k1();
    double integral = pgf_integral(p, opts);
    double phi = expm1_ratio(m.rho);
    double bw = m.batch_work_term();

    // The 1/rho and 1/lambda terms are folded into expm1_ratio(rho):
    //   E[B]E[K(K-1)]/(rho E[K]) (1 - e^rho) = -bw * phi
    //   (e^rho - 1)/lambda                    = E[K] E[B] * phi
    return m.eb + (m.alpha + m.rho * lek * m.eb2 + bw) / one_minus * kk1 + lek * m.eb2 / 2.0 +
           m.ek * m.eb * phi - m.eb * std::exp(m.rho) - bw * phi +
           (m.eb * m.rho + bw) * integral;
}

double unit_batch_sojourn(const SystemParams& p)
{
    if (p.batch.mean() != 1.0 || p.batch.factorial_moment2() != 0.0)
        throw WrongDistribution("unit-batch sojourn form requires K == 1");
    p.require_stable();
    Moments m(p);
    return m.eb + m.lambda * m.eb2 / (2.0 * (1.0 - m.rho)) + m.alpha / (2.0 * (1.0 - m.rho));
}

double light_traffic_sojourn(const SystemParams& p)
{
    return p.alpha * p.batch.mean_k_over_k1() + p.batch.mean() * p.service.mean();
}

AnalysisReport analyze(const SystemParams& p)
{
    p.require_stable();
    AnalysisReport r;
    r.rho = p.rho();
    r.mean_l = mean_waiting_customers(p);
    r.density = density_f(p);
    r.mean_sojourn_batch = mean_batch_sojourn(p);
    r.pgf_integral_value = pgf_integral(p);
    return r;
}

}  // namespace cpoll
