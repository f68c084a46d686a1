#pragma once

#include <functional>

#include "cpoll/dists.hpp"
#include "cpoll/quadrature.hpp"

namespace cpoll {

// Mean spatial density of waiting customers by distance x ahead of the
// server: c0 + c1 (1 - x) customers per unit distance.
struct AffineDensity {
    double c0 = 0.0;
    double c1 = 0.0;

    double value(double x) const { return c0 + c1 * (1.0 - x); }
    double operator()(double x) const { return value(x); }
    double second_derivative() const { return 0.0; }
};

struct AnalysisReport {
    double rho = 0.0;
    double mean_l = 0.0;
    AffineDensity density;
    double mean_sojourn_batch = 0.0;
    double pgf_integral_value = 0.0;
};

// (e^z - 1) / z, continuous at 0.
double expm1_ratio(double z);

// rho = lambda E[K] E[B]. Never throws; steady-state operations check it.
double utilization(const SystemParams& p);

// Mean number of waiting customers, excluding the one in service.
double mean_waiting_customers(const SystemParams& p);

// Mean waiting time generated by one service at distance x ahead of a
// tagged customer: E[B] exp(rho x).
double gen_wait_service(const SystemParams& p, double x);

// Mean waiting time generated by the server travelling distance x:
// (alpha / rho)(exp(rho x) - 1), tending to alpha x as rho -> 0.
double gen_wait_travel(const SystemParams& p, double x);

// As gen_wait_service for the residual of an ongoing service.
double gen_wait_residual(const SystemParams& p, double x);

AffineDensity density_f(const SystemParams& p);

// Mean number of waiting customers within distance x: the antiderivative
// of the density from 0.
double cum_density(const AffineDensity& d, double x);

// Residual of the integral equation that the density satisfies, for an
// arbitrary candidate density f, at x in [0, 1]. Zero for density_f(p).
double integral_equation_residual(const SystemParams& p, const std::function<double(double)>& f,
                                  double x, const QuadratureOptions& opts = {});

// Mean waiting time of the last customer of a batch of size k whose
// furthest customer sits at distance x from the server.
double conditional_batch_wait(const SystemParams& p, double x, int k);

// Integral over [0, 1] of exp(rho x) K~(x).
double pgf_integral(const SystemParams& p, const QuadratureOptions& opts = {});

// Mean batch sojourn time: arrival of a batch until its last customer
// completes service.
double mean_batch_sojourn(const SystemParams& p, const QuadratureOptions& opts = {});

// Closed form valid for unit batches only (throws WrongDistribution otherwise).
double unit_batch_sojourn(const SystemParams& p);

// lambda -> 0 limit: travel to the furthest customer plus the batch's work.
double light_traffic_sojourn(const SystemParams& p);

AnalysisReport analyze(const SystemParams& p);

}  // namespace cpoll
