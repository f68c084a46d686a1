#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cpoll {

// One stream per replication (or per thread); never shared.
using Rng = std::mt19937_64;

Rng make_stream(std::uint64_t seed, std::uint64_t stream_index = 0);

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------
// Batch size K, supported on {1, 2, ...}
// ---------------------------------------------------------------------------

enum class BatchKind { deterministic, geometric, poisson_zt, negbinom_zt, binomial_zt, custom };

// Descriptor for a batch-size law. Named laws whose standard form puts mass
// on 0 are conditioned on K >= 1. When `target_mean` is set, the free
// parameter (p for geometric/binomial/negbinom, mu for Poisson) is solved
// for so that the truncated law has exactly that mean.
struct BatchSpec {
    BatchKind kind = BatchKind::deterministic;
    int k = 1;                 // deterministic
    double p = 0.5;            // geometric, binomial, negbinom (success probability)
    double mu = 1.0;           // Poisson rate before truncation
    int r = 1;                 // negbinom: number of successes
    int n = 1;                 // binomial: number of trials
    double target_mean = 0.0;  // 0 = use the raw parameter
    std::map<int, double> pmf; // custom

    static BatchSpec deterministic(int k);
    static BatchSpec geometric(double p);
    static BatchSpec geometric_with_mean(double mean);
    static BatchSpec poisson(double mu);
    static BatchSpec poisson_with_mean(double mean);
    static BatchSpec negbinom(int r, double p);
    static BatchSpec negbinom_with_mean(int r, double mean);
    static BatchSpec binomial(int n, double p);
    static BatchSpec binomial_with_mean(int n, double mean);
    static BatchSpec custom(std::map<int, double> pmf);
};

class BatchDist {
public:
    // K == 1.
    BatchDist() = default;

    BatchKind kind() const { return kind_; }

    // Resolved parameters (after any mean re-tuning).
    int k() const { return k_; }
    double p() const { return p_; }
    double mu() const { return mu_; }
    int r() const { return r_; }
    int n() const { return n_; }

    // pmf()[k] = P(K = k); pmf()[0] == 0. Infinite-support laws are cut
    // once the neglected tail no longer affects the first two factorial
    // moments at double precision, then renormalised.
    std::span<const double> pmf() const { return pmf_; }
    int max_support() const { return static_cast<int>(pmf_.size()) - 1; }

    double mean() const { return mean_; }                      // E[K]
    double factorial_moment2() const { return fact2_; }        // E[K(K-1)]
    double mean_k_over_k1() const { return mean_k_over_k1_; }  // E[K/(K+1)]
    double variance() const { return fact2_ + mean_ - mean_ * mean_; }

    // Probability generating function on [0, 1].
    double pgf(double x) const;

    int sample(Rng& rng) const;

    // Short label without commas, safe for CSV cells: "deterministic:k=5".
    std::string label() const;

private:
    friend BatchDist make_batch_dist(const BatchSpec& spec);
    void finish_from_pmf();

    BatchKind kind_ = BatchKind::deterministic;
    int k_ = 1;
    double p_ = 0.0;
    double mu_ = 0.0;
    int r_ = 0;
    int n_ = 0;
    std::vector<double> pmf_{0.0, 1.0};
    std::vector<double> cdf_{0.0, 1.0};
    double mean_ = 1.0;
    double fact2_ = 0.0;
    double mean_k_over_k1_ = 0.5;
};

BatchDist make_batch_dist(const BatchSpec& spec);

double pgf_eval(const BatchDist& d, double x);
int sample_batch(const BatchDist& d, Rng& rng);

// ---------------------------------------------------------------------------
// Service time B
// ---------------------------------------------------------------------------

enum class ServiceKind { deterministic, exponential, custom };

// custom is sampled from the gamma law with the given first two moments
// (deterministic when the variance is zero).
struct ServiceSpec {
    ServiceKind kind = ServiceKind::exponential;
    double value = 1.0;  // deterministic duration
    double rate = 1.0;   // exponential rate
    double mean = 1.0;   // custom
    double m2 = 2.0;     // custom second moment

    static ServiceSpec deterministic(double b);
    static ServiceSpec exponential(double rate);
    static ServiceSpec custom(double mean, double m2);
};

class ServiceDist {
public:
    // Exponential with unit mean.
    ServiceDist() = default;

    ServiceKind kind() const { return kind_; }
    double mean() const { return mean_; }           // E[B]
    double second_moment() const { return m2_; }    // E[B^2]
    // E[B^2] / (2 E[B]); zero for the degenerate B == 0.
    double residual_mean() const { return residual_; }

    double sample(Rng& rng) const;
    std::string label() const;

private:
    friend ServiceDist make_service_dist(const ServiceSpec& spec);

    ServiceKind kind_ = ServiceKind::exponential;
    double mean_ = 1.0;
    double m2_ = 2.0;
    double residual_ = 1.0;
    double rate_ = 1.0;
    double gamma_shape_ = 0.0;
    double gamma_scale_ = 0.0;
};

ServiceDist make_service_dist(const ServiceSpec& spec);
double sample_service(const ServiceDist& d, Rng& rng);

// ---------------------------------------------------------------------------

struct SystemParams {
    double lambda = 0.0;  // batch arrival rate
    double alpha = 1.0;   // time for one full tour of the circle
    BatchDist batch;
    ServiceDist service;

    double rho() const { return lambda * batch.mean() * service.mean(); }
    bool stable() const { return rho() < 1.0; }
    // Throws UnstableSystem naming rho.
    void require_stable() const;
};

SystemParams make_system(double lambda, double alpha, const BatchSpec& batch,
                         const ServiceSpec& service);

}  // namespace cpoll
