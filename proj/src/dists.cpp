#include "cpoll/dists.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <boost/math/tools/roots.hpp>

#include "cpoll/errors.hpp"

namespace cpoll {

Rng make_stream(std::uint64_t seed, std::uint64_t stream_index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_index),
                      static_cast<std::uint32_t>(stream_index >> 32)};
    return Rng(seq);
}

// ---------------------------------------------------------------------------
// BatchSpec factories
// ---------------------------------------------------------------------------

BatchSpec BatchSpec::deterministic(int k)
{
    BatchSpec s;
    s.kind = BatchKind::deterministic;
    s.k = k;
    return s;
}

BatchSpec BatchSpec::geometric(double p)
{
    BatchSpec s;
    s.kind = BatchKind::geometric;
    s.p = p;
    return s;
}

BatchSpec BatchSpec::geometric_with_mean(double mean)
{
    BatchSpec s = geometric(0.5);
    s.target_mean = mean;
    return s;
}

BatchSpec BatchSpec::poisson(double mu)
{
    BatchSpec s;
    s.kind = BatchKind::poisson_zt;
    s.mu = mu;
    return s;
}

BatchSpec BatchSpec::poisson_with_mean(double mean)
{
    BatchSpec s = poisson(1.0);
    s.target_mean = mean;
    return s;
}

BatchSpec BatchSpec::negbinom(int r, double p)
{
    BatchSpec s;
    s.kind = BatchKind::negbinom_zt;
    s.r = r;
    s.p = p;
    return s;
}

BatchSpec BatchSpec::negbinom_with_mean(int r, double mean)
{
    BatchSpec s = negbinom(r, 0.5);
    s.target_mean = mean;
    return s;
}

BatchSpec BatchSpec::binomial(int n, double p)
{
    BatchSpec s;
    s.kind = BatchKind::binomial_zt;
    s.n = n;
    s.p = p;
    return s;
}

BatchSpec BatchSpec::binomial_with_mean(int n, double mean)
{
    BatchSpec s = binomial(n, 0.5);
    s.target_mean = mean;
    return s;
}

BatchSpec BatchSpec::custom(std::map<int, double> pmf)
{
    BatchSpec s;
    s.kind = BatchKind::custom;
    s.pmf = std::move(pmf);
    return s;
}

// ---------------------------------------------------------------------------
// Zero-truncated moments and parameter re-tuning
// ---------------------------------------------------------------------------

namespace {

constexpr int max_materialized = 2'000'000;

// Mass at zero of the untruncated laws.
double poisson_p0(double mu) { return std::exp(-mu); }
double binomial_p0(int n, double p) { return std::pow(1.0 - p, n); }
double negbinom_p0(int r, double p) { return std::pow(p, r); }

double poisson_zt_mean(double mu) { return mu / -std::expm1(-mu); }

double binomial_zt_mean(int n, double p)
{
    return n * p / -std::expm1(n * std::log1p(-p));
}

// NB counts failures before the r-th success, so E = r(1-p)/p untruncated.
double negbinom_zt_mean(int r, double p)
{
    return r * (1.0 - p) / p / -std::expm1(r * std::log(p));
}

// Solves mean_of(x) == target for x in [lo, hi] where mean_of is monotone.
template <typename F>
double solve_monotone(F mean_of, double target, double lo, double hi)
{
    auto g = [&](double x) { return mean_of(x) - target; };
    double glo = g(lo);
    double ghi = g(hi);
    if (glo * ghi > 0.0)
        throw InvalidParameter(fmt::format("requested mean {} is not attainable", target));
    boost::math::tools::eps_tolerance<double> tol(50);
    auto [a, b] = boost::math::tools::bisect(g, lo, hi, tol);
    return 0.5 * (a + b);
}

void require_probability(double p, const char* what)
{
    if (!(p > 0.0 && p <= 1.0))
        throw InvalidParameter(fmt::format("{} must lie in (0, 1], got {}", what, p));
}

// Walks log-pmf terms from k = 1 until the neglected tail is irrelevant to
// the normalisation and to E[K], E[K(K-1)] at double precision.
template <typename LogPmf>
std::vector<double> materialize_tail(LogPmf log_pmf, double mode)
{
    std::vector<double> pmf{0.0};
    double total = 0.0;
    for (int k = 1;; ++k) {
        double v = std::exp(log_pmf(k));
        pmf.push_back(v);
        total += v;
        double kk = static_cast<double>(k);
        if (kk > mode && total > 0.0 && v * kk * kk < 1e-18 * total)
            break;
        if (k >= max_materialized)
            throw InvalidParameter("batch-size law has too heavy a tail to materialize");
    }
    return pmf;
}

}  // namespace

void BatchDist::finish_from_pmf()
{
    double total = 0.0;
    for (std::size_t k = 1; k < pmf_.size(); ++k)
        total += pmf_[k];
    if (!(total > 0.0))
        throw DegenerateDistribution("zero-truncation removes all probability mass");
    for (double& v : pmf_)
        v /= total;
    pmf_[0] = 0.0;
    while (pmf_.size() > 2 && pmf_.back() == 0.0)
        pmf_.pop_back();

    cdf_.assign(pmf_.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 1; k < pmf_.size(); ++k) {
        acc += pmf_[k];
        cdf_[k] = acc;
    }
    cdf_.back() = 1.0;

    double m = 0.0;
    double f2 = 0.0;
    double kk1 = 0.0;
    for (std::size_t k = 1; k < pmf_.size(); ++k) {
        double kd = static_cast<double>(k);
        m += kd * pmf_[k];
        f2 += kd * (kd - 1.0) * pmf_[k];
        kk1 += kd / (kd + 1.0) * pmf_[k];
    }
    mean_ = m;
    fact2_ = f2;
    mean_k_over_k1_ = kk1;
}

BatchDist make_batch_dist(const BatchSpec& spec)
{
    BatchDist d;
    d.kind_ = spec.kind;
    const bool tuned = spec.target_mean != 0.0;
    if (tuned && !(spec.target_mean >= 1.0))
        throw InvalidParameter(fmt::format("mean batch size must be >= 1, got {}", spec.target_mean));

    switch (spec.kind) {
    case BatchKind::deterministic: {
        if (spec.k < 0)
            throw InvalidParameter(fmt::format("batch size must be positive, got {}", spec.k));
        if (spec.k == 0)
            throw DegenerateDistribution("deterministic batch of size 0 has no mass on K >= 1");
        d.k_ = spec.k;
        d.pmf_.assign(static_cast<std::size_t>(spec.k) + 1, 0.0);
        d.pmf_[static_cast<std::size_t>(spec.k)] = 1.0;
        d.finish_from_pmf();
        double k = spec.k;
        d.mean_ = k;
        d.fact2_ = k * (k - 1.0);
        d.mean_k_over_k1_ = k / (k + 1.0);
        return d;
    }
    case BatchKind::geometric: {
        double p = tuned ? 1.0 / spec.target_mean : spec.p;
        require_probability(p, "geometric p");
        d.p_ = p;
        double q = 1.0 - p;
        if (q == 0.0) {
            d.pmf_ = {0.0, 1.0};
        } else {
            double lq = std::log(q);
            double lp = std::log(p);
            d.pmf_ = materialize_tail([&](int k) { return lp + (k - 1) * lq; }, 1.0 / p);
        }
        d.finish_from_pmf();
        d.mean_ = 1.0 / p;
        d.fact2_ = 2.0 * q / (p * p);
        // E[1/(K+1)] = (p/q^2) * (-log(1-q) - q)
        if (q > 1e-4) {
            d.mean_k_over_k1_ = 1.0 - p / (q * q) * (-std::log(p) - q);
        }
        return d;
    }
    case BatchKind::poisson_zt: {
        double mu = spec.mu;
        if (tuned) {
            if (spec.target_mean <= 1.0)
                throw InvalidParameter("zero-truncated Poisson needs a mean above 1");
            mu = solve_monotone(poisson_zt_mean, spec.target_mean, 1e-12, spec.target_mean + 1.0);
        }
        if (!(mu > 0.0))
            throw InvalidParameter(fmt::format("Poisson rate must be positive, got {}", mu));
        d.mu_ = mu;
        double lmu = std::log(mu);
        d.pmf_ = materialize_tail([&](int k) { return k * lmu - mu - std::lgamma(k + 1.0); }, mu);
        d.finish_from_pmf();
        double keep = 1.0 - poisson_p0(mu);
        d.mean_ = mu / keep;
        d.fact2_ = mu * mu / keep;
        return d;
    }
    case BatchKind::negbinom_zt: {
        if (spec.r < 1)
            throw InvalidParameter(fmt::format("negative binomial r must be >= 1, got {}", spec.r));
        double p = spec.p;
        if (tuned) {
            if (spec.target_mean <= 1.0)
                throw InvalidParameter("zero-truncated negative binomial needs a mean above 1");
            int r = spec.r;
            p = solve_monotone([r](double x) { return negbinom_zt_mean(r, x); }, spec.target_mean,
                               1e-9, 1.0 - 1e-12);
        }
        require_probability(p, "negative binomial p");
        if (p == 1.0)
            throw DegenerateDistribution("negative binomial with p = 1 has all mass on 0");
        d.r_ = spec.r;
        d.p_ = p;
        double r = spec.r;
        double q = 1.0 - p;
        double lp = std::log(p);
        double lq = std::log(q);
        double mode = std::max(1.0, r * q / p);
        d.pmf_ = materialize_tail(
            [&](int k) {
                return std::lgamma(k + r) - std::lgamma(r) - std::lgamma(k + 1.0) + r * lp + k * lq;
            },
            mode);
        d.finish_from_pmf();
        double keep = 1.0 - negbinom_p0(spec.r, p);
        d.mean_ = r * q / p / keep;
        d.fact2_ = r * (r + 1.0) * q * q / (p * p) / keep;
        return d;
    }
    case BatchKind::binomial_zt: {
        if (spec.n < 1)
            throw InvalidParameter(fmt::format("binomial n must be >= 1, got {}", spec.n));
        double p = spec.p;
        if (tuned) {
            if (spec.target_mean > spec.n)
                throw InvalidParameter(fmt::format("binomial({}) cannot have mean {}", spec.n,
                                                   spec.target_mean));
            int n = spec.n;
            p = spec.target_mean == n
                    ? 1.0
                    : solve_monotone([n](double x) { return binomial_zt_mean(n, x); },
                                     spec.target_mean, 1e-12, 1.0);
        }
        require_probability(p, "binomial p");
        d.n_ = spec.n;
        d.p_ = p;
        double n = spec.n;
        d.pmf_.assign(static_cast<std::size_t>(spec.n) + 1, 0.0);
        for (int k = 1; k <= spec.n; ++k) {
            double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
            double lpmf = lc + k * std::log(p) + (p < 1.0 ? (n - k) * std::log1p(-p) : 0.0);
            if (p == 1.0 && k != spec.n)
                lpmf = -INFINITY;
            d.pmf_[static_cast<std::size_t>(k)] = std::exp(lpmf);
        }
        d.finish_from_pmf();
        double keep = 1.0 - binomial_p0(spec.n, p);
        d.mean_ = n * p / keep;
        d.fact2_ = n * (n - 1.0) * p * p / keep;
        return d;
    }
    case BatchKind::custom: {
        if (spec.pmf.empty())
            throw InvalidParameter("custom batch pmf is empty");
        double total = 0.0;
        int kmax = 0;
        for (auto [k, v] : spec.pmf) {
            if (k < 0 || !(v >= 0.0) || !std::isfinite(v))
                throw InvalidParameter(fmt::format("invalid pmf entry {}: {}", k, v));
            total += v;
            kmax = std::max(kmax, k);
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw InvalidParameter(fmt::format("custom pmf sums to {}, not 1", total));
        d.pmf_.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
        for (auto [k, v] : spec.pmf)
            d.pmf_[static_cast<std::size_t>(k)] = v;
        d.finish_from_pmf();
        return d;
    }
    }
    throw InvalidParameter("unknown batch kind");
}

double BatchDist::pgf(double x) const
{
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError(fmt::format("pgf argument must lie in [0, 1], got {}", x));
    switch (kind_) {
    case BatchKind::deterministic:
        return std::pow(x, k_);
    case BatchKind::geometric:
        return p_ * x / (1.0 - (1.0 - p_) * x);
    case BatchKind::poisson_zt:
        return std::expm1(mu_ * x) / std::expm1(mu_);
    case BatchKind::binomial_zt: {
        double q = 1.0 - p_;
        double qn = std::pow(q, n_);
        return (std::pow(q + p_ * x, n_) - qn) / (1.0 - qn);
    }
    case BatchKind::negbinom_zt: {
        double q = 1.0 - p_;
        double pr = std::pow(p_, r_);
        return (std::pow(p_ / (1.0 - q * x), r_) - pr) / (1.0 - pr);
    }
    case BatchKind::custom:
        break;
    }
    // Horner from the top of the support.
    double acc = 0.0;
    for (std::size_t k = pmf_.size(); k-- > 0;)
        acc = acc * x + pmf_[k];
    return acc;
}

int BatchDist::sample(Rng& rng) const
{
    if (kind_ == BatchKind::deterministic)
        return k_;
    double u = uniform01(rng);
    auto it = std::upper_bound(cdf_.begin() + 1, cdf_.end(), u);
    if (it == cdf_.end())
        --it;
    return static_cast<int>(it - cdf_.begin());
}

std::string BatchDist::label() const
{
    switch (kind_) {
    case BatchKind::deterministic:
        return fmt::format("deterministic:k={}", k_);
    case BatchKind::geometric:
        return fmt::format("geometric:mean={:.6g}", mean_);
    case BatchKind::poisson_zt:
        return fmt::format("poisson:mean={:.6g}", mean_);
    case BatchKind::negbinom_zt:
        return fmt::format("negbinom:r={}:mean={:.6g}", r_, mean_);
    case BatchKind::binomial_zt:
        return fmt::format("binomial:n={}:mean={:.6g}", n_, mean_);
    case BatchKind::custom:
        return fmt::format("custom:mean={:.6g}", mean_);
    }
    return "unknown";
}

double pgf_eval(const BatchDist& d, double x) { return d.pgf(x); }

int sample_batch(const BatchDist& d, Rng& rng) { return d.sample(rng); }

// ---------------------------------------------------------------------------
// Service
// ---------------------------------------------------------------------------

ServiceSpec ServiceSpec::deterministic(double b)
{
    ServiceSpec s;
    s.kind = ServiceKind::deterministic;
    s.value = b;
    return s;
}

ServiceSpec ServiceSpec::exponential(double rate)
{
    ServiceSpec s;
    s.kind = ServiceKind::exponential;
    s.rate = rate;
    return s;
}

ServiceSpec ServiceSpec::custom(double mean, double m2)
{
    ServiceSpec s;
    s.kind = ServiceKind::custom;
    s.mean = mean;
    s.m2 = m2;
    return s;
}

ServiceDist make_service_dist(const ServiceSpec& spec)
{
    ServiceDist d;
    d.kind_ = spec.kind;
    switch (spec.kind) {
    case ServiceKind::deterministic:
        // B == 0 is allowed: analytic limits accept it, simulators reject it.
        if (!(spec.value >= 0.0) || !std::isfinite(spec.value))
            throw InvalidParameter(fmt::format("service time must be >= 0, got {}", spec.value));
        d.mean_ = spec.value;
        d.m2_ = spec.value * spec.value;
        break;
    case ServiceKind::exponential:
        if (!(spec.rate > 0.0) || !std::isfinite(spec.rate))
            throw InvalidParameter(fmt::format("service rate must be positive, got {}", spec.rate));
        d.rate_ = spec.rate;
        d.mean_ = 1.0 / spec.rate;
        d.m2_ = 2.0 / (spec.rate * spec.rate);
        break;
    case ServiceKind::custom: {
        if (!(spec.mean > 0.0) || !std::isfinite(spec.mean))
            throw InvalidParameter(fmt::format("service mean must be positive, got {}", spec.mean));
        if (!(spec.m2 >= spec.mean * spec.mean) || !std::isfinite(spec.m2))
            throw InvalidParameter(fmt::format(
                "second moment {} below squared mean {} (Jensen)", spec.m2, spec.mean * spec.mean));
        d.mean_ = spec.mean;
        d.m2_ = spec.m2;
        double var = spec.m2 - spec.mean * spec.mean;
        if (var > 0.0) {
            d.gamma_shape_ = spec.mean * spec.mean / var;
            d.gamma_scale_ = var / spec.mean;
        }
        break;
    }
    }
    d.residual_ = d.mean_ > 0.0 ? d.m2_ / (2.0 * d.mean_) : 0.0;
    return d;
}

double ServiceDist::sample(Rng& rng) const
{
    switch (kind_) {
    case ServiceKind::deterministic:
        return mean_;
    case ServiceKind::exponential:
        return -std::log1p(-uniform01(rng)) / rate_;
    case ServiceKind::custom:
        if (gamma_shape_ == 0.0)
            return mean_;
        return std::gamma_distribution<double>(gamma_shape_, gamma_scale_)(rng);
    }
    return mean_;
}

std::string ServiceDist::label() const
{
    switch (kind_) {
    case ServiceKind::deterministic:
        return fmt::format("deterministic:b={:.6g}", mean_);
    case ServiceKind::exponential:
        return fmt::format("exponential:mean={:.6g}", mean_);
    case ServiceKind::custom:
        return fmt::format("custom:mean={:.6g}:m2={:.6g}", mean_, m2_);
    }
    return "unknown";
}

double sample_service(const ServiceDist& d, Rng& rng) { return d.sample(rng); }

// ---------------------------------------------------------------------------

void SystemParams::require_stable() const
{
    double r = rho();
    if (!(r < 1.0))
        throw UnstableSystem(fmt::format("system is unstable: rho = {:.9g} >= 1", r));
}

SystemParams make_system(double lambda, double alpha, const BatchSpec& batch,
                         const ServiceSpec& service)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InvalidParameter(fmt::format("arrival rate must be >= 0, got {}", lambda));
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw InvalidParameter(fmt::format("tour time alpha must be >= 0, got {}", alpha));
    return SystemParams{lambda, alpha, make_batch_dist(batch), make_service_dist(service)};
}

}  // namespace cpoll
