#include "cpoll/sim_core.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "cpoll/errors.hpp"

namespace cpoll {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double wrap01(double x)
{
    x -= std::floor(x);
    return x >= 1.0 ? 0.0 : x;
}

double exponential(Rng& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }

// Server position after traveling for `dt`, never overshooting the next
// waiting customer.
double position_after(const WorldState& s, const SystemParams& p, double dt)
{
    double travel = dt / p.alpha;
    if (!s.customers.empty())
        travel = std::min(travel, s.distance_to(s.nearest_ahead()->first));
    return wrap01(s.server_pos + travel);
}

}  // namespace

double effective_warmup(const SimConfig& cfg, const SystemParams& p)
{
    if (cfg.warmup)
        return *cfg.warmup;
    double rho = p.rho();
    double cycles = rho < 1.0 ? 50.0 * p.alpha / (1.0 - rho) : inf;
    return std::max(0.1 * cfg.horizon, cycles);
}

void validate(const SimConfig& cfg, const SystemParams& p)
{
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
        throw InvalidConfig(fmt::format("horizon must be positive, got {}", cfg.horizon));
    if (cfg.replications < 1)
        throw InvalidConfig(fmt::format("replications must be >= 1, got {}", cfg.replications));
    if (!(cfg.pasta_rate >= 0.0) || !std::isfinite(cfg.pasta_rate))
        throw InvalidConfig(fmt::format("pasta_rate must be >= 0, got {}", cfg.pasta_rate));
    double prev = 0.0;
    for (double x : cfg.profile_grid) {
        if (!(x > prev && x <= 1.0))
            throw InvalidConfig("profile_grid must be increasing distances in (0, 1]");
        prev = x;
    }
    if (cfg.warmup && !(*cfg.warmup >= 0.0))
        throw InvalidConfig(fmt::format("warmup must be >= 0, got {}", *cfg.warmup));
    if (p.stable() && !(effective_warmup(cfg, p) < cfg.horizon))
        throw InvalidConfig(fmt::format("warmup {} must be shorter than the horizon {}",
                                        effective_warmup(cfg, p), cfg.horizon));
}

double WorldState::distance_to(double position) const
{
    double d = position - server_pos;
    return d < 0.0 ? d + 1.0 : d;
}

std::multimap<double, Customer>::const_iterator WorldState::nearest_ahead() const
{
    auto it = customers.lower_bound(server_pos);
    return it == customers.end() ? customers.begin() : it;
}

WorldState initial_state(const SystemParams& p, Rng& rng)
{
    WorldState s;
    s.next_arrival = p.lambda > 0.0 ? exponential(rng, p.lambda) : inf;
    return s;
}

double next_event_time(const WorldState& s, const SystemParams& p)
{
    double other = inf;
    if (s.phase == Phase::serving)
        other = s.service_end;
    else if (!s.customers.empty())
        other = s.clock + p.alpha * s.distance_to(s.nearest_ahead()->first);
    return std::min(s.next_arrival, other);
}

StepObservations step(WorldState& s, const SystemParams& p, Rng& rng)
{
    StepObservations obs;
    double other = inf;
    if (s.phase == Phase::serving)
        other = s.service_end;
    else if (!s.customers.empty())
        other = s.clock + p.alpha * s.distance_to(s.nearest_ahead()->first);

    if (s.next_arrival <= other) {
        double t = s.next_arrival;
        if (s.phase == Phase::traveling)
            s.server_pos = position_after(s, p, t - s.clock);
        s.clock = t;
        obs.kind = EventKind::arrival;
        obs.time = t;

        int k = p.batch.sample(rng);
        std::uint64_t id = s.next_batch_id++;
        s.batches.emplace(id, PendingBatch{k, t});
        obs.arrival_distances.reserve(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            double pos = uniform01(rng);
            double d = s.distance_to(pos);
            s.customers.emplace(pos, Customer{pos, id, t, d});
            obs.arrival_distances.push_back(d);
        }
        s.arrived += static_cast<std::uint64_t>(k);
        s.next_arrival = t + exponential(rng, p.lambda);
        return obs;
    }

    if (s.phase == Phase::traveling) {
        auto it = s.nearest_ahead();
        Customer c = it->second;
        s.customers.erase(it);
        s.clock = other;
        s.server_pos = c.position;
        s.phase = Phase::serving;
        s.service_end = other + p.service.sample(rng);
        s.in_service = c;
        obs.kind = EventKind::reach;
        obs.time = other;
        obs.started = c;
        obs.wait = other - c.arrival_time;
        return obs;
    }

    s.clock = s.service_end;
    s.phase = Phase::traveling;
    obs.kind = EventKind::completion;
    obs.time = s.clock;
    Customer c = *s.in_service;
    s.in_service.reset();
    ++s.completed;
    auto bit = s.batches.find(c.batch_id);
    assert(bit != s.batches.end());
    if (--bit->second.remaining == 0) {
        obs.batch_done = BatchDone{c.batch_id, bit->second.arrival_time,
                                   s.clock - bit->second.arrival_time};
        s.batches.erase(bit);
    }
    return obs;
}

// ---------------------------------------------------------------------------

std::size_t SimResult::grid_index(double x) const
{
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - x) < 1e-9)
            return i;
    throw MissingGridPoint(fmt::format("distance {} is not on the profile grid", x));
}

namespace {

Estimate estimate_of(const std::vector<double>& values)
{
    std::vector<double> finite;
    for (double v : values)
        if (std::isfinite(v))
            finite.push_back(v);
    if (finite.empty())
        return {std::nan(""), std::nan(""), 0};
    if (finite.size() == 1)
        return {finite.front(), 0.0, 1};
    return replication_ci(finite);
}

}  // namespace

SimResult summarize(std::vector<ReplicationStats> reps, std::vector<double> grid,
                    std::uint64_t seed, double horizon, double warmup)
{
    SimResult r;
    r.seed = seed;
    r.horizon = horizon;
    r.warmup = warmup;
    r.grid = std::move(grid);

    auto column = [&](auto get) {
        std::vector<double> v;
        v.reserve(reps.size());
        for (const auto& rep : reps)
            v.push_back(get(rep));
        return estimate_of(v);
    };
    r.mean_l = column([](const ReplicationStats& s) { return s.mean_l; });
    r.mean_batch_sojourn = column([](const ReplicationStats& s) { return s.mean_batch_sojourn; });
    r.mean_wait = column([](const ReplicationStats& s) { return s.mean_wait; });
    for (std::size_t j = 0; j < r.grid.size(); ++j) {
        r.l_profile.push_back({r.grid[j], column([j](const ReplicationStats& s) {
                                   return j < s.l_profile.size() ? s.l_profile[j] : std::nan("");
                               })});
        r.mean_wait_within.push_back(
            {r.grid[j], column([j](const ReplicationStats& s) {
                 return j < s.mean_wait_within.size() ? s.mean_wait_within[j] : std::nan("");
             })});
    }
    for (const auto& rep : reps) {
        r.events += rep.events;
        r.batches_recorded += rep.batches_recorded;
        r.customers_recorded += rep.customers_recorded;
        r.inspections += rep.inspections;
    }
    r.replications = std::move(reps);
    return r;
}

void parallel_for(int count, unsigned threads, const std::function<void(int)>& fn)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
    if (threads <= 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < count && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true))
                        failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
}

ReplicationStats run_continuous_replication(const SystemParams& p, const SimConfig& cfg,
                                            int replication)
{
    const double warmup = effective_warmup(cfg, p);
    const double horizon = cfg.horizon;
    const std::vector<double>& grid = cfg.profile_grid;
    const std::size_t g = grid.size();

    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(replication));
    // Inspections draw from their own stream so the system path is the same
    // with or without profiling.
    Rng inspect_rng = make_stream(cfg.seed ^ 0x9e3779b97f4a7c15ULL,
                                  static_cast<std::uint64_t>(replication));
    WorldState s = initial_state(p, rng);

    double area_l = 0.0;
    double sojourn_sum = 0.0;
    std::uint64_t sojourn_n = 0;
    double wait_sum = 0.0;
    std::uint64_t wait_n = 0;
    std::uint64_t outstanding = 0;
    std::vector<double> profile_sum(g, 0.0);
    std::vector<std::uint64_t> bin_counts(g + 1, 0);
    std::vector<double> wait_bin_sum(g + 1, 0.0);
    std::vector<std::uint64_t> wait_bin_n(g + 1, 0);
    std::uint64_t inspections = 0;
    std::uint64_t events = 0;

    const bool profiling = cfg.pasta_rate > 0.0 && g > 0;
    double next_inspection = profiling ? warmup + exponential(inspect_rng, cfg.pasta_rate) : inf;

    auto in_window = [&](double t) { return t >= warmup && t < horizon; };
    auto bin_of = [&](double d) {
        return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), d) -
                                        grid.begin());
    };

    while (s.clock < horizon || outstanding > 0) {
        double t_next = next_event_time(s, p);

        while (next_inspection < t_next && next_inspection < horizon) {
            double pos = s.phase == Phase::traveling
                             ? position_after(s, p, next_inspection - s.clock)
                             : s.server_pos;
            std::fill(bin_counts.begin(), bin_counts.end(), 0);
            for (const auto& [cpos, c] : s.customers) {
                double d = cpos - pos;
                if (d < 0.0)
                    d += 1.0;
                ++bin_counts[bin_of(d)];
            }
            std::uint64_t cum = 0;
            for (std::size_t j = 0; j < g; ++j) {
                cum += bin_counts[j];
                profile_sum[j] += static_cast<double>(cum);
            }
            ++inspections;
            next_inspection += exponential(inspect_rng, cfg.pasta_rate);
        }

        double lo = std::max(s.clock, warmup);
        double hi = std::min(t_next, horizon);
        if (hi > lo)
            area_l += static_cast<double>(s.waiting()) * (hi - lo);

        StepObservations obs = step(s, p, rng);
        ++events;
        assert(s.arrived - s.completed == s.waiting() + (s.in_service ? 1 : 0));

        switch (obs.kind) {
        case EventKind::arrival:
            if (in_window(obs.time))
                ++outstanding;
            break;
        case EventKind::reach:
            if (in_window(obs.started->arrival_time)) {
                wait_sum += obs.wait;
                ++wait_n;
                std::size_t b = bin_of(obs.started->arrival_distance);
                wait_bin_sum[b] += obs.wait;
                ++wait_bin_n[b];
            }
            break;
        case EventKind::completion:
            if (obs.batch_done && in_window(obs.batch_done->arrival_time)) {
                sojourn_sum += obs.batch_done->sojourn;
                ++sojourn_n;
                --outstanding;
            }
            break;
        }
    }

    ReplicationStats r;
    r.mean_l = time_average(area_l, horizon - warmup);
    r.mean_batch_sojourn = sojourn_n > 0 ? sojourn_sum / static_cast<double>(sojourn_n) : std::nan("");
    r.mean_wait = wait_n > 0 ? wait_sum / static_cast<double>(wait_n) : std::nan("");
    r.l_profile.resize(g);
    r.mean_wait_within.resize(g);
    double ws = 0.0;
    std::uint64_t wn = 0;
    for (std::size_t j = 0; j < g; ++j) {
        r.l_profile[j] = inspections > 0 ? profile_sum[j] / static_cast<double>(inspections)
                                         : std::nan("");
        ws += wait_bin_sum[j];
        wn += wait_bin_n[j];
        r.mean_wait_within[j] = wn > 0 ? ws / static_cast<double>(wn) : std::nan("");
    }
    r.events = events;
    r.batches_recorded = sojourn_n;
    r.customers_recorded = wait_n;
    r.inspections = inspections;
    return r;
}

SimResult run_continuous(const SystemParams& p, const SimConfig& cfg)
{
    p.require_stable();
    if (!(p.lambda > 0.0))
        throw SimDegenerate("simulation needs a positive arrival rate");
    if (!(p.service.mean() > 0.0))
        throw SimDegenerate("simulation needs a positive mean service time");
    if (!(p.alpha > 0.0))
        throw InvalidConfig("continuous simulation needs a positive tour time alpha");
    validate(cfg, p);

    std::vector<ReplicationStats> reps(static_cast<std::size_t>(cfg.replications));
    parallel_for(cfg.replications, cfg.threads,
                 [&](int i) { reps[static_cast<std::size_t>(i)] = run_continuous_replication(p, cfg, i); });
    return summarize(std::move(reps), cfg.profile_grid, cfg.seed, cfg.horizon,
                     effective_warmup(cfg, p));
}

// ---------------------------------------------------------------------------

bool LittleCheck::agree() const
{
    return std::abs(lhs.mean - rhs.mean) <= lhs.halfwidth_95 + rhs.halfwidth_95;
}

LittleCheck little_interval_check(const SimResult& result, const SystemParams& p, double x)
{
    if (!(x > 0.0 && x <= 1.0))
        throw DomainError(fmt::format("little_interval_check: x must lie in (0, 1], got {}", x));
    std::size_t wait_idx = result.grid_index(x);
    std::optional<std::size_t> near_idx;
    if (1.0 - x > 1e-9)
        near_idx = result.grid_index(1.0 - x);

    double scale = p.lambda * p.batch.mean() * x;
    std::vector<double> lhs;
    std::vector<double> rhs;
    std::vector<double> diff;
    for (const auto& rep : result.replications) {
        double l_near = near_idx ? rep.l_profile[*near_idx] : 0.0;
        double a = rep.mean_l - l_near;
        double b = scale * rep.mean_wait_within[wait_idx];
        lhs.push_back(a);
        rhs.push_back(b);
        diff.push_back(a - b);
    }
    return {estimate_of(lhs), estimate_of(rhs), estimate_of(diff)};
}

}  // namespace cpoll
