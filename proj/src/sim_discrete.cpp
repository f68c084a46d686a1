#include "cpoll/sim_discrete.hpp"

#include <cassert>
#include <cmath>
#include <deque>
#include <unordered_map>

#include <fmt/format.h>

#include "cpoll/analytic.hpp"
#include "cpoll/errors.hpp"
#include "cpoll/format.hpp"

namespace cpoll {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Waiting {
    std::uint64_t batch_id;
    double arrival_time;
};

enum class ServerPhase { switching, serving, idle };

double exponential(Rng& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }

}  // namespace

ReplicationStats run_discrete_replication(const SystemParams& p, const DiscreteConfig& d,
                                          const SimConfig& cfg, int replication,
                                          DiscreteTrace* trace)
{
    const int n = d.n_queues;
    const double hop = d.total_switchover.value_or(p.alpha) / n;
    const double warmup = effective_warmup(cfg, p);
    const double horizon = cfg.horizon;

    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(replication));

    std::vector<std::deque<Waiting>> queues(static_cast<std::size_t>(n));
    std::vector<std::uint64_t> arrived(static_cast<std::size_t>(n), 0);
    std::vector<std::uint64_t> served(static_cast<std::size_t>(n), 0);
    std::unordered_map<std::uint64_t, PendingBatch> batches;
    std::uint64_t next_batch_id = 0;
    std::size_t waiting = 0;

    double clock = 0.0;
    double next_arrival = exponential(rng, p.lambda);
    int at = 0;  // queue the server is at (serving) or heading to (switching)
    ServerPhase phase = ServerPhase::switching;
    double phase_end = hop;
    std::optional<Waiting> in_service;

    double area_l = 0.0;
    double sojourn_sum = 0.0;
    std::uint64_t sojourn_n = 0;
    double wait_sum = 0.0;
    std::uint64_t wait_n = 0;
    std::uint64_t outstanding = 0;
    std::uint64_t events = 0;

    auto in_window = [&](double t) { return t >= warmup && t < horizon; };

    auto start_service = [&](int q) {
        auto& queue = queues[static_cast<std::size_t>(q)];
        Waiting c = queue.front();
        queue.pop_front();
        --waiting;
        if (in_window(c.arrival_time)) {
            wait_sum += clock - c.arrival_time;
            ++wait_n;
        }
        in_service = c;
        at = q;
        phase = ServerPhase::serving;
        phase_end = clock + p.service.sample(rng);
    };

    // Called when the server is at queue `at` with that queue empty.
    auto leave = [&]() {
        if (hop > 0.0) {
            at = (at + 1) % n;
            phase = ServerPhase::switching;
            phase_end = clock + hop;
            return;
        }
        // Zero switch-over: hop instantly to the next non-empty queue.
        for (int i = 1; i <= n; ++i) {
            int q = (at + i) % n;
            if (!queues[static_cast<std::size_t>(q)].empty()) {
                start_service(q);
                return;
            }
        }
        phase = ServerPhase::idle;
        phase_end = inf;
    };

    while (clock < horizon || outstanding > 0) {
        double t_next = std::min(next_arrival, phase_end);
        double lo = std::max(clock, warmup);
        double hi = std::min(t_next, horizon);
        if (hi > lo)
            area_l += static_cast<double>(waiting) * (hi - lo);
        ++events;

        if (next_arrival <= phase_end) {
            clock = next_arrival;
            int k = p.batch.sample(rng);
            std::uint64_t id = next_batch_id++;
            batches.emplace(id, PendingBatch{k, clock});
            for (int i = 0; i < k; ++i) {
                int q = std::min(static_cast<int>(uniform01(rng) * n), n - 1);
                queues[static_cast<std::size_t>(q)].push_back({id, clock});
                ++arrived[static_cast<std::size_t>(q)];
                ++waiting;
            }
            if (in_window(clock))
                ++outstanding;
            next_arrival = clock + exponential(rng, p.lambda);
            if (phase == ServerPhase::idle) {
                at = (at + n - 1) % n;
                leave();
            }
            continue;
        }

        clock = phase_end;
        if (phase == ServerPhase::serving) {
            Waiting c = *in_service;
            in_service.reset();
            ++served[static_cast<std::size_t>(at)];
            auto it = batches.find(c.batch_id);
            assert(it != batches.end());
            if (--it->second.remaining == 0) {
                if (in_window(it->second.arrival_time)) {
                    sojourn_sum += clock - it->second.arrival_time;
                    ++sojourn_n;
                    --outstanding;
                }
                batches.erase(it);
            }
            if (!queues[static_cast<std::size_t>(at)].empty())
                start_service(at);
            else
                leave();
        } else {
            // Switch-over into queue `at` completed.
            if (!queues[static_cast<std::size_t>(at)].empty())
                start_service(at);
            else
                leave();
        }
    }

    if (trace) {
        trace->arrived = arrived;
        trace->served = served;
        trace->content.assign(static_cast<std::size_t>(n), 0);
        for (int q = 0; q < n; ++q)
            trace->content[static_cast<std::size_t>(q)] = queues[static_cast<std::size_t>(q)].size();
        if (in_service)
            ++trace->content[static_cast<std::size_t>(at)];
    }

    ReplicationStats r;
    r.mean_l = time_average(area_l, horizon - warmup);
    r.mean_batch_sojourn = sojourn_n > 0 ? sojourn_sum / static_cast<double>(sojourn_n) : std::nan("");
    r.mean_wait = wait_n > 0 ? wait_sum / static_cast<double>(wait_n) : std::nan("");
    r.events = events;
    r.batches_recorded = sojourn_n;
    r.customers_recorded = wait_n;
    return r;
}

SimResult run_discrete(const SystemParams& p, const DiscreteConfig& d, const SimConfig& cfg)
{
    p.require_stable();
    if (d.n_queues < 1)
        throw InvalidConfig(fmt::format("number of queues must be >= 1, got {}", d.n_queues));
    double total = d.total_switchover.value_or(p.alpha);
    if (!(total >= 0.0) || !std::isfinite(total))
        throw InvalidConfig(fmt::format("total switch-over time must be >= 0, got {}", total));
    if (!(p.lambda > 0.0))
        throw SimDegenerate("simulation needs a positive arrival rate");
    if (!(p.service.mean() > 0.0))
        throw SimDegenerate("simulation needs a positive mean service time");
    validate(cfg, p);

    std::vector<ReplicationStats> reps(static_cast<std::size_t>(cfg.replications));
    parallel_for(cfg.replications, cfg.threads, [&](int i) {
        reps[static_cast<std::size_t>(i)] = run_discrete_replication(p, d, cfg, i);
    });
    return summarize(std::move(reps), {}, cfg.seed, cfg.horizon, effective_warmup(cfg, p));
}

std::vector<ConvergenceRow> convergence_table(const SystemParams& p, std::span<const int> n_list,
                                              const SimConfig& cfg)
{
    double continuous = mean_batch_sojourn(p);
    std::vector<ConvergenceRow> rows;
    for (int n : n_list) {
        DiscreteConfig d;
        d.n_queues = n;
        SimResult r = run_discrete(p, d, cfg);
        ConvergenceRow row;
        row.n_queues = n;
        row.rho = p.rho();
        row.batch_dist = p.batch.label();
        row.discrete = r.mean_batch_sojourn;
        row.continuous = continuous;
        row.rel_gap = (r.mean_batch_sojourn.mean - continuous) / continuous;
        rows.push_back(row);
    }
    ConvergenceRow limit;
    limit.rho = p.rho();
    limit.batch_dist = p.batch.label();
    limit.discrete = {continuous, 0.0, 0};
    limit.continuous = continuous;
    rows.push_back(limit);
    return rows;
}

std::string convergence_csv(std::span<const ConvergenceRow> rows)
{
    std::string out = "N,rho,batch_dist,discrete_mean,discrete_hw,continuous_mean,rel_gap\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{}\n",
                           r.n_queues ? std::to_string(*r.n_queues) : std::string("inf"),
                           fmt_real(r.rho), r.batch_dist, fmt_real(r.discrete.mean),
                           fmt_real(r.discrete.halfwidth_95), fmt_real(r.continuous),
                           fmt_real(r.rel_gap));
    }
    return out;
}

}  // namespace cpoll
