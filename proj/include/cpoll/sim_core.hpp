#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "cpoll/dists.hpp"
#include "cpoll/stats.hpp"

namespace cpoll {

struct SimConfig {
    double horizon = 1e5;
    // Unset: max(10% of horizon, 50 mean cycle times alpha / (1 - rho)).
    std::optional<double> warmup;
    std::uint64_t seed = 1;
    int replications = 10;
    double pasta_rate = 1.0;           // inspections per time unit for the L(x) profile
    std::vector<double> profile_grid;  // distances in (0, 1], increasing
    unsigned threads = 0;              // 0: one per hardware thread
};

double effective_warmup(const SimConfig& cfg, const SystemParams& p);

// Throws InvalidConfig.
void validate(const SimConfig& cfg, const SystemParams& p);

// ---------------------------------------------------------------------------
// Continuous system state, exposed so the event loop can be unit tested.
// ---------------------------------------------------------------------------

struct Customer {
    double position = 0.0;
    std::uint64_t batch_id = 0;
    double arrival_time = 0.0;
    double arrival_distance = 0.0;  // distance ahead of the server on arrival
};

struct PendingBatch {
    int remaining = 0;
    double arrival_time = 0.0;
};

enum class Phase { traveling, serving };

struct WorldState {
    double clock = 0.0;
    double server_pos = 0.0;  // [0, 1); the server moves towards larger positions
    Phase phase = Phase::traveling;
    double service_end = 0.0;            // valid while serving
    std::optional<Customer> in_service;  // valid while serving
    // Waiting customers keyed by position; equal keys keep insertion order.
    std::multimap<double, Customer> customers;
    std::unordered_map<std::uint64_t, PendingBatch> batches;
    double next_arrival = std::numeric_limits<double>::infinity();
    std::uint64_t next_batch_id = 0;
    std::uint64_t arrived = 0;    // customers
    std::uint64_t completed = 0;  // customers

    std::size_t waiting() const { return customers.size(); }
    // Distance the server still has to travel to reach `position`.
    double distance_to(double position) const;
    // First waiting customer at or beyond the server, wrapping around.
    std::multimap<double, Customer>::const_iterator nearest_ahead() const;
};

// Empty circle, server traveling at position 0, first arrival sampled.
WorldState initial_state(const SystemParams& p, Rng& rng);

enum class EventKind { arrival, reach, completion };

struct BatchDone {
    std::uint64_t batch_id = 0;
    double arrival_time = 0.0;
    double sojourn = 0.0;
};

struct StepObservations {
    EventKind kind = EventKind::arrival;
    double time = 0.0;
    // arrival: distances of the new customers ahead of the server.
    std::vector<double> arrival_distances;
    // reach: the customer whose service starts and its waiting time.
    std::optional<Customer> started;
    double wait = 0.0;
    // completion: set when the served customer was the last of its batch.
    std::optional<BatchDone> batch_done;
};

// Time of the next event without mutating the state.
double next_event_time(const WorldState& s, const SystemParams& p);

// Advances exactly one event. Ties between an arrival and another event go
// to the arrival.
StepObservations step(WorldState& s, const SystemParams& p, Rng& rng);

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ProfilePoint {
    double x = 0.0;
    Estimate value;
};

// Raw per-replication statistics, kept so that derived quantities can be
// given paired confidence intervals.
struct ReplicationStats {
    double mean_l = 0.0;
    double mean_batch_sojourn = 0.0;
    double mean_wait = 0.0;
    std::vector<double> l_profile;         // indexed like SimResult::grid
    std::vector<double> mean_wait_within;  // indexed like SimResult::grid
    std::uint64_t events = 0;
    std::uint64_t batches_recorded = 0;
    std::uint64_t customers_recorded = 0;
    std::uint64_t inspections = 0;
};

struct SimResult {
    Estimate mean_l;
    Estimate mean_batch_sojourn;
    Estimate mean_wait;
    std::vector<double> grid;
    std::vector<ProfilePoint> l_profile;         // E[L(x)]
    std::vector<ProfilePoint> mean_wait_within;  // E[W(x)], arrivals within distance x
    std::uint64_t seed = 0;
    double horizon = 0.0;
    double warmup = 0.0;
    std::uint64_t events = 0;
    std::uint64_t batches_recorded = 0;
    std::uint64_t customers_recorded = 0;
    std::uint64_t inspections = 0;
    std::vector<ReplicationStats> replications;

    // Index of x in the grid (tolerance 1e-9); throws MissingGridPoint.
    std::size_t grid_index(double x) const;
};

// Aggregates replications (in order) into a SimResult.
SimResult summarize(std::vector<ReplicationStats> reps, std::vector<double> grid,
                    std::uint64_t seed, double horizon, double warmup);

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, unsigned threads, const std::function<void(int)>& fn);

// Simulates the continuous polling system. Replication i uses the random
// stream (seed, i), so results do not depend on the thread count.
SimResult run_continuous(const SystemParams& p, const SimConfig& cfg);

// Single replication, used by run_continuous.
ReplicationStats run_continuous_replication(const SystemParams& p, const SimConfig& cfg,
                                            int replication);

struct LittleCheck {
    Estimate lhs;   // E[L] - E[L(1 - x)]
    Estimate rhs;   // lambda E[K] x E[W(x)]
    Estimate diff;  // paired lhs - rhs
    bool agree() const;  // |lhs - rhs| within the sum of half-widths
};

// Both sides of Little's law restricted to the far interval [1 - x, 1].
LittleCheck little_interval_check(const SimResult& result, const SystemParams& p, double x);

}  // namespace cpoll
