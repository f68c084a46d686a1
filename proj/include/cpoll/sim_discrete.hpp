#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpoll/sim_core.hpp"

namespace cpoll {

enum class Discipline { exhaustive };

// Symmetric N-queue polling system with deterministic switch-over times of
// total_switchover / N per hop. Customers of a batch pick queues i.i.d.
// uniformly; each queue is FCFS.
struct DiscreteConfig {
    int n_queues = 10;
    // Unset: the tour time alpha of the continuous system.
    std::optional<double> total_switchover;
    Discipline discipline = Discipline::exhaustive;
};

// Per-queue bookkeeping at the end of a replication.
struct DiscreteTrace {
    std::vector<std::uint64_t> arrived;
    std::vector<std::uint64_t> served;  // service completions
    std::vector<std::uint64_t> content; // waiting + in service
};

ReplicationStats run_discrete_replication(const SystemParams& p, const DiscreteConfig& d,
                                          const SimConfig& cfg, int replication,
                                          DiscreteTrace* trace = nullptr);

// Only mean_l, mean_batch_sojourn and mean_wait are populated.
SimResult run_discrete(const SystemParams& p, const DiscreteConfig& d, const SimConfig& cfg);

struct ConvergenceRow {
    std::optional<int> n_queues;  // unset: the continuous limit
    double rho = 0.0;
    std::string batch_dist;
    Estimate discrete;
    double continuous = 0.0;
    double rel_gap = 0.0;  // (discrete - continuous) / continuous
};

// One row per N plus a final continuous-limit row.
std::vector<ConvergenceRow> convergence_table(const SystemParams& p, std::span<const int> n_list,
                                              const SimConfig& cfg);

// CSV with header N,rho,batch_dist,discrete_mean,discrete_hw,continuous_mean,rel_gap.
std::string convergence_csv(std::span<const ConvergenceRow> rows);

}  // namespace cpoll
