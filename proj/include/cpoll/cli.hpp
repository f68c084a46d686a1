#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpoll/analytic.hpp"
#include "cpoll/dists.hpp"
#include "cpoll/sim_core.hpp"
#include "cpoll/sim_discrete.hpp"

namespace cpoll::cli {

using ordered_json = nlohmann::ordered_json;

struct FigureSettings {
    std::vector<double> rho_grid{0.2, 0.45, 0.7, 0.95};
    std::vector<int> n_grid{2, 5, 10, 20, 50};
    // Empty: the figure's default batch laws.
    std::vector<BatchSpec> batch_dists;
};

struct RunConfig {
    double lambda = 0.0;
    double alpha = 1.0;
    BatchSpec batch;
    ServiceSpec service;
    SimConfig sim;
    FigureSettings figures;

    SystemParams system() const;
};

// Throws ConfigError on malformed JSON, missing or unknown keys, and
// wrongly typed values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

ordered_json batch_to_json(const BatchSpec& b);
ordered_json service_to_json(const ServiceSpec& s);
BatchSpec batch_from_json(const ordered_json& j);
ServiceSpec service_from_json(const ordered_json& j);
// Canonical form with a fixed key order.
ordered_json to_json(const RunConfig& c);

ordered_json report_json(const AnalysisReport& r);
ordered_json sim_result_json(const SimResult& r);
// Header x,l_of_x_est,l_of_x_halfwidth.
std::string profile_csv(const SimResult& r);

struct CompareRow {
    std::string statistic;
    double analytic = 0.0;
    Estimate simulated;
    double z = 0.0;  // |simulated - analytic| in standard errors
    bool pass = false;
};

// Flags every statistic whose simulated value is more than three standard
// errors away from the analytic value.
std::vector<CompareRow> compare_rows(const AnalysisReport& analytic, const SystemParams& p,
                                     const SimResult& sim);
std::string compare_csv(const std::vector<CompareRow>& rows);

// Columns figure,rho,batch_dist,N,discrete_mean,discrete_hw,continuous_mean,rel_gap.
struct FigureRow {
    int figure = 1;
    ConvergenceRow row;
};
std::vector<FigureRow> figure_rows(int figure, const RunConfig& c);
std::string figure_csv(const std::vector<FigureRow>& rows);

// Default batch laws and service law of the two figures.
std::vector<BatchSpec> default_figure_batches(int figure);
ServiceSpec figure_service(int figure);

// Header x,f_x,l_of_x_analytic,l_of_x_est,l_of_x_halfwidth.
std::string profile_table_csv(const SystemParams& p, const SimResult& sim);

enum ExitCode { ok = 0, config_error = 2, unstable = 3, failure = 4 };

// Maps a library exception onto the CLI exit codes.
int exit_code_for(const std::exception& e);

// Entry point shared by the executable and the tests; writes to the given
// streams and returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cpoll::cli
