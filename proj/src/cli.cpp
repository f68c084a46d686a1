#include "cpoll/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cpoll/errors.hpp"
#include "cpoll/format.hpp"

namespace cpoll::cli {

namespace {

std::vector<double> default_profile_grid()
{
    std::vector<double> g;
    for (int i = 1; i <= 20; ++i)
        g.push_back(i / 20.0);
    return g;
}

void expect_object(const ordered_json& j, const std::string& where)
{
    if (!j.is_object())
        throw ConfigError(fmt::format("{}: expected a JSON object", where));
}

void reject_unknown(const ordered_json& j, const std::set<std::string>& allowed,
                    const std::string& where)
{
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
}

const ordered_json& require(const ordered_json& j, const std::string& key, const std::string& where)
{
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError(fmt::format("{}: missing key '{}'", where, key));
    return *it;
}

double as_real(const ordered_json& v, const std::string& what)
{
    if (!v.is_number())
        throw ConfigError(fmt::format("{}: expected a number", what));
    return v.get<double>();
}

std::int64_t as_int(const ordered_json& v, const std::string& what)
{
    if (v.is_number_integer())
        return v.get<std::int64_t>();
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9e15)
            return static_cast<std::int64_t>(d);
    }
    throw ConfigError(fmt::format("{}: expected an integer", what));
}

std::uint64_t as_seed(const ordered_json& v, const std::string& what)
{
    if (v.is_number_unsigned())
        return v.get<std::uint64_t>();
    std::int64_t s = as_int(v, what);
    if (s < 0)
        throw ConfigError(fmt::format("{}: seed must be non-negative", what));
    return static_cast<std::uint64_t>(s);
}

std::optional<double> real_if(const ordered_json& j, const std::string& key, const std::string& where)
{
    auto it = j.find(key);
    if (it == j.end())
        return std::nullopt;
    return as_real(*it, where + "." + key);
}

std::string kind_of(const ordered_json& j, const std::string& where)
{
    const auto& k = require(j, "kind", where);
    if (!k.is_string())
        throw ConfigError(fmt::format("{}.kind: expected a string", where));
    return k.get<std::string>();
}

ordered_json estimate_json(const Estimate& e)
{
    ordered_json j;
    j["mean"] = e.mean;
    j["halfwidth"] = e.halfwidth_95;
    j["n"] = e.n;
    return j;
}

double standard_error(const Estimate& e)
{
    if (e.n < 2)
        return 0.0;
    return e.halfwidth_95 / student_t_975(e.n - 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

BatchSpec batch_from_json(const ordered_json& j)
{
    const std::string where = "batch";
    expect_object(j, where);
    std::string kind = kind_of(j, where);
    auto mean = real_if(j, "mean", where);
    auto want_one = [&](const char* raw) {
        bool has_raw = j.contains(raw);
        if (has_raw == mean.has_value())
            throw ConfigError(fmt::format("{} ({}): give exactly one of '{}' or 'mean'", where, kind, raw));
    };

    if (kind == "deterministic") {
        reject_unknown(j, {"kind", "k"}, where);
        return BatchSpec::deterministic(static_cast<int>(as_int(require(j, "k", where), "batch.k")));
    }
    if (kind == "geometric") {
        reject_unknown(j, {"kind", "p", "mean"}, where);
        want_one("p");
        return mean ? BatchSpec::geometric_with_mean(*mean)
                    : BatchSpec::geometric(as_real(j.at("p"), "batch.p"));
    }
    if (kind == "poisson") {
        reject_unknown(j, {"kind", "mu", "mean"}, where);
        want_one("mu");
        return mean ? BatchSpec::poisson_with_mean(*mean)
                    : BatchSpec::poisson(as_real(j.at("mu"), "batch.mu"));
    }
    if (kind == "negbinom") {
        reject_unknown(j, {"kind", "r", "p", "mean"}, where);
        want_one("p");
        int r = static_cast<int>(as_int(require(j, "r", where), "batch.r"));
        return mean ? BatchSpec::negbinom_with_mean(r, *mean)
                    : BatchSpec::negbinom(r, as_real(j.at("p"), "batch.p"));
    }
    if (kind == "binomial") {
        reject_unknown(j, {"kind", "n", "p", "mean"}, where);
        want_one("p");
        int n = static_cast<int>(as_int(require(j, "n", where), "batch.n"));
        return mean ? BatchSpec::binomial_with_mean(n, *mean)
                    : BatchSpec::binomial(n, as_real(j.at("p"), "batch.p"));
    }
    if (kind == "custom") {
        reject_unknown(j, {"kind", "pmf"}, where);
        const auto& pmf = require(j, "pmf", where);
        expect_object(pmf, "batch.pmf");
        std::map<int, double> table;
        for (const auto& [key, value] : pmf.items()) {
            std::size_t used = 0;
            int k = 0;
            try {
                k = std::stoi(key, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != key.size())
                throw ConfigError(fmt::format("batch.pmf: key '{}' is not an integer", key));
            table[k] = as_real(value, "batch.pmf." + key);
        }
        return BatchSpec::custom(std::move(table));
    }
    throw ConfigError(fmt::format("batch.kind: unknown kind '{}'", kind));
}

ServiceSpec service_from_json(const ordered_json& j)
{
    const std::string where = "service";
    expect_object(j, where);
    std::string kind = kind_of(j, where);
    if (kind == "deterministic") {
        reject_unknown(j, {"kind", "value"}, where);
        return ServiceSpec::deterministic(as_real(require(j, "value", where), "service.value"));
    }
    if (kind == "exponential") {
        reject_unknown(j, {"kind", "rate", "mean"}, where);
        auto rate = real_if(j, "rate", where);
        auto mean = real_if(j, "mean", where);
        if (rate.has_value() == mean.has_value())
            throw ConfigError("service (exponential): give exactly one of 'rate' or 'mean'");
        if (mean && !(*mean > 0.0))
            throw ConfigError("service.mean must be positive");
        return ServiceSpec::exponential(rate ? *rate : 1.0 / *mean);
    }
    if (kind == "custom") {
        reject_unknown(j, {"kind", "mean", "m2"}, where);
        return ServiceSpec::custom(as_real(require(j, "mean", where), "service.mean"),
                                   as_real(require(j, "m2", where), "service.m2"));
    }
    throw ConfigError(fmt::format("service.kind: unknown kind '{}'", kind));
}

ordered_json batch_to_json(const BatchSpec& b)
{
    ordered_json j;
    const bool tuned = b.target_mean != 0.0;
    switch (b.kind) {
    case BatchKind::deterministic:
        j["kind"] = "deterministic";
        j["k"] = b.k;
        break;
    case BatchKind::geometric:
        j["kind"] = "geometric";
        if (tuned)
            j["mean"] = b.target_mean;
        else
            j["p"] = b.p;
        break;
    case BatchKind::poisson_zt:
        j["kind"] = "poisson";
        if (tuned)
            j["mean"] = b.target_mean;
        else
            j["mu"] = b.mu;
        break;
    case BatchKind::negbinom_zt:
        j["kind"] = "negbinom";
        j["r"] = b.r;
        if (tuned)
            j["mean"] = b.target_mean;
        else
            j["p"] = b.p;
        break;
    case BatchKind::binomial_zt:
        j["kind"] = "binomial";
        j["n"] = b.n;
        if (tuned)
            j["mean"] = b.target_mean;
        else
            j["p"] = b.p;
        break;
    case BatchKind::custom: {
        j["kind"] = "custom";
        ordered_json pmf = ordered_json::object();
        for (auto [k, v] : b.pmf)
            pmf[std::to_string(k)] = v;
        j["pmf"] = pmf;
        break;
    }
    }
    return j;
}

ordered_json service_to_json(const ServiceSpec& s)
{
    ordered_json j;
    switch (s.kind) {
    case ServiceKind::deterministic:
        j["kind"] = "deterministic";
        j["value"] = s.value;
        break;
    case ServiceKind::exponential:
        j["kind"] = "exponential";
        j["rate"] = s.rate;
        break;
    case ServiceKind::custom:
        j["kind"] = "custom";
        j["mean"] = s.mean;
        j["m2"] = s.m2;
        break;
    }
    return j;
}

SystemParams RunConfig::system() const { return make_system(lambda, alpha, batch, service); }

RunConfig parse_config(const std::string& text)
{
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    expect_object(j, "config");
    reject_unknown(j, {"lambda", "alpha", "batch", "service", "simulation", "figures"}, "config");

    RunConfig c;
    c.lambda = as_real(require(j, "lambda", "config"), "lambda");
    c.alpha = as_real(require(j, "alpha", "config"), "alpha");
    c.batch = batch_from_json(require(j, "batch", "config"));
    c.service = service_from_json(require(j, "service", "config"));
    c.sim.profile_grid = default_profile_grid();

    if (auto it = j.find("simulation"); it != j.end()) {
        const auto& s = *it;
        expect_object(s, "simulation");
        reject_unknown(s,
                       {"horizon", "warmup", "seed", "replications", "pasta_rate", "profile_grid",
                        "threads"},
                       "simulation");
        if (auto v = real_if(s, "horizon", "simulation"))
            c.sim.horizon = *v;
        if (s.contains("warmup") && !s.at("warmup").is_null())
            c.sim.warmup = as_real(s.at("warmup"), "simulation.warmup");
        if (s.contains("seed"))
            c.sim.seed = as_seed(s.at("seed"), "simulation.seed");
        if (s.contains("replications"))
            c.sim.replications = static_cast<int>(as_int(s.at("replications"), "simulation.replications"));
        if (auto v = real_if(s, "pasta_rate", "simulation"))
            c.sim.pasta_rate = *v;
        if (s.contains("threads"))
            c.sim.threads = static_cast<unsigned>(std::max<std::int64_t>(0, as_int(s.at("threads"), "simulation.threads")));
        if (s.contains("profile_grid")) {
            const auto& g = s.at("profile_grid");
            if (!g.is_array())
                throw ConfigError("simulation.profile_grid: expected an array");
            c.sim.profile_grid.clear();
            for (const auto& x : g)
                c.sim.profile_grid.push_back(as_real(x, "simulation.profile_grid"));
        }
    }

    if (auto it = j.find("figures"); it != j.end()) {
        const auto& f = *it;
        expect_object(f, "figures");
        reject_unknown(f, {"rho_grid", "n_grid", "batch_dists"}, "figures");
        if (f.contains("rho_grid")) {
            if (!f.at("rho_grid").is_array())
                throw ConfigError("figures.rho_grid: expected an array");
            c.figures.rho_grid.clear();
            for (const auto& x : f.at("rho_grid"))
                c.figures.rho_grid.push_back(as_real(x, "figures.rho_grid"));
        }
        if (f.contains("n_grid")) {
            if (!f.at("n_grid").is_array())
                throw ConfigError("figures.n_grid: expected an array");
            c.figures.n_grid.clear();
            for (const auto& x : f.at("n_grid"))
                c.figures.n_grid.push_back(static_cast<int>(as_int(x, "figures.n_grid")));
        }
        if (f.contains("batch_dists")) {
            if (!f.at("batch_dists").is_array())
                throw ConfigError("figures.batch_dists: expected an array");
            for (const auto& b : f.at("batch_dists"))
                c.figures.batch_dists.push_back(batch_from_json(b));
        }
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(fmt::format("cannot read config file '{}'", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

ordered_json to_json(const RunConfig& c)
{
    ordered_json j;
    j["lambda"] = c.lambda;
    j["alpha"] = c.alpha;
    j["batch"] = batch_to_json(c.batch);
    j["service"] = service_to_json(c.service);
    ordered_json s;
    s["horizon"] = c.sim.horizon;
    s["warmup"] = c.sim.warmup ? ordered_json(*c.sim.warmup) : ordered_json(nullptr);
    s["seed"] = c.sim.seed;
    s["replications"] = c.sim.replications;
    s["pasta_rate"] = c.sim.pasta_rate;
    s["profile_grid"] = c.sim.profile_grid;
    s["threads"] = c.sim.threads;
    j["simulation"] = s;
    ordered_json f;
    f["rho_grid"] = c.figures.rho_grid;
    f["n_grid"] = c.figures.n_grid;
    f["batch_dists"] = ordered_json::array();
    for (const auto& b : c.figures.batch_dists)
        f["batch_dists"].push_back(batch_to_json(b));
    j["figures"] = f;
    return j;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

ordered_json report_json(const AnalysisReport& r)
{
    ordered_json j;
    j["rho"] = r.rho;
    j["mean_l"] = r.mean_l;
    j["f_c0"] = r.density.c0;
    j["f_c1"] = r.density.c1;
    j["mean_batch_sojourn"] = r.mean_sojourn_batch;
    j["pgf_integral"] = r.pgf_integral_value;
    return j;
}

ordered_json sim_result_json(const SimResult& r)
{
    ordered_json j;
    j["seed"] = r.seed;
    j["replications"] = r.replications.size();
    j["horizon"] = r.horizon;
    j["warmup"] = r.warmup;
    j["mean_l"] = estimate_json(r.mean_l);
    j["mean_batch_sojourn"] = estimate_json(r.mean_batch_sojourn);
    j["mean_wait"] = estimate_json(r.mean_wait);
    j["l_profile"] = ordered_json::array();
    for (const auto& pt : r.l_profile) {
        ordered_json e = estimate_json(pt.value);
        e["x"] = pt.x;
        j["l_profile"].push_back(e);
    }
    j["mean_wait_within"] = ordered_json::array();
    for (const auto& pt : r.mean_wait_within) {
        ordered_json e = estimate_json(pt.value);
        e["x"] = pt.x;
        j["mean_wait_within"].push_back(e);
    }
    ordered_json counts;
    counts["events"] = r.events;
    counts["batches"] = r.batches_recorded;
    counts["customers"] = r.customers_recorded;
    counts["inspections"] = r.inspections;
    j["counts"] = counts;
    return j;
}

std::string profile_csv(const SimResult& r)
{
    std::string out = "x,l_of_x_est,l_of_x_halfwidth\n";
    for (const auto& pt : r.l_profile)
        out += fmt::format("{},{},{}\n", fmt_real(pt.x), fmt_real(pt.value.mean),
                           fmt_real(pt.value.halfwidth_95));
    return out;
}

std::vector<CompareRow> compare_rows(const AnalysisReport& analytic, const SystemParams& p,
                                     const SimResult& sim)
{
    std::vector<CompareRow> rows;
    auto add = [&](std::string name, double value, const Estimate& e) {
        CompareRow row;
        row.statistic = std::move(name);
        row.analytic = value;
        row.simulated = e;
        double se = standard_error(e);
        double dev = std::abs(e.mean - value);
        row.z = se > 0.0 ? dev / se : (dev == 0.0 ? 0.0 : INFINITY);
        row.pass = std::isfinite(e.mean) && dev <= 3.0 * se;
        rows.push_back(std::move(row));
    };
    add("mean_l", analytic.mean_l, sim.mean_l);
    add("mean_batch_sojourn", analytic.mean_sojourn_batch, sim.mean_batch_sojourn);
    // Little's law on the whole circle.
    add("mean_wait", analytic.mean_l / (p.lambda * p.batch.mean()), sim.mean_wait);
    for (const auto& pt : sim.l_profile)
        add(fmt::format("l_of_x@{}", fmt_real(pt.x)), cum_density(analytic.density, pt.x), pt.value);
    return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows)
{
    std::string out = "statistic,analytic,sim_mean,sim_halfwidth,z,status\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{},{}\n", r.statistic, fmt_real(r.analytic),
                           fmt_real(r.simulated.mean), fmt_real(r.simulated.halfwidth_95),
                           fmt_real(r.z), r.pass ? "pass" : "FAIL");
    return out;
}

std::vector<BatchSpec> default_figure_batches(int figure)
{
    if (figure == 1)
        return {BatchSpec::deterministic(5)};
    return {BatchSpec::deterministic(5), BatchSpec::binomial_with_mean(15, 5.0),
            BatchSpec::poisson_with_mean(5.0), BatchSpec::negbinom_with_mean(5, 5.0),
            BatchSpec::geometric_with_mean(5.0)};
}

ServiceSpec figure_service(int figure)
{
    return figure == 1 ? ServiceSpec::exponential(1.0) : ServiceSpec::deterministic(0.2);
}

std::vector<FigureRow> figure_rows(int figure, const RunConfig& c)
{
    if (figure != 1 && figure != 2)
        throw ConfigError(fmt::format("--figure must be 1 or 2, got {}", figure));
    std::vector<BatchSpec> batches =
        c.figures.batch_dists.empty() ? default_figure_batches(figure) : c.figures.batch_dists;
    ServiceSpec service = figure_service(figure);
    std::vector<FigureRow> out;
    for (const auto& b : batches) {
        for (double rho : c.figures.rho_grid) {
            SystemParams probe = make_system(1.0, c.alpha, b, service);
            double lambda = rho / (probe.batch.mean() * probe.service.mean());
            SystemParams p = make_system(lambda, c.alpha, b, service);
            for (auto& row : convergence_table(p, c.figures.n_grid, c.sim))
                out.push_back({figure, std::move(row)});
        }
    }
    return out;
}

std::string figure_csv(const std::vector<FigureRow>& rows)
{
    std::string out = "figure,rho,batch_dist,N,discrete_mean,discrete_hw,continuous_mean,rel_gap\n";
    for (const auto& fr : rows) {
        const auto& r = fr.row;
        out += fmt::format("{},{},{},{},{},{},{},{}\n", fr.figure, fmt_real(r.rho), r.batch_dist,
                           r.n_queues ? std::to_string(*r.n_queues) : std::string("inf"),
                           fmt_real(r.discrete.mean), fmt_real(r.discrete.halfwidth_95),
                           fmt_real(r.continuous), fmt_real(r.rel_gap));
    }
    return out;
}

std::string profile_table_csv(const SystemParams& p, const SimResult& sim)
{
    AffineDensity f = density_f(p);
    std::string out = "x,f_x,l_of_x_analytic,l_of_x_est,l_of_x_halfwidth\n";
    for (const auto& pt : sim.l_profile)
        out += fmt::format("{},{},{},{},{}\n", fmt_real(pt.x), fmt_real(f(pt.x)),
                           fmt_real(cum_density(f, pt.x)), fmt_real(pt.value.mean),
                           fmt_real(pt.value.halfwidth_95));
    return out;
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const UnstableSystem*>(&e))
        return unstable;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidParameter*>(&e) ||
        dynamic_cast<const InvalidConfig*>(&e) || dynamic_cast<const DegenerateDistribution*>(&e) ||
        dynamic_cast<const WrongDistribution*>(&e) || dynamic_cast<const MissingGridPoint*>(&e))
        return config_error;
    return failure;
}

namespace {

struct Options {
    std::string config;
    std::string mode = "continuous";
    int n = 10;
    int figure = 1;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<double> horizon;
    std::string out_path;
};

void add_common(CLI::App* cmd, Options& o)
{
    cmd->add_option("--config", o.config, "JSON configuration file")->required();
    cmd->add_option("--seed", o.seed, "Random seed (overrides CP_SEED and the config)");
    cmd->add_option("--reps", o.reps, "Number of replications");
    cmd->add_option("--horizon", o.horizon, "Simulated time per replication");
    cmd->add_option("--out", o.out_path, "Write CSV output to this path");
}

RunConfig resolve(const Options& o)
{
    RunConfig c = load_config(o.config);
    if (const char* env = std::getenv("CP_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            c.sim.seed = std::stoull(env, &used);
            if (used != std::string(env).size())
                throw std::invalid_argument(env);
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("CP_SEED='{}' is not an unsigned integer", env));
        }
    }
    if (o.seed)
        c.sim.seed = *o.seed;
    if (o.reps)
        c.sim.replications = *o.reps;
    if (o.horizon)
        c.sim.horizon = *o.horizon;
    return c;
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError(fmt::format("cannot write '{}'", path));
    f << text;
}

// CSV goes to --out when given, stdout otherwise.
void emit_csv(const Options& o, const std::string& text, std::ostream& out)
{
    if (o.out_path.empty())
        out << text;
    else
        write_file(o.out_path, text);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Continuous polling system: analysis, simulation and figure data"};
    app.require_subcommand(1);
    Options o;

    auto* analyze_cmd = app.add_subcommand("analyze", "Closed-form analysis as JSON");
    analyze_cmd->add_option("--config", o.config, "JSON configuration file")->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate and print estimates as JSON");
    add_common(simulate_cmd, o);
    simulate_cmd->add_option("--mode", o.mode, "continuous or discrete")
        ->check(CLI::IsMember({"continuous", "discrete"}));
    simulate_cmd->add_option("--n", o.n, "Number of queues (discrete mode)");

    auto* compare_cmd = app.add_subcommand("compare", "Analytic values against simulation");
    add_common(compare_cmd, o);

    auto* figures_cmd = app.add_subcommand("figures", "Discrete vs continuous convergence data");
    add_common(figures_cmd, o);
    figures_cmd->add_option("--figure", o.figure, "1: batch sizes, 2: batch-size laws")
        ->check(CLI::IsMember({1, 2}));

    auto* profile_cmd = app.add_subcommand("profile", "Spatial profile of waiting customers");
    add_common(profile_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? ok : config_error;
    }

    try {
        if (analyze_cmd->parsed()) {
            RunConfig c = load_config(o.config);
            SystemParams p = c.system();
            out << report_json(analyze(p)).dump(2) << "\n";
            return ok;
        }

        RunConfig c = resolve(o);

        if (simulate_cmd->parsed()) {
            SystemParams p = c.system();
            ordered_json j;
            SimResult r;
            if (o.mode == "discrete") {
                DiscreteConfig d;
                d.n_queues = o.n;
                r = run_discrete(p, d, c.sim);
                j["mode"] = "discrete";
                j["n_queues"] = o.n;
            } else {
                r = run_continuous(p, c.sim);
                j["mode"] = "continuous";
            }
            j.update(sim_result_json(r));
            out << j.dump(2) << "\n";
            if (!o.out_path.empty() && !r.l_profile.empty())
                write_file(o.out_path, profile_csv(r));
            return ok;
        }
        if (compare_cmd->parsed()) {
            SystemParams p = c.system();
            AnalysisReport a = analyze(p);
            SimResult r = run_continuous(p, c.sim);
            emit_csv(o, compare_csv(compare_rows(a, p, r)), out);
            return ok;
        }
        if (figures_cmd->parsed()) {
            emit_csv(o, figure_csv(figure_rows(o.figure, c)), out);
            return ok;
        }
        if (profile_cmd->parsed()) {
            SystemParams p = c.system();
            p.require_stable();
            if (c.sim.profile_grid.empty())
                throw ConfigError("profile needs a non-empty simulation.profile_grid");
            SimResult r = run_continuous(p, c.sim);
            emit_csv(o, profile_table_csv(p, r), out);
            return ok;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return ok;
}

}  // namespace cpoll::cli
