#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cogsim/analytic.hpp"
#include "cogsim/dominance.hpp"
#include "cogsim/engine.hpp"
#include "cogsim/errors.hpp"
#include "cogsim/io.hpp"

namespace cogsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 2;
inline constexpr int kExitConfigError = 3;

enum class OutputFormat { csv, json };

inline OutputFormat format_from_string(const std::string& s)
{
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw ConfigError("output format must be csv or json, got \"" + s + "\"");
}

inline std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

// "a:b:step" (inclusive of b up to rounding) or a single number.
inline std::vector<double> parse_grid(const std::string& text, const char* what)
{
    std::vector<double> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (item.empty() || used != item.size()) throw ConfigError(std::string(what) + " grid \"" + text + "\" is malformed");
        parts.push_back(v);
    }
    std::vector<double> grid;
    if (parts.size() == 1) {
        grid = parts;
    } else if (parts.size() == 3) {
        const double a = parts[0], b = parts[1], step = parts[2];
        if (!(step > 0.0) || b < a) throw ConfigError(std::string(what) + " grid needs a <= b and a positive step");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) grid.push_back(std::min(b, a + step * static_cast<double>(i)));
    } else {
        throw ConfigError(std::string(what) + " grid must be a:b:step or a single value");
    }
    for (double v : grid)
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + " grid values must lie in [0,1]");
    return grid;
}

inline std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

inline std::vector<Algorithm> parse_algorithms(const std::string& text)
{
    std::vector<Algorithm> out;
    for (const auto& item : split_list(text)) {
        std::size_t used = 0;
        int n = 0;
        try {
            n = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw ConfigError("algorithm \"" + item + "\" is not a number");
        out.push_back(algorithm_from_int(n));
    }
    return out;
}

inline std::vector<std::uint64_t> parse_seeds(const std::string& text)
{
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(text)) {
        std::size_t used = 0;
        std::uint64_t s = 0;
        try {
            s = std::stoull(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.front() == '-') throw ConfigError("seed \"" + item + "\" is not a nonnegative integer");
        out.push_back(s);
    }
    if (out.empty()) throw ConfigError("seed list is empty");
    return out;
}

// Resolved settings of one CLI invocation.
struct ExperimentSpec {
    std::string command;
    std::string spec_path;
    SpecFile spec;
    std::vector<Algorithm> algorithms;
    std::vector<double> lambdas;      // empty: use the arrival process in the spec file
    bool q_auto = true;               // pick q per point from the region optimizer
    std::vector<double> q_grid;
    Slot horizon = 1'000'000;
    Slot warmup = -1;
    std::vector<std::uint64_t> seeds{1};
    std::string out_path;
    OutputFormat format = OutputFormat::csv;
    std::size_t samples = 100'000;    // coupled draws for the dominance command
    std::size_t boundary_samples = 201;

    void validate() const
    {
        if (algorithms.empty()) throw ConfigError("no algorithm selected (use --alg 1,3,4,5)");
        if (!q_auto && q_grid.empty()) throw ConfigError("q grid is empty");
        if (seeds.empty()) throw ConfigError("seed list is empty");
        if (horizon <= 0) throw ConfigError("horizon must be positive");
        if (warmup >= horizon) throw ConfigError("warmup must be shorter than the horizon");
        if (boundary_samples < 2) throw ConfigError("need at least two boundary samples");
    }
};

// Everything needed to rerun the command; embedded in each output.
inline json reproducibility_header(const ExperimentSpec& x)
{
    json algs = json::array();
    for (auto a : x.algorithms) algs.push_back(to_int(a));
    json j{{"command", x.command},
           {"spec_file", x.spec_path},
           {"channel", channel_to_json(x.spec.channel)},
           {"admissible", x.spec.admissible},
           {"algorithms", algs},
           {"lambda", x.lambdas},
           {"q", x.q_auto ? json("auto") : json(x.q_grid)},
           {"horizon", x.horizon},
           {"warmup", x.warmup < 0 ? x.horizon / 10 : x.warmup},
           {"seeds", x.seeds},
           {"format", to_string(x.format)}};
    if (x.spec.has_arrivals) j["arrivals"] = arrivals_to_json(x.spec.arrivals);
    if (x.command == "dominance") j["samples"] = x.samples;
    return j;
}

inline void write_csv_header_comment(std::ostream& os, const ExperimentSpec& x)
{
    os << "# cogsim " << reproducibility_header(x).dump() << '\n';
}

// q that maximizes the secondary rate at primary rate r1 (randomized relay);
// past the stability limit, the q with the largest service rate.
inline double auto_q(const ErasureSpec& spec, double r1)
{
    const ThroughputRegion region = region_randomized_relay(spec);
    return region.best_q(std::min(r1, region.r1_limit())).first;
}

inline std::vector<double> q_values_for(const ExperimentSpec& x, Algorithm alg, double lambda)
{
    if (alg != Algorithm::randomized_relay) return {0.0};
    if (x.q_auto) return {auto_q(x.spec.channel, lambda)};
    return x.q_grid;
}

inline std::vector<RunConfig> sweep_configs(const ExperimentSpec& x)
{
    std::vector<ArrivalProcess> arrivals;
    if (x.lambdas.empty()) {
        if (!x.spec.has_arrivals) throw ConfigError("no arrival rate given (use --lambda or an \"arrivals\" block)");
        arrivals.push_back(x.spec.arrivals);
    }
    for (double l : x.lambdas) arrivals.push_back(ArrivalProcess::bernoulli(l));

    std::vector<RunConfig> configs;
    for (const auto& arr : arrivals)
        for (Algorithm alg : x.algorithms)
            for (double q : q_values_for(x, alg, arr.lambda()))
                for (std::uint64_t seed : x.seeds) {
                    RunConfig c;
                    c.alg = alg;
                    c.channel = x.spec.channel;
                    c.arrivals = arr;
                    c.q = q;
                    c.horizon = x.horizon;
                    c.warmup = x.warmup;
                    c.seed = seed;
                    c.abort_on_violation = false;
                    c.validate();
                    configs.push_back(c);
                }
    return configs;
}

inline void write_runs(std::ostream& os, const ExperimentSpec& x, const std::vector<RunResult>& runs)
{
    if (x.format == OutputFormat::csv) {
        write_csv_header_comment(os, x);
        write_run_csv_header(os);
        for (const auto& r : runs) write_run_csv_row(os, r);
        return;
    }
    json rows = json::array();
    for (const auto& r : runs) rows.push_back({{"config", config_to_json(r.config)}, {"metrics", metrics_to_json(r.metrics)}});
    os << json{{"config", reproducibility_header(x)}, {"runs", rows}}.dump(2) << '\n';
}

inline int exit_code_for(const std::vector<RunResult>& runs)
{
    for (const auto& r : runs)
        if (r.metrics.violations > 0) return kExitValidationFailure;
    return kExitOk;
}

// A single run: first algorithm, first lambda (or the spec's arrivals), first q, first seed.
inline int cmd_simulate(const ExperimentSpec& x, std::ostream& os, std::ostream* trace = nullptr)
{
    x.validate();
    ExperimentSpec one = x;
    one.algorithms.resize(1);
    if (!one.lambdas.empty()) one.lambdas.resize(1);
    if (!one.q_auto) one.q_grid.resize(1);
    one.seeds.resize(1);
    RunConfig c = sweep_configs(one).front();
    c.trace = trace;
    const std::vector<RunResult> runs{run(c)};
    write_runs(os, one, runs);
    return exit_code_for(runs);
}

// Rows ordered by lambda, algorithm, q, seed regardless of worker completion order.
inline int cmd_sweep(const ExperimentSpec& x, std::ostream& os)
{
    x.validate();
    const auto runs = run_many(sweep_configs(x));
    write_runs(os, x, runs);
    return exit_code_for(runs);
}

inline int cmd_region(const ExperimentSpec& x, std::ostream& os)
{
    if (x.algorithms.empty()) throw ConfigError("region needs at least one algorithm (use --alg)");
    if (x.format == OutputFormat::json) {
        json regions = json::object();
        for (Algorithm alg : x.algorithms) {
            json r = region_to_json(region_for(alg, x.spec.channel), x.boundary_samples);
            r["r1_limit"] = region_for(alg, x.spec.channel).r1_limit();
            regions[std::to_string(to_int(alg))] = r;
        }
        os << json{{"config", reproducibility_header(x)}, {"regions", regions}}.dump(2) << '\n';
        return kExitOk;
    }
    write_csv_header_comment(os, x);
    os << "algorithm,r1,r2,q\n";
    os.precision(12);
    for (Algorithm alg : x.algorithms)
        for (const auto& p : region_for(alg, x.spec.channel).boundary(x.boundary_samples))
            os << to_int(alg) << ',' << p.r1 << ',' << p.r2 << ',' << p.q << '\n';
    return kExitOk;
}

inline int cmd_dominance(const ExperimentSpec& x, std::ostream& os)
{
    const DominanceReport rep = dominance_report(x.spec.channel, x.samples, x.seeds.front());
    os << json{{"config", reproducibility_header(x)}, {"report", dominance_to_json(rep)}}.dump(2) << '\n';
    return rep.violations == 0 ? kExitOk : kExitValidationFailure;
}

// ---------------------------------------------------------------------------
// Validation suite

enum class CheckStatus { pass, fail, insufficient };

inline const char* to_string(CheckStatus s)
{
    switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::insufficient: return "insufficient-data";
    }
    return "?";
}

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::pass;
    double value = 0.0;       // observed discrepancy
    double tolerance = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    double seconds = 0.0;

    bool failed() const
    {
        for (const auto& c : checks)
            if (c.status == CheckStatus::fail) return true;
        return false;
    }
    bool insufficient() const
    {
        for (const auto& c : checks)
            if (c.status == CheckStatus::insufficient) return true;
        return false;
    }
};

struct ValidationBudget {
    Slot horizon = 1'000'000;
    std::uint64_t seed = 1;
    std::size_t dominance_samples = 20'000;
};

// Simulation-based checks need at least this many slots; stability verdicts
// need the slope threshold 10/sqrt(h) below the 0.02 probe margin.
inline constexpr Slot kMinSimulationHorizon = 100'000;
inline constexpr Slot kMinStabilityHorizon = 1'000'000;

namespace detail {

inline CheckResult tolerance_check(std::string name, double error, double tol, std::string detail = {})
{
    return {std::move(name), error <= tol ? CheckStatus::pass : CheckStatus::fail, error, tol, std::move(detail)};
}

inline bool coding_operational(const ErasureSpec& spec)
{
    try {
        (void)region_network_coding(spec);
        (void)region_randomized_relay(spec);
        return true;
    } catch (const ConfigError&) {
        return false;
    }
}

} // namespace detail

inline ValidationReport validate_spec(const ErasureSpec& spec, const std::vector<Algorithm>& algorithms,
                                      const ValidationBudget& budget)
{
    const auto t0 = std::chrono::steady_clock::now();
    ValidationReport rep;
    const ErasureSummary e = spec.summary();
    const bool coding = detail::coding_operational(spec);

    // Chain identities against closed forms.
    if (coding) {
        const MarkovChainModel nc = build_chain_network_coding(spec);
        rep.checks.push_back(detail::tolerance_check(
            "chain: fresh-state probability", std::abs(nc.pi(service_state::fresh) - pi_fresh_closed_form(e)), 1e-10));
        rep.checks.push_back(detail::tolerance_check(
            "chain: coding-state probability",
            std::abs(nc.pi(service_state::relay_overheard) - pi_overheard_closed_form(e)), 1e-10));
        double err1 = 0.0, err3 = 0.0;
        for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const MarkovChainModel m = build_chain_randomized_relay(spec, q);
            const double p1 = m.pi(service_state::fresh), p3 = m.pi(service_state::relay_overheard);
            err1 = std::max(err1, std::abs(1.0 / p1 - inverse_pi_fresh(e, q)));
            err3 = std::max(err3, std::abs((1.0 - p3) / p1 - non_coding_slots_per_service(e, q)));
        }
        rep.checks.push_back(detail::tolerance_check("chain: mean service time over q", err1, 1e-10));
        rep.checks.push_back(detail::tolerance_check("chain: non-coding slots per service over q", err3, 1e-10));
        const PhiCheck phi = derivative_check_phi(spec);
        rep.checks.push_back({"chain: mean service time nondecreasing in q",
                              phi.nondecreasing ? CheckStatus::pass : CheckStatus::fail, -phi.min_slope, 1e-9, ""});
    }

    // Nesting of the analytic regions.
    {
        std::vector<ThroughputRegion> regions;
        for (Algorithm alg : {Algorithm::no_cooperation, Algorithm::simple_forwarding, Algorithm::network_coding,
                              Algorithm::randomized_relay}) {
            if (uses_coding(alg) && !coding) continue;
            regions.push_back(region_for(alg, spec));
        }
        double worst = 0.0;
        const double hi = regions.back().r1_limit();
        for (std::size_t k = 1; k < regions.size(); ++k)
            for (int i = 0; i <= 200; ++i) {
                const double r1 = hi * i / 200.0;
                worst = std::max(worst, regions[k - 1].r2_max(r1).r2 - regions[k].r2_max(r1).r2);
            }
        rep.checks.push_back(detail::tolerance_check("region: nesting", worst, 1e-9));
    }

    // Simulation against the analytic regions, half way to each stability limit.
    const bool enough = budget.horizon >= kMinSimulationHorizon;
    std::vector<RunConfig> configs;
    for (Algorithm alg : algorithms) {
        if (uses_coding(alg) && !coding) continue;
        const ThroughputRegion region = region_for(alg, spec);
        RunConfig c;
        c.alg = alg;
        c.channel = spec;
        c.arrivals = ArrivalProcess::bernoulli(0.5 * region.r1_limit());
        c.q = alg == Algorithm::randomized_relay ? region.r2_max(c.arrivals.lambda()).q : 0.0;
        c.horizon = budget.horizon;
        c.seed = budget.seed;
        c.abort_on_violation = false;
        configs.push_back(c);
    }
    if (!enough) {
        rep.checks.push_back({"simulation vs analytic", CheckStatus::insufficient, static_cast<double>(budget.horizon),
                              static_cast<double>(kMinSimulationHorizon), "horizon too short for simulation checks"});
    } else {
        const auto runs = run_many(configs);
        for (const auto& r : runs) {
            const std::string tag = "alg " + std::to_string(to_int(r.config.alg));
            const ThroughputRegion region = region_for(r.config.alg, spec);
            const double lambda = r.config.arrivals.lambda();
            rep.checks.push_back(detail::tolerance_check(tag + ": protocol invariants",
                                                         static_cast<double>(r.metrics.violations), 0.0));
            rep.checks.push_back(detail::tolerance_check(tag + ": primary throughput", std::abs(r.metrics.r1 - lambda), 0.01));
            rep.checks.push_back(detail::tolerance_check(tag + ": secondary throughput vs boundary",
                                                         std::abs(r.metrics.r2 - region.r2_max(lambda).r2), 0.01));
            const double mean_s = mean_service_time(r.config.alg, spec, r.config.q);
            rep.checks.push_back(detail::tolerance_check(tag + ": mean service time",
                                                         std::abs(r.metrics.service_mean - mean_s) / mean_s, 0.05));
        }
    }

    // Stability flips across the service rate.
    if (budget.horizon < kMinStabilityHorizon) {
        rep.checks.push_back({"stability thresholds", CheckStatus::insufficient, static_cast<double>(budget.horizon),
                              static_cast<double>(kMinStabilityHorizon), "horizon too short for stability verdicts"});
    } else {
        for (Algorithm alg : algorithms) {
            if (alg == Algorithm::randomized_relay || (uses_coding(alg) && !coding)) continue;
            const double mu = mu1_for(alg, spec);
            if (mu + 0.02 > 1.0 || mu - 0.02 < 0.0) continue;
            RunConfig base;
            base.alg = alg;
            base.channel = spec;
            base.horizon = budget.horizon;
            base.seed = budget.seed;
            base.abort_on_violation = false;
            const auto v = stability_probe(base, {mu - 0.02, mu + 0.02});
            const bool ok = v[0].stable && !v[1].stable;
            std::ostringstream d;
            d << "slopes " << v[0].slope << " / " << v[1].slope << " vs threshold " << v[0].threshold;
            rep.checks.push_back({"alg " + std::to_string(to_int(alg)) + ": stability flips at the service rate",
                                  ok ? CheckStatus::pass : CheckStatus::fail, v[1].slope, v[0].threshold, d.str()});
        }
    }

    // Coupling oracle (requires the relay condition at node 3).
    if (spec.satisfies_relay_condition() && spec.erasure_prob(Transmitter::node1, {3}) > 0.0) {
        const DominanceReport d = dominance_report(spec, budget.dominance_samples, budget.seed);
        rep.checks.push_back(detail::tolerance_check("coupling: pathwise dominance violations",
                                                     static_cast<double>(d.violations), 0.0));
        rep.checks.push_back({"coupling: no-cooperation times are geometric",
                              d.nc_vs_geometric.rejected ? CheckStatus::fail : CheckStatus::pass,
                              d.nc_vs_geometric.statistic, d.nc_vs_geometric.critical, ""});
        rep.checks.push_back({"coupling: relay times match the forwarding protocol",
                              d.c_vs_simple_forwarding.rejected ? CheckStatus::fail : CheckStatus::pass,
                              d.c_vs_simple_forwarding.statistic, d.c_vs_simple_forwarding.critical, ""});
    }

    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

inline json validation_to_json(const ValidationReport& rep)
{
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name},
                          {"status", to_string(c.status)},
                          {"value", c.value},
                          {"tolerance", c.tolerance},
                          {"detail", c.detail}});
    return {{"passed", !rep.failed()},
            {"insufficient_data", rep.insufficient()},
            {"seconds", rep.seconds},
            {"checks", checks}};
}

// Exit 2 on any failed check. Checks skipped for lack of data are reported
// as insufficient-data and do not fail the run.
inline int cmd_validate(const ExperimentSpec& x, std::ostream& os)
{
    x.validate();
    const ValidationReport rep = validate_spec(x.spec.channel, x.algorithms, {x.horizon, x.seeds.front(), 20'000});
    if (x.format == OutputFormat::json) {
        os << json{{"config", reproducibility_header(x)}, {"validation", validation_to_json(rep)}}.dump(2) << '\n';
    } else {
        write_csv_header_comment(os, x);
        os << "check,status,value,tolerance,detail\n";
        for (const auto& c : rep.checks)
            os << '"' << c.name << "\"," << to_string(c.status) << ',' << c.value << ',' << c.tolerance << ",\""
               << c.detail << "\"\n";
    }
    return rep.failed() ? kExitValidationFailure : kExitOk;
}

} // namespace cogsim
