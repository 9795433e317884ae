#pragma once

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cogsim/analytic.hpp"
#include "cogsim/channel.hpp"
#include "cogsim/dominance.hpp"
#include "cogsim/engine.hpp"
#include "cogsim/errors.hpp"
#include "cogsim/traffic.hpp"

namespace cogsim {

using json = nlohmann::json;

namespace detail {

inline double probability_field(const json& obj, const char* key)
{
    if (!obj.contains(key)) throw ConfigError(std::string("missing erasure probability for node ") + key);
    if (!obj.at(key).is_number()) throw ConfigError(std::string("erasure probability for node ") + key + " is not a number");
    return obj.at(key).get<double>();
}

template <std::size_t N>
std::array<double, N> table_field(const json& obj, const char* key)
{
    if (!obj.contains(key) || !obj.at(key).is_array() || obj.at(key).size() != N)
        throw ConfigError(std::string(key) + " must be an array of " + std::to_string(N) + " probabilities");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        if (!obj.at(key)[i].is_number()) throw ConfigError(std::string(key) + " entries must be numbers");
        out[i] = obj.at(key)[i].get<double>();
    }
    return out;
}

} // namespace detail

// {"mode":"independent","tx1":{"2":e,"3":e,"4":e},"tx2":{"3":e,"4":e}} or
// {"mode":"joint","tx1_patterns":[8],"tx2_patterns":[4]}; pattern index bits
// are listeners (2,3,4) for tx1 and (3,4) for tx2, low bit first.
inline ErasureSpec channel_from_json(const json& j, bool admissible = false)
{
    if (!j.is_object() || !j.contains("mode")) throw ConfigError("channel spec needs a \"mode\" field");
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "independent") {
        if (!j.contains("tx1") || !j.contains("tx2")) throw ConfigError("independent channel needs tx1 and tx2");
        const json& t1 = j.at("tx1");
        const json& t2 = j.at("tx2");
        return ErasureSpec::from_marginals_independent(
            {detail::probability_field(t1, "2"), detail::probability_field(t1, "3"), detail::probability_field(t1, "4"),
             detail::probability_field(t2, "3"), detail::probability_field(t2, "4")},
            admissible);
    }
    if (mode == "joint") {
        return ErasureSpec::from_joint_table(detail::table_field<8>(j, "tx1_patterns"),
                                             detail::table_field<4>(j, "tx2_patterns"), admissible);
    }
    throw ConfigError("unknown channel mode \"" + mode + "\"");
}

inline json channel_to_json(const ErasureSpec& spec)
{
    return {{"mode", "joint"}, {"tx1_patterns", spec.tx1_pattern_probs()}, {"tx2_patterns", spec.tx2_pattern_probs()}};
}

// {"kind":"bernoulli","lambda":x} or {"kind":"pmf","probs":{"0":p0,"2":p2}}
inline ArrivalProcess arrivals_from_json(const json& j)
{
    const std::string kind = j.value("kind", "bernoulli");
    if (kind == "bernoulli") {
        if (!j.contains("lambda")) throw ConfigError("bernoulli arrivals need \"lambda\"");
        return ArrivalProcess::bernoulli(j.at("lambda").get<double>());
    }
    if (kind == "pmf") {
        if (!j.contains("probs") || !j.at("probs").is_object()) throw ConfigError("pmf arrivals need a \"probs\" object");
        std::map<unsigned, double> probs;
        for (const auto& [k, v] : j.at("probs").items()) {
            std::size_t used = 0;
            unsigned long count = 0;
            try {
                count = std::stoul(k, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != k.size()) throw ConfigError("pmf key \"" + k + "\" is not a nonnegative integer");
            probs[static_cast<unsigned>(count)] = v.get<double>();
        }
        return ArrivalProcess::from_pmf(probs);
    }
    throw ConfigError("unknown arrival kind \"" + kind + "\"");
}

inline json arrivals_to_json(const ArrivalProcess& a)
{
    if (a.kind() == ArrivalProcess::Kind::bernoulli) return {{"kind", "bernoulli"}, {"lambda", a.lambda()}};
    json probs = json::object();
    for (std::size_t k = 0; k < a.pmf().size(); ++k)
        if (a.pmf()[k] > 0.0) probs[std::to_string(k)] = a.pmf()[k];
    return {{"kind", "pmf"}, {"probs", probs}};
}

// Experiment file: a channel spec (top level or under "channel"), optional
// "arrivals" and an optional "admissible" flag that enforces the relay condition.
struct SpecFile {
    ErasureSpec channel;
    ArrivalProcess arrivals;
    bool has_arrivals = false;
    bool admissible = false;
};

inline SpecFile spec_from_json(const json& j)
{
    SpecFile out;
    try {
        out.admissible = j.value("admissible", false);
        out.channel = channel_from_json(j.contains("channel") ? j.at("channel") : j, out.admissible);
        if (j.contains("arrivals")) {
            out.arrivals = arrivals_from_json(j.at("arrivals"));
            out.has_arrivals = true;
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed spec: ") + e.what());
    }
    return out;
}

inline SpecFile load_spec_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spec file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("spec file " + path + " is not valid JSON: " + e.what());
    }
    return spec_from_json(j);
}

inline json config_to_json(const RunConfig& c)
{
    return {{"algorithm", to_int(c.alg)},   {"channel", channel_to_json(c.channel)},
            {"arrivals", arrivals_to_json(c.arrivals)}, {"q", c.q},
            {"horizon", c.horizon},         {"warmup", c.effective_warmup()},
            {"seed", c.seed}};
}

inline json metrics_to_json(const RunMetrics& m)
{
    return {{"r1", m.r1},
            {"r2", m.r2},
            {"primary_delivered", m.primary_delivered},
            {"secondary_delivered", m.secondary_delivered},
            {"measured_slots", m.measured_slots},
            {"service_mean", m.service_mean},
            {"service_p50", m.service_p50},
            {"service_p90", m.service_p90},
            {"service_p99", m.service_p99},
            {"service_max", m.service_max},
            {"busy_mean", m.busy_mean},
            {"idle_mean", m.idle_mean},
            {"busy_periods", m.busy_periods},
            {"idle_periods", m.idle_periods},
            {"backlog_max", m.backlog_max},
            {"backlog_mean", m.backlog_mean},
            {"violations", m.violations}};
}

inline const std::vector<std::string>& run_csv_columns()
{
    static const std::vector<std::string> cols{
        "algorithm",     "lambda",        "q",           "horizon",      "warmup",       "seed",
        "r1",            "r2",            "service_mean", "service_p50", "service_p90",  "service_p99",
        "busy_mean",     "idle_mean",     "busy_periods", "idle_periods", "backlog_max", "backlog_mean",
        "violations"};
    return cols;
}

inline void write_run_csv_header(std::ostream& os)
{
    const auto& cols = run_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
}

inline void write_run_csv_row(std::ostream& os, const RunResult& r)
{
    const RunConfig& c = r.config;
    const RunMetrics& m = r.metrics;
    os.precision(10);
    os << to_int(c.alg) << ',' << c.arrivals.lambda() << ',' << c.q << ',' << c.horizon << ',' << c.effective_warmup()
       << ',' << c.seed << ',' << m.r1 << ',' << m.r2 << ',' << m.service_mean << ',' << m.service_p50 << ','
       << m.service_p90 << ',' << m.service_p99 << ',' << m.busy_mean << ',' << m.idle_mean << ',' << m.busy_periods
       << ',' << m.idle_periods << ',' << m.backlog_max << ',' << m.backlog_mean << ',' << m.violations << '\n';
}

// {"constraints":[{"a":..,"b":..}],"boundary":[[r1,r2],..],"optimal_q":[..]}
inline json region_to_json(const ThroughputRegion& region, std::size_t samples = 201)
{
    json constraints = json::array();
    for (const auto& h : region.constraints()) constraints.push_back({{"a", h.a}, {"b", h.b}});
    json boundary = json::array();
    json optimal_q = json::array();
    for (const auto& p : region.boundary(samples)) {
        boundary.push_back({p.r1, p.r2});
        if (region.parametric()) optimal_q.push_back(p.q);
    }
    return {{"constraints", constraints}, {"boundary", boundary}, {"optimal_q", optimal_q}};
}

inline json ks_to_json(const KsResult& k)
{
    return {{"statistic", k.statistic}, {"critical", k.critical}, {"p_value", k.p_value}, {"rejected", k.rejected}};
}

inline json dominance_to_json(const DominanceReport& r)
{
    return {{"samples", r.samples},
            {"pathwise_violations", r.violations},
            {"mean_service_no_cooperation", r.mean_service_nc},
            {"mean_service_relay", r.mean_service_c},
            {"relay3_zero_frequency", r.relay3_zero_frequency},
            {"theta_corr_heard2", r.theta_corr_heard2},
            {"theta_corr_heard3", r.theta_corr_heard3},
            {"ks_no_cooperation_vs_geometric", ks_to_json(r.nc_vs_geometric)},
            {"ks_no_cooperation_vs_protocol", ks_to_json(r.nc_vs_no_cooperation)},
            {"ks_relay_vs_simple_forwarding_protocol", ks_to_json(r.c_vs_simple_forwarding)}};
}

} // namespace cogsim
