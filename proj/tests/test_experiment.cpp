#include <gtest/gtest.h>

#include <sstream>

#include "cogsim/experiment.hpp"

using namespace cogsim;

namespace {

const std::string kConfigs = COGSIM_CONFIG_DIR;

ExperimentSpec experiment(const std::string& command, const std::string& spec_file, const std::string& algs)
{
    ExperimentSpec x;
    x.command = command;
    x.spec_path = kConfigs + "/" + spec_file;
    x.spec = load_spec_file(x.spec_path);
    x.algorithms = parse_algorithms(algs);
    return x;
}

std::vector<std::string> data_lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty() && line[0] != '#') out.push_back(line);
    return out;
}

} // namespace

TEST(Parsing, Grids)
{
    EXPECT_EQ(parse_grid("0.1", "lambda"), std::vector<double>{0.1});
    const auto g = parse_grid("0.1:0.3:0.1", "lambda");
    ASSERT_EQ(g.size(), 3u);
    EXPECT_NEAR(g[2], 0.3, 1e-12);
    EXPECT_EQ(parse_grid("0:1:0.25", "q").size(), 5u);
    EXPECT_THROW(parse_grid("0.3:0.1:0.1", "lambda"), ConfigError);
    EXPECT_THROW(parse_grid("0.1:0.3", "lambda"), ConfigError);
    EXPECT_THROW(parse_grid("0.1:x:0.1", "lambda"), ConfigError);
    EXPECT_THROW(parse_grid("1.5", "lambda"), ConfigError);
    EXPECT_THROW(parse_grid("0:1:0", "q"), ConfigError);
}

TEST(Parsing, ListsAndFormats)
{
    EXPECT_EQ(parse_algorithms("1,3,4,5").size(), 4u);
    EXPECT_TRUE(parse_algorithms("").empty());
    EXPECT_THROW(parse_algorithms("2"), ConfigError);
    EXPECT_THROW(parse_algorithms("one"), ConfigError);
    EXPECT_EQ(parse_seeds("3,4,5"), (std::vector<std::uint64_t>{3, 4, 5}));
    EXPECT_THROW(parse_seeds("-1"), ConfigError);
    EXPECT_THROW(parse_seeds(""), ConfigError);
    EXPECT_EQ(format_from_string("json"), OutputFormat::json);
    EXPECT_THROW(format_from_string("xml"), ConfigError);
}

TEST(SpecFiles, BundledConfigsLoad)
{
    const SpecFile relay = load_spec_file(kConfigs + "/relay.json");
    EXPECT_NEAR(relay.channel.erasure_prob(Transmitter::node1, {2, 3}), 0.16, 1e-12);
    EXPECT_TRUE(relay.has_arrivals);
    const SpecFile coding = load_spec_file(kConfigs + "/coding.json");
    EXPECT_NEAR(coding.channel.erasure_prob(Transmitter::node2, {3, 4}), 0.75, 1e-12);
    EXPECT_NEAR(coding.channel.erasure_prob(Transmitter::node1, {2, 3, 4}), 0.1386, 1e-12);
}

TEST(SpecFiles, Errors)
{
    EXPECT_THROW(load_spec_file(kConfigs + "/missing.json"), ConfigError);
    EXPECT_THROW(spec_from_json(json::parse(R"({"mode":"weird"})")), ConfigError);
    EXPECT_THROW(spec_from_json(json::parse(R"({"mode":"independent","tx1":{"2":0.1,"3":0.2},"tx2":{"3":0.1,"4":0.1}})")),
                 ConfigError);
    EXPECT_THROW(spec_from_json(json::parse(R"({"mode":"joint","tx1_patterns":[1,0],"tx2_patterns":[0,0,0,1]})")),
                 ConfigError);
    // relay condition violated with the admissibility flag set
    const auto bad = json::parse(
        R"({"admissible":true,"mode":"independent","tx1":{"2":0.2,"3":0.1,"4":0.5},"tx2":{"3":0.4,"4":0.2}})");
    EXPECT_THROW(spec_from_json(bad), ConfigError);
    EXPECT_THROW(arrivals_from_json(json::parse(R"({"kind":"pmf","probs":{"a":1.0}})")), ConfigError);
}

TEST(SpecFiles, RoundTrip)
{
    const ErasureSpec spec = coding_reference_channel();
    const ErasureSpec back = channel_from_json(channel_to_json(spec));
    EXPECT_EQ(back.tx1_pattern_probs(), spec.tx1_pattern_probs());
    EXPECT_EQ(back.tx2_pattern_probs(), spec.tx2_pattern_probs());
    const ArrivalProcess a = arrivals_from_json(arrivals_to_json(ArrivalProcess::from_pmf({{0, 0.5}, {2, 0.5}})));
    EXPECT_DOUBLE_EQ(a.lambda(), 1.0);
}

TEST(RegionCommand, RelayInterceptsAndJsonShape)
{
    ExperimentSpec x = experiment("region", "relay.json", "1,3");
    x.format = OutputFormat::json;
    std::ostringstream os;
    EXPECT_EQ(cmd_region(x, os), kExitOk);
    const json j = json::parse(os.str());
    ASSERT_TRUE(j.contains("config"));
    const auto& b1 = j["regions"]["1"]["boundary"];
    const auto& b3 = j["regions"]["3"]["boundary"];
    EXPECT_NEAR(b1.back()[0].get<double>(), 0.2, 1e-9);
    EXPECT_NEAR(b1.back()[1].get<double>(), 0.0, 1e-9);
    EXPECT_NEAR(b3.back()[0].get<double>(), 0.46667, 1e-5);
    EXPECT_NEAR(b3.back()[1].get<double>(), 0.0, 1e-9);
    EXPECT_EQ(j["regions"]["1"]["constraints"].size(), 1u);
    EXPECT_EQ(b1.size(), 201u);
}

TEST(RegionCommand, RandomizedRelayDominatesNetworkCoding)
{
    ExperimentSpec x = experiment("region", "coding.json", "4,5");
    x.format = OutputFormat::json;
    std::ostringstream os;
    cmd_region(x, os);
    const json j = json::parse(os.str());
    const ThroughputRegion r4 = region_network_coding(x.spec.channel);
    bool strictly = false;
    for (const auto& p : j["regions"]["5"]["boundary"]) {
        const double r1 = p[0].get<double>(), r2 = p[1].get<double>();
        EXPECT_GE(r2, r4.r2_max(r1).r2 - 1e-12);
        strictly |= r2 > r4.r2_max(r1).r2 + 1e-6;
    }
    EXPECT_TRUE(strictly);
    EXPECT_EQ(j["regions"]["5"]["optimal_q"].size(), j["regions"]["5"]["boundary"].size());
    EXPECT_EQ(j["regions"]["4"]["constraints"].size(), 2u);
}

TEST(RegionCommand, EmptyAlgorithmListIsAUsageError)
{
    ExperimentSpec x = experiment("region", "relay.json", "");
    std::ostringstream os;
    EXPECT_THROW(cmd_region(x, os), ConfigError);
}

TEST(SweepCommand, OneRowPerSeedWithSeedsEmbedded)
{
    ExperimentSpec x = experiment("sweep", "relay.json", "1");
    x.lambdas = {0.1};
    x.seeds = {1, 2, 3};
    x.horizon = 200'000;
    std::ostringstream os;
    EXPECT_EQ(cmd_sweep(x, os), kExitOk);
    const std::string text = os.str();
    EXPECT_EQ(text.rfind("# cogsim {", 0), 0u);
    const auto lines = data_lines(text);
    ASSERT_EQ(lines.size(), 4u);  // header + three rows
    const auto& cols = run_csv_columns();
    EXPECT_EQ(lines[0].substr(0, 9), "algorithm");
    for (int i = 1; i <= 3; ++i) {
        std::istringstream row(lines[static_cast<std::size_t>(i)]);
        std::vector<std::string> cells;
        for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
        ASSERT_EQ(cells.size(), cols.size());
        EXPECT_EQ(cells[5], std::to_string(i));
        EXPECT_NEAR(std::stod(cells[6]), 0.1, 0.005);  // r1
        EXPECT_NEAR(std::stod(cells[7]), 0.4, 0.02);   // r2 on the boundary
    }
}

TEST(SweepCommand, DeterministicOrderAcrossWorkerCounts)
{
    ExperimentSpec x = experiment("sweep", "coding.json", "5,4");
    x.lambdas = parse_grid("0.05:0.15:0.05", "lambda");
    x.seeds = {7, 8};
    x.q_auto = false;
    x.q_grid = {0.0, 1.0};
    x.horizon = 20'000;
    std::ostringstream a, b;
    ::setenv("COGSIM_THREADS", "1", 1);
    cmd_sweep(x, a);
    ::setenv("COGSIM_THREADS", "4", 1);
    cmd_sweep(x, b);
    ::unsetenv("COGSIM_THREADS");
    EXPECT_EQ(a.str(), b.str());
    // lambda x (alg 5: 2 q values, alg 4: 1) x 2 seeds
    EXPECT_EQ(data_lines(a.str()).size(), 1u + 3u * 3u * 2u);
}

TEST(SweepCommand, SaturatingLambdaMatchesBoundary)
{
    ExperimentSpec x = experiment("sweep", "coding.json", "5");
    x.lambdas = {0.2};
    x.horizon = 1'000'000;
    x.format = OutputFormat::json;
    std::ostringstream os;
    cmd_sweep(x, os);
    const json j = json::parse(os.str());
    const auto& m = j["runs"][0]["metrics"];
    const double q = j["runs"][0]["config"]["q"].get<double>();
    const ThroughputRegion r = region_randomized_relay(x.spec.channel);
    EXPECT_NEAR(q, r.r2_max(0.2).q, 1e-12);
    EXPECT_NEAR(m["r2"].get<double>(), r.r2_max(0.2).r2, 0.01);
    EXPECT_EQ(j["config"]["q"], "auto");
}

TEST(SimulateCommand, JsonCarriesConfigAndMetrics)
{
    ExperimentSpec x = experiment("simulate", "relay.json", "3");
    x.horizon = 50'000;
    x.format = OutputFormat::json;
    std::ostringstream os, trace;
    EXPECT_EQ(cmd_simulate(x, os, &trace), kExitOk);
    const json j = json::parse(os.str());
    EXPECT_EQ(j["runs"].size(), 1u);
    EXPECT_EQ(j["runs"][0]["config"]["algorithm"], 3);
    EXPECT_DOUBLE_EQ(j["runs"][0]["config"]["arrivals"]["lambda"].get<double>(), 0.1);
    EXPECT_EQ(j["config"]["spec_file"], x.spec_path);
    EXPECT_FALSE(trace.str().empty());
}

TEST(ValidateCommand, ShortHorizonIsInsufficientNotFailed)
{
    ExperimentSpec x = experiment("validate", "relay.json", "1,3,4,5");
    x.horizon = 1000;
    x.format = OutputFormat::json;
    std::ostringstream os;
    EXPECT_EQ(cmd_validate(x, os), kExitOk);
    const json j = json::parse(os.str());
    EXPECT_TRUE(j["validation"]["insufficient_data"].get<bool>());
    EXPECT_TRUE(j["validation"]["passed"].get<bool>());
}

TEST(ValidateCommand, RelayReferencePassesWithinBudget)
{
    ExperimentSpec x = experiment("validate", "relay.json", "1,3,4,5");
    std::ostringstream os;
    const ValidationReport rep = validate_spec(x.spec.channel, x.algorithms, {x.horizon, 1, 20'000});
    for (const auto& c : rep.checks)
        EXPECT_EQ(c.status, CheckStatus::pass) << c.name << ": " << c.value << " vs " << c.tolerance << " " << c.detail;
    EXPECT_LT(rep.seconds, 60.0);
    EXPECT_FALSE(rep.insufficient());
}

TEST(ValidateCommand, CodingReferencePasses)
{
    ExperimentSpec x = experiment("validate", "coding.json", "1,3,4,5");
    const ValidationReport rep = validate_spec(x.spec.channel, x.algorithms, {x.horizon, 2, 20'000});
    for (const auto& c : rep.checks)
        EXPECT_NE(c.status, CheckStatus::fail) << c.name << ": " << c.value << " vs " << c.tolerance << " " << c.detail;
}

TEST(DominanceCommand, ReportsZeroViolations)
{
    ExperimentSpec x = experiment("dominance", "relay.json", "1");
    x.samples = 5000;
    std::ostringstream os;
    EXPECT_EQ(cmd_dominance(x, os), kExitOk);
    const json j = json::parse(os.str());
    EXPECT_EQ(j["report"]["pathwise_violations"], 0);
    EXPECT_EQ(j["config"]["samples"], 5000);
}
