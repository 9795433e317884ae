// Batch front end: simulate, region, sweep, validate, dominance.
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "cogsim/cogsim.hpp"

namespace {

struct Options {
    std::string spec_path;
    std::string algs;
    std::string lambda;
    std::string q = "auto";
    long long horizon = 1'000'000;
    long long warmup = -1;
    std::string seeds = "1";
    std::string out;
    std::string format = "csv";
    std::size_t samples = 100'000;
    std::size_t boundary_samples = 201;
    std::string trace;
};

void add_common(CLI::App* sub, Options& o, bool needs_algs)
{
    sub->add_option("--spec", o.spec_path, "channel spec JSON file")->required();
    auto* alg = sub->add_option("--alg", o.algs, "algorithms, e.g. 1,3,4,5");
    if (needs_algs) alg->required();
    sub->add_option("--seed", o.seeds, "seed or comma-separated seeds");
    sub->add_option("--out", o.out, "output file (default stdout)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_sim(CLI::App* sub, Options& o)
{
    sub->add_option("--lambda", o.lambda, "primary arrival rate a:b:step or a single value");
    sub->add_option("--q", o.q, "mixing probability for algorithm 5: a:b:step, a value, or auto");
    sub->add_option("--horizon", o.horizon, "slots per run");
    sub->add_option("--warmup", o.warmup, "discarded slots (default 10% of the horizon)");
}

cogsim::ExperimentSpec resolve(const std::string& command, const Options& o)
{
    using namespace cogsim;
    ExperimentSpec x;
    x.command = command;
    x.spec_path = o.spec_path;
    x.spec = load_spec_file(o.spec_path);
    x.algorithms = parse_algorithms(o.algs);
    if (!o.lambda.empty()) x.lambdas = parse_grid(o.lambda, "lambda");
    x.q_auto = o.q == "auto";
    if (!x.q_auto) x.q_grid = parse_grid(o.q, "q");
    x.horizon = o.horizon;
    x.warmup = o.warmup;
    x.seeds = parse_seeds(o.seeds);
    x.out_path = o.out;
    x.format = format_from_string(o.format);
    x.samples = o.samples;
    x.boundary_samples = o.boundary_samples;
    return x;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Slotted cooperative relay simulator and throughput-region calculator"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "run one simulation and print its metrics");
    add_common(simulate, o, true);
    add_sim(simulate, o);
    simulate->add_option("--trace", o.trace, "write a per-slot CSV trace to this file");

    auto* region = app.add_subcommand("region", "analytic throughput-region boundaries");
    add_common(region, o, true);
    region->add_option("--samples", o.boundary_samples, "boundary points per algorithm");

    auto* sweep = app.add_subcommand("sweep", "simulate over lambda x algorithm x q x seed");
    add_common(sweep, o, true);
    add_sim(sweep, o);

    auto* validate = app.add_subcommand("validate", "chain, region, simulation and coupling checks");
    add_common(validate, o, false);
    validate->add_option("--horizon", o.horizon, "slots per simulation check");

    auto* dominance = app.add_subcommand("dominance", "coupled service-time dominance report (JSON)");
    add_common(dominance, o, false);
    dominance->add_option("--samples", o.samples, "coupled draws");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cogsim::kExitConfigError;
    }

    try {
        const std::string command = app.get_subcommands().front()->get_name();
        if (o.algs.empty() && (command == "validate" || command == "dominance")) o.algs = "1,3,4,5";
        cogsim::ExperimentSpec x = resolve(command, o);
        if (command == "dominance") x.format = cogsim::OutputFormat::json;

        std::ofstream file;
        if (!x.out_path.empty()) {
            file.open(x.out_path);
            if (!file) throw cogsim::ConfigError("cannot write " + x.out_path);
        }
        std::ostream& os = x.out_path.empty() ? std::cout : file;

        if (command == "simulate") {
            std::ofstream trace;
            if (!o.trace.empty()) {
                trace.open(o.trace);
                if (!trace) throw cogsim::ConfigError("cannot write " + o.trace);
            }
            return cogsim::cmd_simulate(x, os, o.trace.empty() ? nullptr : &trace);
        }
        if (command == "region") return cogsim::cmd_region(x, os);
        if (command == "sweep") return cogsim::cmd_sweep(x, os);
        if (command == "validate") return cogsim::cmd_validate(x, os);
        return cogsim::cmd_dominance(x, os);
    } catch (const cogsim::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return cogsim::kExitConfigError;
    } catch (const cogsim::InstabilityError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return cogsim::kExitConfigError;
    } catch (const cogsim::InvariantViolation& e) {
        std::cerr << "validation failure: " << e.what() << '\n';
        return cogsim::kExitValidationFailure;
    }
}
