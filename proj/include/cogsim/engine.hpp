#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cogsim/channel.hpp"
#include "cogsim/errors.hpp"
#include "cogsim/protocols.hpp"
#include "cogsim/random.hpp"
#include "cogsim/stats.hpp"
#include "cogsim/traffic.hpp"

namespace cogsim {

struct RunConfig {
    Algorithm alg = Algorithm::no_cooperation;
    ErasureSpec channel;
    ArrivalProcess arrivals;
    double q = 0.0;              // randomized relay only
    Slot horizon = 1'000'000;
    Slot warmup = -1;            // negative: 10% of horizon
    std::uint64_t seed = 1;

    bool record_deliveries = false;
    bool abort_on_violation = true;
    std::size_t trajectory_points = 0;  // samples of the primary backlog over the run
    std::ostream* trace = nullptr;      // per-slot CSV rows when set

    Slot effective_warmup() const { return warmup < 0 ? horizon / 10 : warmup; }

    void validate() const
    {
        if (horizon <= 0) throw ConfigError("horizon must be positive");
        if (effective_warmup() >= horizon) throw ConfigError("warmup must be shorter than the horizon");
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("mixing probability q outside [0,1]");
    }
};

struct RunMetrics {
    double r1 = 0.0;
    double r2 = 0.0;
    std::uint64_t primary_delivered = 0;
    std::uint64_t secondary_delivered = 0;
    Slot measured_slots = 0;

    double service_mean = 0.0;
    double service_p50 = 0.0;
    double service_p90 = 0.0;
    double service_p99 = 0.0;
    Slot service_max = 0;

    double busy_mean = 0.0;
    double idle_mean = 0.0;
    std::uint64_t busy_periods = 0;
    std::uint64_t idle_periods = 0;

    std::size_t backlog_max = 0;
    double backlog_mean = 0.0;

    std::uint64_t violations = 0;
};

struct TrajectoryPoint {
    Slot slot;
    std::size_t backlog;
};

struct RunResult {
    RunConfig config;
    RunMetrics metrics;
    std::vector<Slot> service_times;    // post-warmup primary deliveries, in delivery order
    std::vector<Delivery> deliveries;   // all deliveries when record_deliveries is set
    std::vector<TrajectoryPoint> trajectory;
};

// One row of the optional per-slot trace.
struct TraceRow {
    Slot slot = 0;
    Transmitter transmitter = Transmitter::idle;
    char payload = '-';                 // P primary, S secondary, C coded
    NodeSet received_by;
    std::size_t q1 = 0;
    bool relay = false;
    bool relay_unheard = false;
    bool relay_overheard = false;
    std::size_t coding_queue = 0;
    bool node4_copy = false;
};

inline constexpr const char* kTraceHeader =
    "slot,transmitter,payload,received_by,q1,relay,relay_unheard,relay_overheard,coding_queue,node4_copy";

inline void write_trace_row(std::ostream& os, const TraceRow& r)
{
    os << r.slot << ',' << node_id(r.transmitter) << ',' << r.payload << ',' << r.received_by.to_string() << ','
       << r.q1 << ',' << r.relay << ',' << r.relay_unheard << ',' << r.relay_overheard << ','
       << r.coding_queue << ',' << r.node4_copy << '\n';
}

// Slotted simulation of one algorithm. Each slot: arrivals, schedule (node 2
// senses q1), channel draw, feedback and state update.
class Simulation {
public:
    explicit Simulation(RunConfig config)
        : config_(std::move(config)),
          state_(config_.alg),
          arrival_rng_(config_.seed, StreamId::arrivals),
          channel_rng_(config_.seed, StreamId::channel),
          coin_rng_(config_.seed, StreamId::coin)
    {
        config_.validate();
        warmup_ = config_.effective_warmup();
        if (config_.trajectory_points > 0)
            stride_ = std::max<Slot>(1, config_.horizon / static_cast<Slot>(config_.trajectory_points));
        if (config_.trace) *config_.trace << kTraceHeader << '\n';
    }

    const SystemState& state() const { return state_; }
    const RunConfig& config() const { return config_; }

    void step()
    {
        const Slot t = state_.slot;
        state_.enqueue_arrivals(config_.arrivals.draw(arrival_rng_));
        track_busy_idle(t, state_.primary_in_system() > 0);

        const SlotDecision decision = schedule(state_, config_.q, coin_rng_);
        const ReceptionEvent event = config_.channel.sample(decision.transmitter, channel_rng_);
        remember(t, decision, event);

        if (decision.transmitter == Transmitter::idle) violation("idle slot with a saturated secondary queue");
        if (decision.transmitter == Transmitter::node1 && decision.coded()) violation("node 1 sent a coded packet");

        slot_deliveries_.clear();
        apply_outcome(state_, decision, event, slot_deliveries_);
        for (const Delivery& d : slot_deliveries_) account(d);

        if (auto broken = check_state_invariants(state_)) violation(*broken);
        if ((t & 1023) == 0 && state_.coding_queue != state_.node3_side_info)
            violation("node 3 side information differs from the node-2 coding queue");

        const std::size_t backlog = state_.primary_in_system();
        if (t >= warmup_) {
            backlog_sum_ += static_cast<double>(backlog);
            result_.metrics.backlog_max = std::max(result_.metrics.backlog_max, backlog);
        }
        if (stride_ > 0 && t % stride_ == 0) result_.trajectory.push_back({t, backlog});
    }

    RunResult finish() &&
    {
        RunMetrics& m = result_.metrics;
        const Slot measured = state_.slot - warmup_;
        m.measured_slots = measured;
        if (measured > 0) {
            m.r1 = static_cast<double>(m.primary_delivered) / static_cast<double>(measured);
            m.r2 = static_cast<double>(m.secondary_delivered) / static_cast<double>(measured);
            m.backlog_mean = backlog_sum_ / static_cast<double>(measured);
        }
        if (!result_.service_times.empty()) {
            std::vector<Slot> sorted = result_.service_times;
            std::sort(sorted.begin(), sorted.end());
            double sum = 0.0;
            for (Slot s : sorted) sum += static_cast<double>(s);
            m.service_mean = sum / static_cast<double>(sorted.size());
            m.service_p50 = quantile_sorted(sorted, 0.50);
            m.service_p90 = quantile_sorted(sorted, 0.90);
            m.service_p99 = quantile_sorted(sorted, 0.99);
            m.service_max = sorted.back();
        }
        m.busy_periods = busy_count_;
        m.idle_periods = idle_count_;
        m.busy_mean = busy_count_ ? busy_total_ / static_cast<double>(busy_count_) : 0.0;
        m.idle_mean = idle_count_ ? idle_total_ / static_cast<double>(idle_count_) : 0.0;
        result_.config = config_;
        result_.config.trace = nullptr;
        return std::move(result_);
    }

private:
    void account(const Delivery& d)
    {
        if (d.session == Session::primary) {
            if (last_primary_ && d.id <= *last_primary_) violation("primary packets delivered out of order");
            last_primary_ = d.id;
        }
        if (config_.record_deliveries) result_.deliveries.push_back(d);
        if (d.slot < warmup_) return;
        if (d.session == Session::primary) {
            ++result_.metrics.primary_delivered;
            result_.service_times.push_back(d.service);
        } else {
            ++result_.metrics.secondary_delivered;
        }
    }

    // Maximal runs of slots with the primary system nonempty (busy) or empty
    // (idle); only runs starting after warmup and ending before the horizon count.
    void track_busy_idle(Slot t, bool busy)
    {
        if (t == 0) {
            run_busy_ = busy;
            run_start_ = 0;
            return;
        }
        if (busy == run_busy_) return;
        if (run_start_ >= warmup_) {
            const double len = static_cast<double>(t - run_start_);
            if (run_busy_) {
                busy_total_ += len;
                ++busy_count_;
            } else {
                idle_total_ += len;
                ++idle_count_;
            }
        }
        run_busy_ = busy;
        run_start_ = t;
    }

    void remember(Slot t, const SlotDecision& d, const ReceptionEvent& ev)
    {
        TraceRow& row = tail_[static_cast<std::size_t>(t) % tail_.size()];
        row.slot = t;
        row.transmitter = d.transmitter;
        row.payload = d.coded() ? 'C'
                      : std::holds_alternative<PlainPayload>(d.payload)
                          ? (std::get<PlainPayload>(d.payload).session == Session::primary ? 'P' : 'S')
                          : '-';
        row.received_by = ev.received_by;
        row.q1 = state_.q1.size();
        row.relay = state_.relay.has_value();
        row.relay_unheard = state_.relay_unheard.has_value();
        row.relay_overheard = state_.relay_overheard.has_value();
        row.coding_queue = state_.coding_queue.size();
        row.node4_copy = state_.node4_copy.has_value();
        if (config_.trace) write_trace_row(*config_.trace, row);
    }

    void violation(const std::string& what)
    {
        ++result_.metrics.violations;
        if (!config_.abort_on_violation) return;
        std::ostringstream msg;
        msg << "invariant violated at slot " << state_.slot << ": " << what << "\nlast slots:\n" << kTraceHeader << '\n';
        const Slot last = state_.slot;
        for (Slot t = std::max<Slot>(0, last - static_cast<Slot>(tail_.size()) + 1); t <= last; ++t) {
            const TraceRow& row = tail_[static_cast<std::size_t>(t) % tail_.size()];
            if (row.slot == t) write_trace_row(msg, row);
        }
        throw InvariantViolation(msg.str());
    }

    RunConfig config_;
    SystemState state_;
    RandomStream arrival_rng_;
    RandomStream channel_rng_;
    RandomStream coin_rng_;
    Slot warmup_ = 0;
    Slot stride_ = 0;

    RunResult result_;
    std::vector<Delivery> slot_deliveries_;
    std::optional<PacketId> last_primary_;
    std::array<TraceRow, 8> tail_{};
    double backlog_sum_ = 0.0;

    bool run_busy_ = false;
    Slot run_start_ = 0;
    double busy_total_ = 0.0;
    double idle_total_ = 0.0;
    std::uint64_t busy_count_ = 0;
    std::uint64_t idle_count_ = 0;
};

inline RunResult run(const RunConfig& config)
{
    Simulation sim(config);
    for (Slot t = 0; t < config.horizon; ++t) sim.step();
    return std::move(sim).finish();
}

// Busy/idle period means of the primary system backlog.
struct BusyIdleStats {
    double busy_mean = 0.0;
    double idle_mean = 0.0;
    std::uint64_t busy_periods = 0;
    std::uint64_t idle_periods = 0;
    bool sufficient = false;  // at least kMinCycles complete busy and idle periods
};

inline constexpr std::uint64_t kMinCycles = 100;

inline BusyIdleStats busy_idle_stats(const RunResult& run)
{
    const RunMetrics& m = run.metrics;
    return {m.busy_mean, m.idle_mean, m.busy_periods, m.idle_periods,
            m.busy_periods >= kMinCycles && m.idle_periods >= kMinCycles};
}

// Worker count for sweeps: COGSIM_THREADS if set, else hardware concurrency.
inline unsigned worker_count()
{
    if (const char* env = std::getenv("COGSIM_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates fn(0..n-1) on a bounded pool; results come back in index order.
template <class Fn>
auto parallel_map(std::size_t n, Fn fn, unsigned threads = worker_count())
{
    using R = decltype(fn(std::size_t{0}));
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned pool = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
    if (pool <= 1) {
        work();
    } else {
        std::vector<std::jthread> workers;
        for (unsigned i = 0; i < pool; ++i) workers.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

inline std::vector<RunResult> run_many(const std::vector<RunConfig>& configs)
{
    return parallel_map(configs.size(), [&](std::size_t i) { return run(configs[i]); });
}

struct StabilityVerdict {
    double lambda = 0.0;
    bool stable = true;
    double slope = 0.0;       // backlog growth, packets per slot, over the last half
    double threshold = 0.0;
    std::size_t final_backlog = 0;
    double mean_backlog = 0.0;
    std::size_t max_backlog = 0;
};

// Unstable iff the least-squares backlog slope over the second half of the
// horizon exceeds 10 / sqrt(horizon).
inline StabilityVerdict stability_verdict(const RunResult& run, double lambda)
{
    StabilityVerdict v;
    v.lambda = lambda;
    v.threshold = 10.0 / std::sqrt(static_cast<double>(run.config.horizon));
    std::vector<double> xs, ys;
    for (const auto& p : run.trajectory) {
        if (p.slot < run.config.horizon / 2) continue;
        xs.push_back(static_cast<double>(p.slot));
        ys.push_back(static_cast<double>(p.backlog));
    }
    v.slope = least_squares_slope(xs, ys);
    v.stable = !(v.slope > v.threshold);
    v.final_backlog = run.trajectory.empty() ? 0 : run.trajectory.back().backlog;
    v.mean_backlog = run.metrics.backlog_mean;
    v.max_backlog = run.metrics.backlog_max;
    return v;
}

inline std::vector<StabilityVerdict> stability_probe(const RunConfig& base, const std::vector<double>& lambda_grid)
{
    for (double l : lambda_grid)
        if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("arrival-rate grid must lie in [0,1]");
    return parallel_map(lambda_grid.size(), [&](std::size_t i) {
        RunConfig c = base;
        c.arrivals = ArrivalProcess::bernoulli(lambda_grid[i]);
        if (c.trajectory_points == 0) c.trajectory_points = 2000;
        return stability_verdict(run(c), lambda_grid[i]);
    });
}

} // namespace cogsim
