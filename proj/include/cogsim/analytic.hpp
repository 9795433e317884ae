#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cogsim/channel.hpp"
#include "cogsim/errors.hpp"
#include "cogsim/markov.hpp"
#include "cogsim/protocols.hpp"

namespace cogsim {

// ---------------------------------------------------------------------------
// Primary service rates

inline double mu1_no_cooperation(const ErasureSpec& spec) { return 1.0 - spec.erasure_prob(Transmitter::node1, {3}); }

// Service rate when node 2 relays packets it heard and node 3 missed. Also the
// rate of both coding algorithms (service times are identical).
inline double mu1_relay(const ErasureSummary& e)
{
    const double num = (1.0 - e.from2.at3) * (1.0 - e.from1.at23);
    const double den = 1.0 - e.from2.at3 + e.from1.at3 - e.from1.at23;
    return den > 0.0 ? num / den : 0.0;
}

inline double mu1_relay(const ErasureSpec& spec) { return mu1_relay(spec.summary()); }

// ---------------------------------------------------------------------------
// Busy and idle periods of the primary backlog

struct BusyIdle {
    double busy;
    double idle;
};

// `p_zero` is Pr(no arrival in a slot); the idle period is 1 / Pr(arrival).
inline BusyIdle busy_idle(double lambda1, double mu1, double p_zero)
{
    if (!(lambda1 >= 0.0)) throw ConfigError("negative arrival rate");
    if (!(lambda1 < mu1)) throw InstabilityError("arrival rate " + std::to_string(lambda1) +
                                                 " is not below the service rate " + std::to_string(mu1));
    const double p_arrival = 1.0 - p_zero;
    const double idle = p_arrival > 0.0 ? 1.0 / p_arrival : std::numeric_limits<double>::infinity();
    if (lambda1 == 0.0) return {0.0, idle};
    const double rho = lambda1 / mu1;
    return {rho / ((1.0 - rho) * p_arrival), idle};
}

// ---------------------------------------------------------------------------
// Generic renewal queue: a queue that may only transmit in some slots of each
// renewal cycle.

struct RenewalQueueParams {
    double mean_arrivals;   // packets arriving per cycle
    double mean_available;  // slots per cycle in which the queue may transmit
    double mean_cycle;      // cycle length in slots
    double mean_service;    // available slots a packet needs
};

inline double generic_queue_rate(const RenewalQueueParams& p)
{
    if (!(p.mean_cycle > 0.0)) throw ConfigError("generic queue: mean cycle length must be positive");
    if (p.mean_arrivals < 0.0 || p.mean_available < 0.0 || p.mean_service <= 0.0)
        throw ConfigError("generic queue: parameters must be nonnegative and the service mean positive");
    const double capacity = p.mean_available / p.mean_service;
    if (p.mean_arrivals <= capacity) return p.mean_arrivals / p.mean_cycle;
    return capacity / p.mean_cycle;
}

// ---------------------------------------------------------------------------
// Service-time chains of the coding algorithms. A packet's service time is
// the time between successive entries to `fresh`.

namespace service_state {
inline constexpr Eigen::Index fresh = 0;            // node 1 sends a new head-of-line packet
inline constexpr Eigen::Index relay_unheard = 1;    // node 2 holds it, node 4 does not
inline constexpr Eigen::Index relay_overheard = 2;  // node 2 and node 4 hold it (coding slot)
inline constexpr Eigen::Index retx_overheard = 3;   // node 1 resends, node 4 holds it
inline constexpr Eigen::Index retx = 4;             // node 1 resends, no listener holds it
} // namespace service_state

inline const std::vector<std::string>& service_state_labels()
{
    static const std::vector<std::string> labels{"fresh", "relay_unheard", "relay_overheard", "retx_overheard",
                                                 "retx"};
    return labels;
}

namespace detail {

// Node-1 attempt while no listener holds the packet (rows fresh and retx).
inline void node1_attempt_row(Eigen::MatrixXd& p, Eigen::Index row, const ErasureSummary& e)
{
    using namespace service_state;
    const auto& f = e.from1;
    p(row, fresh) = 1.0 - f.at3;
    p(row, relay_overheard) = f.at3 - f.at23 - f.at34 + f.at234;
    p(row, relay_unheard) = f.at34 - f.at234;
    p(row, retx_overheard) = f.at23 - f.at234;
    p(row, retx) = f.at234;
}

inline Eigen::MatrixXd coding_chain_base(const ErasureSummary& e)
{
    using namespace service_state;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(5, 5);
    node1_attempt_row(p, fresh, e);
    node1_attempt_row(p, retx, e);
    p(relay_overheard, fresh) = 1.0 - e.from2.at3;
    p(relay_overheard, relay_overheard) = e.from2.at3;
    p(retx_overheard, fresh) = 1.0 - e.from1.at3;
    p(retx_overheard, relay_overheard) = e.from1.at3 - e.from1.at23;
    p(retx_overheard, retx_overheard) = e.from1.at23;
    return p;
}

} // namespace detail

inline MarkovChainModel build_chain_network_coding(const ErasureSpec& spec)
{
    using namespace service_state;
    const ErasureSummary e = spec.summary();
    Eigen::MatrixXd p = detail::coding_chain_base(e);
    p(relay_unheard, fresh) = 1.0 - e.from2.at3;
    p(relay_unheard, relay_overheard) = e.from2.at3 - e.from2.at34;
    p(relay_unheard, relay_unheard) = e.from2.at34;
    return {service_state_labels(), p};
}

// While node 2 holds an unheard packet, node 1 sends it with probability q
// and node 2 otherwise, independently each slot.
inline MarkovChainModel build_chain_randomized_relay(const ErasureSpec& spec, double q)
{
    using namespace service_state;
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("mixing probability q outside [0,1]");
    const ErasureSummary e = spec.summary();
    Eigen::MatrixXd p = detail::coding_chain_base(e);
    const double lost3 = q * e.from1.at3 + (1.0 - q) * e.from2.at3;
    const double lost34 = q * e.from1.at34 + (1.0 - q) * e.from2.at34;
    p(relay_unheard, fresh) = 1.0 - lost3;
    p(relay_unheard, relay_overheard) = lost3 - lost34;
    p(relay_unheard, relay_unheard) = lost34;
    return {service_state_labels(), p};
}

// ---------------------------------------------------------------------------
// Closed forms for the coding algorithms

namespace detail {

// Probability a fresh packet ends its node-1 phase in the unheard relay buffer.
inline double unheard_entry_mass(const ErasureSummary& e) { return e.from1.at34 - e.from1.at234; }

inline double mixed_loss34(const ErasureSummary& e, double q)
{
    return q * e.from1.at34 + (1.0 - q) * e.from2.at34;
}

inline double mixing_factor(const ErasureSummary& e, double q)
{
    if (q == 0.0) return 0.0;
    const double den = 1.0 - mixed_loss34(e, q);
    if (!(den > 0.0))
        throw ConfigError("non-operational channel: the unheard relay state is never left (both joint "
                          "erasures at 3 and 4 equal 1)");
    return q / den;
}

} // namespace detail

// Fraction of slots that start a new primary service (= service rate).
inline double pi_fresh_closed_form(const ErasureSummary& e) { return mu1_relay(e); }

// Fraction of slots in the coding-opportunity state under network coding.
inline double pi_overheard_closed_form(const ErasureSummary& e)
{
    const auto& f = e.from1;
    const double bracket = (1.0 - f.at234) / (1.0 - f.at23) + (f.at34 - f.at234) / (1.0 - e.from2.at34);
    return 1.0 - bracket / (1.0 - f.at234) * (1.0 - f.at23) * (1.0 - e.from2.at3) /
                     (1.0 + f.at3 - e.from2.at3 - f.at23);
}

inline double c1(const ErasureSummary& e, double q)
{
    const double mass = detail::unheard_entry_mass(e);
    const double gain = e.from1.at3 - e.from2.at3;
    if (mass == 0.0 || gain == 0.0) return 0.0;
    return gain * mass / ((1.0 - e.from1.at234) * (1.0 - e.from2.at3)) * detail::mixing_factor(e, q);
}

inline double c2(const ErasureSummary& e, double q)
{
    const double mass = detail::unheard_entry_mass(e);
    const double gap = e.from2.at34 - e.from1.at34;
    if (mass == 0.0 || gap == 0.0) return 0.0;
    return mass * gap / ((1.0 - e.from1.at234) * (1.0 - e.from2.at34)) * detail::mixing_factor(e, q);
}

// 1 / pi_fresh(q): mean service time of the randomized relay.
inline double inverse_pi_fresh(const ErasureSummary& e, double q)
{
    return (1.0 + e.from1.at3 - e.from2.at3 - e.from1.at23) / ((1.0 - e.from2.at3) * (1.0 - e.from1.at23)) + c1(e, q);
}

// (1 - pi_overheard(q)) / pi_fresh(q): mean non-coding slots per service.
inline double non_coding_slots_per_service(const ErasureSummary& e, double q)
{
    const auto& f = e.from1;
    const double mass = detail::unheard_entry_mass(e);
    const double unheard = mass == 0.0 ? 0.0 : mass / ((1.0 - e.from2.at34) * (1.0 - f.at234));
    return unheard + 1.0 / (1.0 - f.at23) - c2(e, q);
}

// d(1/pi_fresh)/dq as printed with the monotonicity argument.
inline double inverse_pi_fresh_derivative(const ErasureSummary& e, double q)
{
    const auto& f = e.from1;
    const double mass = detail::unheard_entry_mass(e);
    const double shifted = e.from2.at34 + q * (f.at34 - e.from2.at34) - 1.0;
    return (f.at3 - e.from2.at3) * mass * (1.0 - e.from2.at34) /
           ((1.0 - e.from2.at3) * shifted * shifted * (1.0 - f.at234));
}

// ---------------------------------------------------------------------------
// Throughput regions

// a * r1 + b * r2 <= 1
struct HalfPlane {
    double a;
    double b;
};

struct BoundaryPoint {
    double r1 = 0.0;
    double r2 = 0.0;
    double q = 0.0;        // mixing probability attaining r2 (randomized relay)
    bool feasible = true;  // false when r1 is outside the stability region
};

class ThroughputRegion {
public:
    using ParametricConstraints = std::function<std::array<HalfPlane, 2>(double q)>;

    ThroughputRegion(Algorithm alg, std::vector<HalfPlane> constraints)
        : alg_(alg), constraints_(std::move(constraints))
    {
        r1_limit_ = std::numeric_limits<double>::infinity();
        for (const auto& h : constraints_)
            if (h.a > 0.0) r1_limit_ = std::min(r1_limit_, 1.0 / h.a);
    }

    ThroughputRegion(Algorithm alg, ParametricConstraints family, double r1_limit)
        : alg_(alg), family_(std::move(family)), r1_limit_(r1_limit)
    {
    }

    Algorithm algorithm() const { return alg_; }
    bool parametric() const { return static_cast<bool>(family_); }
    // Fixed constraints; empty for a q-parameterized region.
    const std::vector<HalfPlane>& constraints() const { return constraints_; }
    std::array<HalfPlane, 2> constraints_at(double q) const { return family_(q); }
    // Largest sustainable primary rate.
    double r1_limit() const { return r1_limit_; }

    BoundaryPoint r2_max(double r1) const
    {
        if (r1 < 0.0) return {r1, 0.0, 0.0, false};
        if (!parametric()) {
            const double v = min_bound(constraints_.begin(), constraints_.end(), r1);
            return {r1, std::max(0.0, v), 0.0, v >= 0.0};
        }
        const auto [q, v] = best_q(r1);
        return {r1, std::max(0.0, v), q, v >= 0.0};
    }

    std::vector<BoundaryPoint> boundary(std::size_t samples = 201) const { return boundary(samples, r1_limit_); }

    std::vector<BoundaryPoint> boundary(std::size_t samples, double r1_hi) const
    {
        std::vector<BoundaryPoint> out;
        if (samples == 0) return out;
        if (samples == 1) return {r2_max(0.0)};
        for (std::size_t i = 0; i < samples; ++i)
            out.push_back(r2_max(r1_hi * static_cast<double>(i) / static_cast<double>(samples - 1)));
        return out;
    }

    bool contains(double r1, double r2) const
    {
        if (r1 < 0.0 || r2 < 0.0) return false;
        const BoundaryPoint p = r2_max(r1);
        return p.feasible && r2 <= p.r2 + 1e-12;
    }

    // Value of min-constraint r2 bound for a given q (randomized relay).
    double bound_at(double r1, double q) const
    {
        const auto c = family_(q);
        return min_bound(c.begin(), c.end(), r1);
    }

    // Coarse grid then golden-section refinement around the best grid point.
    // Ties resolve to the smallest q.
    std::pair<double, double> best_q(double r1) const
    {
        constexpr int kGrid = 101;
        constexpr double kImprove = 1e-12;
        int best_i = 0;
        double best_v = bound_at(r1, 0.0);
        for (int i = 1; i < kGrid; ++i) {
            const double v = bound_at(r1, static_cast<double>(i) / (kGrid - 1));
            if (v > best_v + kImprove) {
                best_v = v;
                best_i = i;
            }
        }
        double lo = std::max(0, best_i - 1) / static_cast<double>(kGrid - 1);
        double hi = std::min(kGrid - 1, best_i + 1) / static_cast<double>(kGrid - 1);
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - inv_phi * (hi - lo);
        double x2 = lo + inv_phi * (hi - lo);
        double f1 = bound_at(r1, x1);
        double f2 = bound_at(r1, x2);
        for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = bound_at(r1, x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = bound_at(r1, x1);
            }
        }
        const double q_ref = 0.5 * (lo + hi);
        const double v_ref = bound_at(r1, q_ref);
        const double q_best = best_i / static_cast<double>(kGrid - 1);
        if (v_ref > best_v + kImprove) return {q_ref, v_ref};
        return {q_best, best_v};
    }

private:
    template <class It>
    static double min_bound(It first, It last, double r1)
    {
        double v = std::numeric_limits<double>::infinity();
        for (; first != last; ++first) v = std::min(v, (1.0 - first->a * r1) / first->b);
        return v;
    }

    Algorithm alg_;
    std::vector<HalfPlane> constraints_;
    ParametricConstraints family_;
    double r1_limit_ = 0.0;
};

namespace detail {

inline void require(bool ok, const char* what)
{
    if (!ok) throw ConfigError(std::string("non-operational channel: ") + what);
}

inline void require_relay_operational(const ErasureSummary& e)
{
    require(e.from1.at23 < 1.0, "node 1 never reaches node 2 or node 3");
    require(e.from2.at3 < 1.0, "node 2 never reaches node 3");
    require(e.from2.at4 < 1.0, "node 2 never reaches node 4");
}

inline void require_coding_operational(const ErasureSummary& e)
{
    require_relay_operational(e);
    require(e.from1.at234 < 1.0, "node 1 is never heard");
    require(e.from2.at34 < 1.0 || e.from1.at34 == e.from1.at234,
            "the unheard relay state is entered but never left");
}

} // namespace detail

inline ThroughputRegion region_no_cooperation(const ErasureSpec& spec)
{
    const ErasureSummary e = spec.summary();
    detail::require(e.from1.at3 < 1.0, "node 1 never reaches node 3");
    detail::require(e.from2.at4 < 1.0, "node 2 never reaches node 4");
    return {Algorithm::no_cooperation, {{1.0 / (1.0 - e.from1.at3), 1.0 / (1.0 - e.from2.at4)}}};
}

inline ThroughputRegion region_simple_forwarding(const ErasureSpec& spec)
{
    const ErasureSummary e = spec.summary();
    detail::require_relay_operational(e);
    return {Algorithm::simple_forwarding, {{1.0 / mu1_relay(e), 1.0 / (1.0 - e.from2.at4)}}};
}

inline std::array<HalfPlane, 2> randomized_relay_constraints(const ErasureSummary& e, double q)
{
    return {HalfPlane{inverse_pi_fresh(e, q), 1.0 / (1.0 - e.from2.at34)},
            HalfPlane{non_coding_slots_per_service(e, q), 1.0 / (1.0 - e.from2.at4)}};
}

inline ThroughputRegion region_network_coding(const ErasureSpec& spec)
{
    const ErasureSummary e = spec.summary();
    detail::require_coding_operational(e);
    const auto c = randomized_relay_constraints(e, 0.0);
    return {Algorithm::network_coding, {c[0], c[1]}};
}

inline ThroughputRegion region_randomized_relay(const ErasureSpec& spec)
{
    const ErasureSummary e = spec.summary();
    detail::require_coding_operational(e);
    if (e.from1.at34 >= 1.0 && e.from2.at34 >= 1.0 && e.from1.at34 > e.from1.at234)
        throw ConfigError("non-operational channel: the unheard relay state is never left");
    // Largest service rate over q.
    double limit = 0.0;
    for (int i = 0; i <= 1000; ++i) limit = std::max(limit, 1.0 / inverse_pi_fresh(e, i / 1000.0));
    return {Algorithm::randomized_relay, [e](double q) { return randomized_relay_constraints(e, q); }, limit};
}

inline ThroughputRegion region_for(Algorithm alg, const ErasureSpec& spec)
{
    switch (alg) {
    case Algorithm::no_cooperation: return region_no_cooperation(spec);
    case Algorithm::simple_forwarding: return region_simple_forwarding(spec);
    case Algorithm::network_coding: return region_network_coding(spec);
    case Algorithm::randomized_relay: return region_randomized_relay(spec);
    }
    throw ConfigError("unknown algorithm");
}

inline double mu1_for(Algorithm alg, const ErasureSpec& spec)
{
    return alg == Algorithm::no_cooperation ? mu1_no_cooperation(spec) : mu1_relay(spec);
}

// Mean primary service time; q only matters for the randomized relay.
inline double mean_service_time(Algorithm alg, const ErasureSpec& spec, double q = 0.0)
{
    if (alg == Algorithm::randomized_relay) return inverse_pi_fresh(spec.summary(), q);
    return 1.0 / mu1_for(alg, spec);
}

// ---------------------------------------------------------------------------
// Monotonicity of the randomized relay's mean service time in q

struct PhiCheck {
    bool nondecreasing = true;
    double min_slope = 0.0;          // smallest forward-difference slope on [0,1]
    double max_formula_error = 0.0;  // relative error of the printed derivative vs central differences
    bool formula_matches = true;
};

inline PhiCheck derivative_check_phi(const ErasureSpec& spec, int grid = 100, double step = 1e-4)
{
    const ErasureSummary e = spec.summary();
    const auto phi = [&](double q) { return 1.0 / build_chain_randomized_relay(spec, q).pi(service_state::fresh); };
    PhiCheck out;
    out.min_slope = std::numeric_limits<double>::infinity();
    double prev = phi(0.0);
    for (int i = 1; i <= grid; ++i) {
        const double q = static_cast<double>(i) / grid;
        const double cur = phi(q);
        out.min_slope = std::min(out.min_slope, (cur - prev) * grid);
        prev = cur;
        if (i < grid) {
            const double numeric = (phi(q + step) - phi(q - step)) / (2.0 * step);
            const double printed = inverse_pi_fresh_derivative(e, q);
            const double err = std::abs(numeric - printed) / std::max(std::abs(printed), 1e-3);
            out.max_formula_error = std::max(out.max_formula_error, err);
        }
    }
    out.nondecreasing = out.min_slope >= -1e-9;
    out.formula_matches = out.max_formula_error < 1e-6;
    return out;
}

} // namespace cogsim
