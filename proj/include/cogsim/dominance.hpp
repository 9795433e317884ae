#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cogsim/analytic.hpp"
#include "cogsim/channel.hpp"
#include "cogsim/engine.hpp"
#include "cogsim/errors.hpp"
#include "cogsim/random.hpp"
#include "cogsim/stats.hpp"

namespace cogsim {

// One draw of the coupling that puts the relay and no-cooperation service
// times of a packet on the same sample path. Index i of each sequence is slot
// i + 1; times are 1-based slot counts.
struct CoupledSample {
    std::vector<std::uint8_t> heard2;   // node-1 packet received by node 2
    std::vector<std::uint8_t> heard3;   // node-1 packet received by node 3
    std::vector<std::uint8_t> theta;    // independent helper coin
    std::vector<std::uint8_t> relay3;   // stand-in for node-2 reception at node 3
    std::int64_t first_heard = 0;       // first slot node 2 or node 3 hears node 1
    std::int64_t service_nc = 0;        // first slot node 3 hears node 1
    std::int64_t service_c = 0;         // relay service time on the same path
};

class CouplingSampler {
public:
    explicit CouplingSampler(const ErasureSpec& spec)
    {
        const double lost3_1 = spec.erasure_prob(Transmitter::node1, {3});
        const double lost3_2 = spec.erasure_prob(Transmitter::node2, {3});
        if (lost3_1 < lost3_2)
            throw ConfigError("coupling needs node-1 erasure at 3 >= node-2 erasure at 3");
        theta_zero_ = lost3_1 > 0.0 ? lost3_2 / lost3_1 : 0.0;
        // Joint law of (heard by 2, heard by 3), marginalized over node 4.
        const auto& tx1 = spec.tx1_pattern_probs();
        std::array<double, 4> pair{};
        for (unsigned mask = 0; mask < tx1.size(); ++mask) pair[mask & 3u] += tx1[mask];
        double acc = 0.0;
        for (unsigned i = 0; i < 4; ++i) cdf_[i] = (acc += pair[i]);
    }

    double theta_zero_probability() const { return theta_zero_; }

    CoupledSample draw(RandomStream& rng) const
    {
        CoupledSample s;
        bool c_done = false;
        for (std::int64_t t = 1;; ++t) {
            const double u = rng.uniform();
            unsigned mask = 3;
            for (unsigned i = 0; i < 4; ++i)
                if (u < cdf_[i]) {
                    mask = i;
                    break;
                }
            const std::uint8_t z2 = mask & 1u;
            const std::uint8_t z3 = (mask >> 1) & 1u;
            const std::uint8_t th = rng.uniform() < theta_zero_ ? 0 : 1;
            const std::uint8_t j = z3 ? 1 : th;
            s.heard2.push_back(z2);
            s.heard3.push_back(z3);
            s.theta.push_back(th);
            s.relay3.push_back(j);

            if (s.first_heard == 0) {
                if (z2 || z3) {
                    s.first_heard = t;
                    if (z3) {
                        s.service_c = t;
                        c_done = true;
                    }
                }
            } else if (!c_done && j) {
                s.service_c = t;
                c_done = true;
            }
            if (s.service_nc == 0 && z3) s.service_nc = t;
            if (c_done && s.service_nc != 0) return s;
        }
    }

private:
    std::array<double, 4> cdf_{};
    double theta_zero_ = 0.0;
};

inline CoupledSample draw_coupled(const ErasureSpec& spec, RandomStream& rng) { return CouplingSampler(spec).draw(rng); }

struct DominanceReport {
    std::size_t samples = 0;
    std::size_t violations = 0;       // draws with relay service > no-cooperation service
    double mean_service_nc = 0.0;
    double mean_service_c = 0.0;
    double relay3_zero_frequency = 0.0;  // should match node-2 erasure at 3
    double theta_corr_heard2 = 0.0;
    double theta_corr_heard3 = 0.0;
    KsResult nc_vs_geometric;          // coupled no-cooperation times vs geometric law
    KsResult nc_vs_no_cooperation;     // vs simulated no-cooperation protocol
    KsResult c_vs_simple_forwarding;   // coupled relay times vs simulated simple-forwarding protocol
};

// Primary service times from the protocol simulator, at least `count` of them.
inline std::vector<std::int64_t> protocol_service_times(const ErasureSpec& spec, Algorithm alg, std::size_t count,
                                                        std::uint64_t seed)
{
    const double mu = mu1_for(alg, spec);
    const double lambda = 0.5 * mu;
    Slot horizon = static_cast<Slot>(1.3 * static_cast<double>(count) / std::max(lambda, 1e-6)) + 1000;
    for (;;) {
        RunConfig c;
        c.alg = alg;
        c.channel = spec;
        c.arrivals = ArrivalProcess::bernoulli(lambda);
        c.horizon = horizon;
        c.warmup = 0;
        c.seed = seed;
        RunResult r = run(c);
        if (r.service_times.size() >= count) {
            r.service_times.resize(count);
            return {r.service_times.begin(), r.service_times.end()};
        }
        horizon *= 2;
    }
}

inline double correlation(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

inline DominanceReport dominance_report(const ErasureSpec& spec, std::size_t n_samples, std::uint64_t seed,
                                        double alpha = 0.01)
{
    if (n_samples < 1000) throw ConfigError("dominance report needs at least 1000 samples");
    const CouplingSampler sampler(spec);
    RandomStream rng(seed, StreamId::coupling);

    DominanceReport rep;
    rep.samples = n_samples;
    std::vector<std::int64_t> nc, c;
    nc.reserve(n_samples);
    c.reserve(n_samples);
    std::vector<double> th, z2, z3;
    std::size_t relay3_zero = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const CoupledSample s = sampler.draw(rng);
        if (s.service_c > s.service_nc) ++rep.violations;
        nc.push_back(s.service_nc);
        c.push_back(s.service_c);
        for (std::size_t k = 0; k < s.theta.size(); ++k) {
            th.push_back(s.theta[k]);
            z2.push_back(s.heard2[k]);
            z3.push_back(s.heard3[k]);
            relay3_zero += s.relay3[k] == 0;
        }
    }
    for (std::size_t i = 0; i < n_samples; ++i) {
        rep.mean_service_nc += static_cast<double>(nc[i]);
        rep.mean_service_c += static_cast<double>(c[i]);
    }
    rep.mean_service_nc /= static_cast<double>(n_samples);
    rep.mean_service_c /= static_cast<double>(n_samples);
    rep.relay3_zero_frequency = static_cast<double>(relay3_zero) / static_cast<double>(th.size());
    rep.theta_corr_heard2 = correlation(th, z2);
    rep.theta_corr_heard3 = correlation(th, z3);

    const double success = 1.0 - spec.erasure_prob(Transmitter::node1, {3});
    rep.nc_vs_geometric = ks_one_sample_discrete(
        nc, [success](std::int64_t k) { return k < 1 ? 0.0 : 1.0 - std::pow(1.0 - success, static_cast<double>(k)); },
        alpha);
    const auto sim_nc = protocol_service_times(spec, Algorithm::no_cooperation, n_samples, seed + 1);
    const auto sim_c = protocol_service_times(spec, Algorithm::simple_forwarding, n_samples, seed + 2);
    rep.nc_vs_no_cooperation = ks_two_sample(nc, sim_nc, alpha);
    rep.c_vs_simple_forwarding = ks_two_sample(c, sim_c, alpha);
    return rep;
}

} // namespace cogsim
