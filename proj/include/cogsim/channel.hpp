#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>

#include "cogsim/errors.hpp"
#include "cogsim/random.hpp"

namespace cogsim {

enum class Transmitter : std::uint8_t { idle = 0, node1 = 1, node2 = 2 };

inline int node_id(Transmitter tx) { return static_cast<int>(tx); }

// Subset of the four nodes {1,2,3,4}; bit (k-1) marks node k.
class NodeSet {
public:
    constexpr NodeSet() = default;

    NodeSet(std::initializer_list<int> nodes)
    {
        for (int k : nodes) insert(k);
    }

    static constexpr NodeSet from_bits(std::uint8_t bits) { return NodeSet(bits); }

    void insert(int node)
    {
        if (node < 1 || node > 4) throw ConfigError("node id out of range: " + std::to_string(node));
        bits_ = static_cast<std::uint8_t>(bits_ | (1u << (node - 1)));
    }

    constexpr bool contains(int node) const { return node >= 1 && node <= 4 && (bits_ >> (node - 1)) & 1u; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr bool intersects(NodeSet other) const { return (bits_ & other.bits_) != 0; }
    constexpr bool subset_of(NodeSet other) const { return (bits_ & ~other.bits_) == 0; }
    constexpr std::uint8_t bits() const { return bits_; }

    friend constexpr bool operator==(NodeSet, NodeSet) = default;

    std::string to_string() const
    {
        std::string out = "{";
        for (int k = 1; k <= 4; ++k) {
            if (!contains(k)) continue;
            if (out.size() > 1) out += ' ';
            out += static_cast<char>('0' + k);
        }
        return out + "}";
    }

private:
    constexpr explicit NodeSet(std::uint8_t bits) : bits_(bits) {}
    std::uint8_t bits_ = 0;
};

// Outcome of one transmission: which listeners got the packet.
struct ReceptionEvent {
    Transmitter transmitter = Transmitter::idle;
    NodeSet received_by;

    bool received(int node) const { return received_by.contains(node); }
};

// Listener order for the pattern tables. Bit i of a tx1 pattern index is
// node kTx1Listeners[i]; likewise for tx2.
inline constexpr std::array<int, 3> kTx1Listeners{2, 3, 4};
inline constexpr std::array<int, 2> kTx2Listeners{3, 4};

inline NodeSet tx1_pattern_set(unsigned mask)
{
    NodeSet s;
    for (unsigned i = 0; i < kTx1Listeners.size(); ++i)
        if (mask & (1u << i)) s.insert(kTx1Listeners[i]);
    return s;
}

inline NodeSet tx2_pattern_set(unsigned mask)
{
    NodeSet s;
    for (unsigned i = 0; i < kTx2Listeners.size(); ++i)
        if (mask & (1u << i)) s.insert(kTx2Listeners[i]);
    return s;
}

// Per-node erasure marginals for a channel with independent erasures.
struct IndependentMarginals {
    double tx1_at2 = 0.0;
    double tx1_at3 = 0.0;
    double tx1_at4 = 0.0;
    double tx2_at3 = 0.0;
    double tx2_at4 = 0.0;
};

// The erasure probabilities every closed form needs, derived once.
struct ErasureSummary {
    struct FromNode1 {
        double at2, at3, at4, at23, at24, at34, at234;
    } from1;
    struct FromNode2 {
        double at3, at4, at34;
    } from2;
};

inline constexpr double kNormalizationTolerance = 1e-12;

// Joint law of the per-slot reception pattern of each transmitter. The
// exact-reception-set distribution is the canonical form; every erasure
// probability is a marginal of it.
class ErasureSpec {
public:
    using Tx1Table = std::array<double, 8>;
    using Tx2Table = std::array<double, 4>;

    // Erasure-free channel: every listener receives every packet.
    ErasureSpec() : ErasureSpec(Tx1Table{0, 0, 0, 0, 0, 0, 0, 1}, Tx2Table{0, 0, 0, 1}, true) {}

    static ErasureSpec from_joint_table(const Tx1Table& tx1, const Tx2Table& tx2, bool admissible = false)
    {
        validate_table(tx1.data(), tx1.size(), "tx1");
        validate_table(tx2.data(), tx2.size(), "tx2");
        ErasureSpec spec(tx1, tx2, admissible);
        if (admissible && !spec.satisfies_relay_condition()) {
            throw ConfigError("spec flagged admissible but node-1 erasure at 3 (" +
                              std::to_string(spec.erasure_prob(Transmitter::node1, {3})) +
                              ") is below node-2 erasure at 3 (" +
                              std::to_string(spec.erasure_prob(Transmitter::node2, {3})) + ")");
        }
        return spec;
    }

    static ErasureSpec from_marginals_independent(const IndependentMarginals& m, bool admissible = false)
    {
        for (double e : {m.tx1_at2, m.tx1_at3, m.tx1_at4, m.tx2_at3, m.tx2_at4}) {
            if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("erasure marginal outside [0,1]: " + std::to_string(e));
        }
        const std::array<double, 3> e1{m.tx1_at2, m.tx1_at3, m.tx1_at4};
        const std::array<double, 2> e2{m.tx2_at3, m.tx2_at4};
        Tx1Table tx1{};
        for (unsigned mask = 0; mask < tx1.size(); ++mask) {
            double p = 1.0;
            for (unsigned i = 0; i < e1.size(); ++i) p *= (mask & (1u << i)) ? 1.0 - e1[i] : e1[i];
            tx1[mask] = p;
        }
        Tx2Table tx2{};
        for (unsigned mask = 0; mask < tx2.size(); ++mask) {
            double p = 1.0;
            for (unsigned i = 0; i < e2.size(); ++i) p *= (mask & (1u << i)) ? 1.0 - e2[i] : e2[i];
            tx2[mask] = p;
        }
        return from_joint_table(tx1, tx2, admissible);
    }

    const Tx1Table& tx1_pattern_probs() const { return tx1_; }
    const Tx2Table& tx2_pattern_probs() const { return tx2_; }
    bool admissible_flag() const { return admissible_; }

    // Probability that a transmission by `tx` is erased at every node of
    // `erased`. Node 1 never receives node-2 packets, so it may appear in
    // `erased` for tx 2 and is always erased there.
    double erasure_prob(Transmitter tx, NodeSet erased) const
    {
        if (tx == Transmitter::idle) throw ConfigError("erasure_prob: idle transmitter");
        if (erased.contains(node_id(tx))) throw ConfigError("erasure_prob: set contains the transmitter");
        double total = 0.0;
        if (tx == Transmitter::node1) {
            for (unsigned mask = 0; mask < tx1_.size(); ++mask)
                if (!tx1_pattern_set(mask).intersects(erased)) total += tx1_[mask];
        } else {
            for (unsigned mask = 0; mask < tx2_.size(); ++mask)
                if (!tx2_pattern_set(mask).intersects(erased)) total += tx2_[mask];
        }
        return total;
    }

    ErasureSummary summary() const
    {
        const auto e1 = [this](NodeSet s) { return erasure_prob(Transmitter::node1, s); };
        const auto e2 = [this](NodeSet s) { return erasure_prob(Transmitter::node2, s); };
        return ErasureSummary{
            {e1({2}), e1({3}), e1({4}), e1({2, 3}), e1({2, 4}), e1({3, 4}), e1({2, 3, 4})},
            {e2({3}), e2({4}), e2({3, 4})},
        };
    }

    // Node 2 reaches node 3 at least as well as node 1 does.
    bool satisfies_relay_condition() const
    {
        return erasure_prob(Transmitter::node1, {3}) >= erasure_prob(Transmitter::node2, {3});
    }

    ReceptionEvent sample(Transmitter tx, RandomStream& rng) const
    {
        const double u = rng.uniform();
        if (tx == Transmitter::node1) return {tx, tx1_pattern_set(pick(tx1_cdf_.data(), tx1_cdf_.size(), u))};
        if (tx == Transmitter::node2) return {tx, tx2_pattern_set(pick(tx2_cdf_.data(), tx2_cdf_.size(), u))};
        return {};
    }

private:
    ErasureSpec(const Tx1Table& tx1, const Tx2Table& tx2, bool admissible)
        : tx1_(tx1), tx2_(tx2), admissible_(admissible)
    {
        accumulate(tx1_.data(), tx1_cdf_.data(), tx1_.size());
        accumulate(tx2_.data(), tx2_cdf_.data(), tx2_.size());
    }

    static void validate_table(const double* p, std::size_t n, const char* name)
    {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(p[i] >= 0.0) || !std::isfinite(p[i]))
                throw ConfigError(std::string(name) + " pattern probability is negative or not finite");
            sum += p[i];
        }
        if (std::abs(sum - 1.0) > kNormalizationTolerance)
            throw ConfigError(std::string(name) + " pattern probabilities sum to " + std::to_string(sum));
    }

    static void accumulate(const double* p, double* cdf, std::size_t n)
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) cdf[i] = (acc += p[i]);
    }

    // Last pattern with positive mass absorbs the rounding slack of the cdf.
    static unsigned pick(const double* cdf, std::size_t n, double u)
    {
        unsigned last_positive = 0;
        for (unsigned i = 0; i < n; ++i) {
            const double mass = cdf[i] - (i ? cdf[i - 1] : 0.0);
            if (mass <= 0.0) continue;
            if (u < cdf[i]) return i;
            last_positive = i;
        }
        return last_positive;
    }

    Tx1Table tx1_{};
    Tx2Table tx2_{};
    std::array<double, 8> tx1_cdf_{};
    std::array<double, 4> tx2_cdf_{};
    bool admissible_ = false;
};

// Reference channels used throughout the tests and the bundled configs.

// Independent erasures with node-1 at node 3 = 0.8 and every other link at
// 0.2; node 1 to node 4 is not pinned by the reference setup and is 0.5 here.
inline ErasureSpec relay_reference_channel()
{
    return ErasureSpec::from_marginals_independent({0.2, 0.8, 0.5, 0.2, 0.2}, true);
}

// Independent node-1 erasures (0.3, 0.77, 0.6); node-2 erasures 0.75 at 3,
// 0.85 at 4 and 0.75 jointly, i.e. a node-2 packet lost at 3 is always lost at 4.
inline ErasureSpec coding_reference_channel()
{
    const auto tx1 = ErasureSpec::from_marginals_independent({0.3, 0.77, 0.6, 0.0, 0.0}).tx1_pattern_probs();
    // masks over (3,4): none, 3 only, 4 only, both
    const ErasureSpec::Tx2Table tx2{0.75, 0.10, 0.0, 0.15};
    return ErasureSpec::from_joint_table(tx1, tx2, true);
}

} // namespace cogsim
