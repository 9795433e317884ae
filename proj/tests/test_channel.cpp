#include <gtest/gtest.h>

#include <array>
#include <vector>

#include "cogsim/channel.hpp"
#include "spec_samplers.hpp"

using namespace cogsim;

namespace {

// Every subset of the listeners of `tx` (bits over nodes 1..4).
std::vector<NodeSet> listener_subsets(Transmitter tx)
{
    const std::vector<int> nodes = tx == Transmitter::node1 ? std::vector<int>{2, 3, 4} : std::vector<int>{3, 4};
    std::vector<NodeSet> out;
    for (unsigned m = 0; m < (1u << nodes.size()); ++m) {
        NodeSet s;
        for (unsigned i = 0; i < nodes.size(); ++i)
            if (m & (1u << i)) s.insert(nodes[i]);
        out.push_back(s);
    }
    return out;
}

} // namespace

TEST(Channel, JointErasureOfIndependentMarginalsIsTheProduct)
{
    const ErasureSpec spec = ErasureSpec::from_marginals_independent({0.2, 0.8, 0.5, 0.2, 0.2});
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {2, 3}), 0.16, 1e-15);
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {2}), 0.2, 1e-15);
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {3}), 0.8, 1e-15);
}

TEST(Channel, EmptyErasureSetHasProbabilityOne)
{
    RandomStream rng(11);
    for (int i = 0; i < 20; ++i) {
        const ErasureSpec spec = samplers::random_spec(rng);
        EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {}), 1.0, 1e-12);
        EXPECT_NEAR(spec.erasure_prob(Transmitter::node2, {}), 1.0, 1e-12);
    }
}

TEST(Channel, CodingReferenceJointErasures)
{
    const ErasureSpec spec = coding_reference_channel();
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {2, 3, 4}), 0.1386, 1e-12);
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {2, 3}), 0.231, 1e-12);
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {3, 4}), 0.462, 1e-12);
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node2, {3}), 0.75, 1e-12);
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node2, {4}), 0.85, 1e-12);
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node2, {3, 4}), 0.75, 1e-12);
    EXPECT_TRUE(spec.satisfies_relay_condition());
}

TEST(Channel, AllMarginalsZeroMeansEveryoneReceives)
{
    const ErasureSpec spec = ErasureSpec::from_marginals_independent({0, 0, 0, 0, 0});
    EXPECT_DOUBLE_EQ(spec.tx1_pattern_probs()[7], 1.0);
    EXPECT_DOUBLE_EQ(spec.tx2_pattern_probs()[3], 1.0);
    RandomStream rng(3, StreamId::channel);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(spec.sample(Transmitter::node1, rng).received_by, (NodeSet{2, 3, 4}));
        EXPECT_EQ(spec.sample(Transmitter::node2, rng).received_by, (NodeSet{3, 4}));
    }
}

TEST(Channel, IndependentNodeTwoErasuresMultiply)
{
    const ErasureSpec spec = ErasureSpec::from_marginals_independent({0.3, 0.77, 0.6, 0.75, 0.85});
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node2, {3, 4}), 0.6375, 1e-12);
}

TEST(Channel, IndependentConstructionRoundTripsMarginals)
{
    RandomStream rng(5);
    for (int i = 0; i < 200; ++i) {
        const IndependentMarginals m{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
        const ErasureSpec spec = ErasureSpec::from_marginals_independent(m);
        EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {2}), m.tx1_at2, 1e-14);
        EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {3}), m.tx1_at3, 1e-14);
        EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {4}), m.tx1_at4, 1e-14);
        EXPECT_NEAR(spec.erasure_prob(Transmitter::node2, {3}), m.tx2_at3, 1e-14);
        EXPECT_NEAR(spec.erasure_prob(Transmitter::node2, {4}), m.tx2_at4, 1e-14);
    }
}

TEST(Channel, ErasureProbabilityShrinksAsTheSetGrows)
{
    RandomStream rng(8);
    for (int i = 0; i < 100; ++i) {
        const ErasureSpec spec = samplers::random_spec(rng);
        for (Transmitter tx : {Transmitter::node1, Transmitter::node2}) {
            const auto subsets = listener_subsets(tx);
            for (NodeSet s : subsets)
                for (NodeSet t : subsets)
                    if (s.subset_of(t)) EXPECT_LE(spec.erasure_prob(tx, t), spec.erasure_prob(tx, s) + 1e-15);
        }
    }
}

TEST(Channel, ErasureProbabilityMatchesPatternSum)
{
    // ε_S = mass of patterns whose reception set misses S, summed by hand.
    const ErasureSpec spec = coding_reference_channel();
    const auto& t = spec.tx1_pattern_probs();
    // masks over (2,3,4): node 3 is bit 1
    const double lost3 = t[0] + t[1] + t[4] + t[5];
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {3}), lost3, 1e-15);
    const double lost34 = t[0] + t[1];
    EXPECT_NEAR(spec.erasure_prob(Transmitter::node1, {3, 4}), lost34, 1e-15);
}

TEST(Channel, BoundaryJointTableIsAccepted)
{
    // node-2 packet erased at 3 but received at 4 has zero probability
    const auto tx1 = ErasureSpec::from_marginals_independent({0.3, 0.77, 0.6, 0, 0}).tx1_pattern_probs();
    EXPECT_NO_THROW(ErasureSpec::from_joint_table(tx1, {0.75, 0.10, 0.0, 0.15}));
}

TEST(Channel, DeterministicTableSamplesOnePattern)
{
    const ErasureSpec spec = ErasureSpec::from_joint_table({0, 0, 0, 0, 0, 1, 0, 0}, {0, 1, 0, 0});
    RandomStream rng(1, StreamId::channel);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(spec.sample(Transmitter::node1, rng).received_by, (NodeSet{2, 4}));
        EXPECT_EQ(spec.sample(Transmitter::node2, rng).received_by, (NodeSet{3}));
    }
}

TEST(Channel, RejectsBadTables)
{
    EXPECT_THROW(ErasureSpec::from_joint_table({0.9, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 1}), ConfigError);
    EXPECT_THROW(ErasureSpec::from_joint_table({1.1, -0.1, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 1}), ConfigError);
    EXPECT_THROW(ErasureSpec::from_joint_table({0, 0, 0, 0, 0, 0, 0, 1}, {0.5, 0.5, 0.5, -0.5}), ConfigError);
    EXPECT_THROW(ErasureSpec::from_marginals_independent({1.2, 0, 0, 0, 0}), ConfigError);
    EXPECT_THROW(ErasureSpec::from_marginals_independent({0, 0, -0.1, 0, 0}), ConfigError);
}

TEST(Channel, AdmissibleFlagEnforcesRelayCondition)
{
    EXPECT_THROW(ErasureSpec::from_marginals_independent({0.2, 0.1, 0.5, 0.4, 0.2}, true), ConfigError);
    EXPECT_NO_THROW(ErasureSpec::from_marginals_independent({0.2, 0.1, 0.5, 0.4, 0.2}, false));
    EXPECT_NO_THROW(ErasureSpec::from_marginals_independent({0.2, 0.4, 0.5, 0.4, 0.2}, true));
}

TEST(Channel, RejectsSetsContainingTheTransmitterOrUnknownNodes)
{
    const ErasureSpec spec = relay_reference_channel();
    EXPECT_THROW(spec.erasure_prob(Transmitter::node1, {1, 3}), ConfigError);
    EXPECT_THROW(spec.erasure_prob(Transmitter::node2, {2}), ConfigError);
    EXPECT_THROW(spec.erasure_prob(Transmitter::idle, {3}), ConfigError);
    EXPECT_THROW((NodeSet{5}), ConfigError);
    EXPECT_THROW((NodeSet{0}), ConfigError);
    // node 1 never hears node 2
    EXPECT_DOUBLE_EQ(spec.erasure_prob(Transmitter::node2, {1, 3}), spec.erasure_prob(Transmitter::node2, {3}));
}

TEST(Channel, EmpiricalErasureAtThreeMatchesMarginal)
{
    const ErasureSpec spec = relay_reference_channel();
    RandomStream rng(2024, StreamId::channel);
    constexpr int n = 1'000'000;
    int lost = 0;
    for (int i = 0; i < n; ++i) lost += !spec.sample(Transmitter::node1, rng).received(3);
    EXPECT_NEAR(static_cast<double>(lost) / n, 0.8, 0.002);
}

TEST(Channel, PatternFrequenciesPassChiSquare)
{
    // 1% upper quantiles of chi-square with 7 and 3 degrees of freedom
    constexpr double crit7 = 18.4753;
    constexpr double crit3 = 11.3449;
    const ErasureSpec spec = coding_reference_channel();
    RandomStream rng(77, StreamId::channel);
    constexpr int n = 1'000'000;
    std::array<int, 8> c1{};
    std::array<int, 4> c2{};
    for (int i = 0; i < n; ++i) {
        ++c1[spec.sample(Transmitter::node1, rng).received_by.bits() >> 1];
        ++c2[spec.sample(Transmitter::node2, rng).received_by.bits() >> 2];
    }
    double x1 = 0, x2 = 0;
    int df2 = -1;
    for (unsigned m = 0; m < 8; ++m) {
        const double e = n * spec.tx1_pattern_probs()[m];
        x1 += (c1[m] - e) * (c1[m] - e) / e;
    }
    for (unsigned m = 0; m < 4; ++m) {
        const double e = n * spec.tx2_pattern_probs()[m];
        if (e == 0.0) {
            EXPECT_EQ(c2[m], 0);
            continue;
        }
        ++df2;
        x2 += (c2[m] - e) * (c2[m] - e) / e;
    }
    EXPECT_LT(x1, crit7);
    EXPECT_EQ(df2, 2);
    EXPECT_LT(x2, crit3);
}

TEST(Channel, SameSeedSameEvents)
{
    const ErasureSpec spec = coding_reference_channel();
    RandomStream a(42, StreamId::channel), b(42, StreamId::channel), c(43, StreamId::channel);
    bool differs = false;
    for (int i = 0; i < 10'000; ++i) {
        const Transmitter tx = i % 3 ? Transmitter::node1 : Transmitter::node2;
        const auto ea = spec.sample(tx, a), eb = spec.sample(tx, b), ec = spec.sample(tx, c);
        EXPECT_EQ(ea.received_by, eb.received_by);
        differs |= !(ea.received_by == ec.received_by);
    }
    EXPECT_TRUE(differs);
}

TEST(Channel, NodeSetBasics)
{
    const NodeSet s{2, 4};
    EXPECT_TRUE(s.contains(2));
    EXPECT_FALSE(s.contains(3));
    EXPECT_TRUE(s.subset_of({2, 3, 4}));
    EXPECT_FALSE(s.intersects({3}));
    EXPECT_EQ(s.to_string(), "{2 4}");
    EXPECT_EQ(NodeSet{}.to_string(), "{}");
    EXPECT_EQ(tx1_pattern_set(0b101), (NodeSet{2, 4}));
    EXPECT_EQ(tx2_pattern_set(0b10), (NodeSet{4}));
}
