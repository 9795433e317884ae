#pragma once

#include <cstdint>
#include <random>

namespace cogsim {

// Independent sub-streams derived from one run seed. Keeping the channel,
// arrival and Algorithm-5 coin draws on separate engines means that two
// protocols which consume the coin differently still see the same channel
// and arrival sequences.
enum class StreamId : std::uint32_t { arrivals = 1, channel = 2, coin = 3, coupling = 4, generic = 5 };

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, StreamId stream = StreamId::generic)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream)};
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    // Uniform on [0,1) with 53 random bits; identical on every platform.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Engine access for std:: distributions in test code.
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace cogsim
