#pragma once

#include <cstdint>

namespace shiftbound::rng {

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based generator: every draw is a pure function of (seed, stream, path, counter).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t path);

    // Uniform on (0, 1].
    double uniform(std::uint64_t counter) const;
    // Standard normal via Box-Muller on two counter slots.
    double normal(std::uint64_t counter) const;

private:
    std::uint64_t bits(std::uint64_t counter) const;
    std::uint64_t key_;
};

}  // namespace shiftbound::rng
