#pragma once

#include <cstdint>

namespace ergolab {

/// Deterministic 64-bit random source (SplitMix64).
///
/// The generator is a counter-based mix: the state advances by a fixed
/// odd constant and the output is a bijective finalizer of the counter,
/// so identical seeds give identical draw sequences on every platform.
/// OS entropy is never consulted; every consumer receives its source
/// explicitly.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// True with probability p. Always consumes exactly one draw.
    bool bernoulli(double p) { return next_unit() < p; }

    /// Standard normal via Box-Muller; consumes exactly two draws.
    double next_normal();

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

/// Collision-resistant mix of a base seed and up to three indices,
/// used to hand every (p, M, agent) cell its own stream.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t p_index,
                          std::uint64_t m_index, std::uint64_t agent_index);

}  // namespace ergolab
