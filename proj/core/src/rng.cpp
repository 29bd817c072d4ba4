#include "ergolab/rng.hpp"

#include <cmath>
#include <numbers>

namespace ergolab {

double RandomSource::next_normal() {
    // next_unit() is in [0,1); flip so the log argument stays positive.
    double u1 = 1.0 - next_unit();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t p_index,
                          std::uint64_t m_index, std::uint64_t agent_index) {
    std::uint64_t h = mix64(base_seed + 0x9E3779B97F4A7C15ULL);
    h = mix64(h ^ (p_index + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
    h = mix64(h ^ (m_index + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
    h = mix64(h ^ (agent_index + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
    return h;
}

}  // namespace ergolab
