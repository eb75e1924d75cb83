#include "tmg/rng.hpp"

namespace tmg {

namespace {

std::mt19937_64 seeded(std::uint64_t seed, StreamDomain domain, std::uint64_t rep, StreamRole role) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(domain),
                      static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32),
                      static_cast<std::uint32_t>(role)};
    return std::mt19937_64(seq);
}

}  // namespace

Stream::Stream(std::uint64_t seed, StreamDomain domain, std::uint64_t rep, StreamRole role)
    : engine_(seeded(seed, domain, rep, role)) {}

}  // namespace tmg
