#pragma once

#include <cstdint>
#include <random>

namespace tmg {

// Independent streams keyed by (seed, domain, replication, role). Each stream is a
// Mersenne Twister seeded through seed_seq, so draws never depend on scheduling.
enum class StreamRole : std::uint32_t { Regressor = 1, Factor = 2, Coefficient = 3, OutcomeError = 4 };

enum class StreamDomain : std::uint32_t { Experiment = 0, Calibration = 1, Fixture = 2 };

class Stream {
public:
    Stream(std::uint64_t seed, StreamDomain domain, std::uint64_t rep, StreamRole role);

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace tmg
