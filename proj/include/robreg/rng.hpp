#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace robreg {

/// Seedable, splittable generator. Named substreams are derived from the seed
/// and the name only, so drawing from one stream never shifts another.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    Rng substream(std::string_view name) const;

    std::mt19937_64& engine() { return engine_; }
    std::uint64_t seed() const { return seed_; }

    double normal();
    double uniform();  // [0, 1)
    double uniform(double lo, double hi);
    double sign();     // +1 or -1 with equal probability

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace robreg
