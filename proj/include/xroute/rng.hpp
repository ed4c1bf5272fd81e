#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace xroute {

/// Seeded random source. mt19937_64 produces the same stream on every
/// platform; the <random> distributions do not, so bounded integers and
/// floats are derived by hand to keep seeded runs byte-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Unbiased draw in [0, n).
    std::uint64_t bounded(std::uint64_t n) {
        assert(n > 0);
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % n;
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Exponential inter-arrival time; rate in events per unit time.
    double exponential(double rate) {
        assert(rate > 0.0);
        return -std::log1p(-uniform01()) / rate;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace xroute
