#ifndef PLANEX_RNG_HPP
#define PLANEX_RNG_HPP

#include <cstdint>

namespace planex {

// SplitMix64 (Steele, Lea & Flood's splittable generator as published in
// Vigna's reference implementation): state advances by the golden-gamma
// constant and the output is a 64-bit finalizer mix. Deterministic across
// platforms, trivially seedable, and splittable by seeding a child stream
// from the parent's next output.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    SplitMix64 split() { return SplitMix64(next()); }

private:
    std::uint64_t state_;
};

} // namespace planex

#endif
