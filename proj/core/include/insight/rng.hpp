#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace insight {

// Splitmix64 generator. Every run owns one root Rng; components derive their
// own streams with fork(label) so initialization order never shifts a stream.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; draws two uniforms per call so streams stay position-exact.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n)
    uint64_t next_below(uint64_t n) {
        return n == 0 ? 0 : next_u64() % n;
    }

    // Child stream derived from the ORIGINAL seed and a label. Forking the same
    // label twice yields the same stream; forks are independent of draw order.
    Rng fork(std::string_view label) const {
        return Rng(mix(seed_, hash_label(label)));
    }

    uint64_t seed() const { return seed_; }

    static uint64_t hash_label(std::string_view label) {
        uint64_t h = 0xCBF29CE484222325ULL; // FNV-1a
        for (unsigned char c : label) {
            h ^= c;
            h *= 0x100000001B3ULL;
        }
        return h;
    }

private:
    static uint64_t mix(uint64_t a, uint64_t b) {
        uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    uint64_t seed_;
    uint64_t state_;
};

// FNV-1a over arbitrary bytes; used for config hashes and feature hashing.
inline uint64_t fnv1a(std::string_view bytes) {
    return Rng::hash_label(bytes);
}

} // namespace insight
