#pragma once

#include <cstdint>
#include <string>

namespace dualmac {

// Deterministic splitmix64 stream. We roll our own distributions because the
// standard library's are not specified bit-for-bit and every run here must be
// reproducible from its seed alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). bound == 0 yields 0.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) return 0;
        // Rejection sampling to kill modulo bias.
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + std::int64_t(below(std::uint64_t(hi - lo + 1)));
    }

    // Uniform double in [0, 1).
    double real() { return double(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return real() < p; }

    // Independent child stream; stable under call-order changes elsewhere.
    Rng fork(std::uint64_t tag) const {
        return Rng(mix(mix(state_, 0x2545f4914f6cdd1dull), tag));
    }
    Rng fork(std::uint64_t tag_a, std::uint64_t tag_b) const {
        return fork(tag_a).fork(tag_b);
    }

private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace dualmac
