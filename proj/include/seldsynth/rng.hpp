#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace seldsynth {

// FNV-1a, used to derive per-clip seeds from clip stems.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic seed derivation: mixing is order-sensitive, so
// mix_seed(mix_seed(s, a), b) != mix_seed(mix_seed(s, b), a).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) {
    return mix64(seed ^ mix64(value));
}

// mt19937_64 with a bias-free bounded draw. The engine's raw output is
// pinned by the standard, and the rejection loop below is ours, so the
// sequence is identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform draw from [0, n). n must be > 0.
    std::size_t uniform_below(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = (UINT64_MAX / bound) * bound;
        std::uint64_t r = next_u64();
        while (r >= limit) r = next_u64();
        return static_cast<std::size_t>(r % bound);
    }

    // Uniform in [0, 1).
    double uniform_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace seldsynth
