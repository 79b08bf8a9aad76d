#pragma once

#include <cstdint>
#include <string_view>

namespace toolpath {

// Stateless seeded hashing (splitmix64 over a running state). Every random
// quantity in the engine is derived from (seed, tags...) so repeated runs,
// parallel batches and mode comparisons see identical draws regardless of
// evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t state, std::uint64_t v) {
    return splitmix64(state ^ (v + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2)));
}

inline std::uint64_t hash_str(std::uint64_t state, std::string_view s) {
    for (unsigned char c : s) state = hash_combine(state, c);
    return hash_combine(state, s.size());
}

struct SeedSequence {
    std::uint64_t state = 0;

    SeedSequence() = default;
    explicit SeedSequence(std::uint64_t seed) : state(splitmix64(seed)) {}

    SeedSequence with(std::uint64_t v) const {
        SeedSequence s = *this;
        s.state = hash_combine(s.state, v);
        return s;
    }
    SeedSequence with(std::string_view tag) const {
        SeedSequence s = *this;
        s.state = hash_str(s.state, tag);
        return s;
    }

    std::uint64_t value() const { return state; }

    // uniform in [0, 1)
    double unit(std::uint64_t salt = 0) const {
        return double(splitmix64(state ^ salt) >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n, std::uint64_t salt = 0) const {
        return n == 0 ? 0 : splitmix64(state ^ hash_combine(salt, 0x5eedULL)) % n;
    }
};

}  // namespace toolpath
