#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace iab {

// Deterministic randomness helpers on top of std::mt19937_64. The engine
// itself is fully specified by the standard; the <random> distributions are
// not, so the few draws we need are derived here to keep runs reproducible
// across library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform in [0, n). Multiply-shift reduction; bias is O(n / 2^64).
    std::uint64_t uniform_below(std::uint64_t n) {
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(engine_()) * n) >> 64);
    }

    // Uniform in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    std::string save_state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void load_state(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
    }

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive independent seeds per (run, stream).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace iab
