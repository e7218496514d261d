#pragma once

#include <cstdint>
#include <string_view>

namespace trignet {

/// splitmix64 stream. Used everywhere a deterministic, platform-stable
/// random source is needed (weight init, hash-stub embeddings, dropout,
/// fixture generation). std::mt19937 would also be portable but its
/// distributions are not; we only ever draw via the helpers below.
class SplitMix64 {
  public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Uniform integer in [0, n). n must be > 0.
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

  private:
    uint64_t state_;
};

/// FNV-1a over a byte string, folded with a seed. Stable across platforms.
inline uint64_t stable_hash(uint64_t seed, std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x100000001b3ULL + 0x9e3779b97f4a7c15ULL);
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    // final avalanche so short strings still differ in every bit
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return h;
}

}  // namespace trignet
