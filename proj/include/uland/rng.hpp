#pragma once
// Deterministic random streams. Every consumer derives its own stream from
// (seed, tags...) so results do not depend on scheduling or thread count.

#include <cstdint>
#include <random>

namespace uland::rng {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline uint64_t combine(uint64_t h, uint64_t v) {
    return splitmix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

// derive(seed, a, b, ...) -> stream seed; order of tags matters.
template <class... Tags>
uint64_t derive(uint64_t seed, Tags... tags) {
    uint64_t h = splitmix64(seed);
    ((h = combine(h, static_cast<uint64_t>(tags))), ...);
    return h;
}

// Small string tags let call sites stay readable without a registry of ids.
inline uint64_t tag(const char* s) {
    uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (; *s; ++s) h = (h ^ static_cast<uint64_t>(*s)) * 1099511628211ULL;
    return h;
}

class Stream {
  public:
    explicit Stream(uint64_t seed) : eng_(seed) {}

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(eng_);
    }
    float normal_f() { return std::normal_distribution<float>(0.0f, 1.0f)(eng_); }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng_);
    }
    float uniform_f(float lo, float hi) {
        return std::uniform_real_distribution<float>(lo, hi)(eng_);
    }
    // inclusive bounds
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(eng_);
    }
    uint64_t next_u64() { return eng_(); }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace uland::rng
