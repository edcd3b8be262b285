#pragma once

#include <cstdint>
#include <random>

namespace dancer {

// splitmix64; used to derive per-purpose seeds from one master seed.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t purpose) {
    return mix64(master ^ mix64(purpose));
}

inline uint64_t derive_seed(uint64_t master, uint64_t purpose, uint64_t a) {
    return mix64(derive_seed(master, purpose) ^ mix64(a + 0x51ed2701ULL));
}

inline uint64_t derive_seed(uint64_t master, uint64_t purpose, uint64_t a, uint64_t b) {
    return mix64(derive_seed(master, purpose, a) ^ mix64(b + 0xabcd1234ULL));
}

// Fixed purpose tags for the seed splitting rule. The rule itself is part of
// run reproducibility: resuming a run re-derives the identical schedule.
enum SeedPurpose : uint64_t {
    kSeedSplit = 1,
    kSeedInit = 2,
    kSeedShuffle = 3,
    kSeedSample = 4,
    kSeedData = 5,
};

// mt19937_64 with explicit uniform helpers so draws do not depend on
// implementation-defined std distributions.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // [0, 1)
    double next_real() { return (next_u64() >> 11) * 0x1.0p-53; }

    // [lo, hi)
    double next_real(double lo, double hi) { return lo + (hi - lo) * next_real(); }

    // [0, n), unbiased by rejection
    uint64_t next_index(uint64_t n) {
        if (n == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace dancer
