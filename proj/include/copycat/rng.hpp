#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace copycat {

// splitmix64 finalizer, used both as a seed mixer and for stable hashing of
// (seed, stream) pairs. Distribution transforms below are hand-rolled so that
// results depend only on the mt19937_64 stream, which the standard pins down
// exactly (std::uniform_real_distribution et al. are implementation-defined).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x5851F42D4C957F2DULL));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive bounds; modulo bias is irrelevant at the spans used here
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // Fisher-Yates, stable across library implementations
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = gen_() % i;
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace copycat
