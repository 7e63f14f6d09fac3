#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tsacap {

// Seeded RNG with hand-rolled distributions. std::mt19937_64 sequences are
// pinned by the standard, but the distribution classes are not; deriving
// doubles directly from the raw stream keeps every artifact bit-reproducible
// across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform in {0, ..., n-1}. Modulo bias is irrelevant at the sizes used here.
    std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

    // Box-Muller; consumes two draws per call.
    double normal(double mean = 0.0, double stddev = 1.0) {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_index(i)]);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace tsacap
