#pragma once

#include <cstdint>

namespace glnn {

// splitmix64: every random stream in the project is derived from one u64 seed,
// so runs are reproducible bit-for-bit across platforms (std::shuffle and the
// std distributions are implementation-defined and cannot be used for that).
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // independent child stream, stable under the order in which other
    // streams are drawn (key-derived, does not advance this stream)
    SplitMix64 derive(std::uint64_t key) const {
        SplitMix64 mix(state_ ^ (0x9e3779b97f4a7c15ull * (key + 1)));
        return SplitMix64(mix.next());
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, bound), multiply-high method
    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    template <typename T>
    void shuffle(T* first, std::uint64_t n) {
        for (std::uint64_t i = n; i > 1; --i) {
            std::uint64_t j = below(i);
            T tmp = first[i - 1];
            first[i - 1] = first[j];
            first[j] = tmp;
        }
    }

  private:
    std::uint64_t state_;
};

}  // namespace glnn
