#ifndef FLOCKLAB_RNG_HPP
#define FLOCKLAB_RNG_HPP

#include <cstdint>
#include <random>

namespace flocklab {

// splitmix64 mixer, used to derive independent stream seeds from a root
// seed plus counters (replica id, stream role, ...).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(root ^ 0x12b9b0a1c0ffee11ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ (b + 0x517cc1b727220a95ULL));
    s = splitmix64(s ^ (c + 0x2545f4914f6cdd1dULL));
    return s;
}

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return unit_(eng_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(eng_); }
    double normal() { return normal_(eng_); }
    double exponential(double rate) {
        return -std::log1p(-unit_(eng_)) / rate;
    }
    // Uniform integer in {0, ..., n-1}.
    int uniform_int(int n) {
        return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(eng_));
    }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace flocklab

#endif
