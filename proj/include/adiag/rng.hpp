#pragma once

// Deterministic random draws. std::uniform_real_distribution is
// implementation-defined, so bits are mapped to doubles by hand; identical
// seeds give identical streams on every platform.

#include <cstdint>

namespace adiag {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mix a stream index into a seed so sub-stages get independent streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    return splitmix64(s);
}

class DetRng {
  public:
    explicit DetRng(std::uint64_t seed) : state_(seed) {
        // warm up so low-entropy seeds diverge immediately
        splitmix64(state_);
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (-1, 1)
    double symmetric() { return 2.0 * uniform01() - 1.0; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  private:
    std::uint64_t state_;
};

}  // namespace adiag
