#ifndef EDGEKIT_RNG_HPP
#define EDGEKIT_RNG_HPP

#include <cstdint>
#include <random>

namespace edgekit {

/// mt19937_64 with hand-rolled scaling so draws are identical across
/// platforms and standard libraries for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed), base_seed_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform index in [0, n); Lemire multiply-shift.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Deterministic substream: same (seed, stream) always yields the same
    /// child generator regardless of draws taken from the parent.
    Rng fork(std::uint64_t stream) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull * (stream + 1) + base_seed_;
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdull;
        h ^= h >> 33;
        return Rng(h);
    }

    template <class It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = index(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    std::uint64_t base_seed_;
};

}  // namespace edgekit

#endif
