#pragma once

#include <cstdint>
#include <vector>

namespace muse {

// splitmix64 finalizer (Vigna / Steele-Lea-Flood). Used everywhere a
// reproducible non-keyed random stream is needed.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based access: value i of the stream started at `seed`. Lets
// callers draw in parallel by index without shared state.
constexpr std::uint64_t rng_at(std::uint64_t seed, std::uint64_t index) {
    return splitmix64_mix(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return splitmix64_mix(state_);
    }

    // Unbiased-enough bounded draw (Lemire multiply-shift).
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

inline double uniform01_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// In-place Fisher-Yates shuffle driven by the given stream.
template <typename T>
void seeded_shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

// k distinct indices drawn from {0, ..., n-1} (partial Fisher-Yates),
// returned in selection order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                               SplitMix64& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace muse
