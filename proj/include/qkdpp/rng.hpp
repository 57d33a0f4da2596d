#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace qkdpp {

// splitmix64 finalizer; the standard trick for whitening/combining seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent child seed for (parameter point, trial). Hash-chained rather
// than additive so neighbouring trials never share stream prefixes.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t param_index,
                                 std::uint64_t trial_index) {
    std::uint64_t s = splitmix64(master ^ 0x51ed270b7a2cca01ULL);
    s = splitmix64(s ^ param_index);
    s = splitmix64(s ^ trial_index);
    return s;
}

// Unbiased integer in [0, bound) by rejection; identical output on every
// platform, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
    std::uint64_t v = rng();
    while (v > limit)
        v = rng();
    return v % bound;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// k distinct indices out of n, returned sorted ascending (partial
// Fisher-Yates over an index table).
inline std::vector<std::uint32_t> sample_without_replacement(std::mt19937_64& rng,
                                                            std::size_t n,
                                                            std::size_t k) {
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// In-place Fisher-Yates using the portable index helper.
template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace qkdpp
