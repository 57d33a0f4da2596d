#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "qkdpp/bit_block.hpp"
#include "qkdpp/errors.hpp"
#include "qkdpp/rng.hpp"

namespace qkdpp {

enum class ErrorModel { bernoulli, exact_count };

inline const char* to_string(ErrorModel m) {
    return m == ErrorModel::bernoulli ? "bernoulli" : "exact_count";
}

inline ErrorModel error_model_from_string(const std::string& s) {
    if (s == "bernoulli")
        return ErrorModel::bernoulli;
    if (s == "exact_count")
        return ErrorModel::exact_count;
    throw InvalidArgument("unknown error model '" + s + "' (bernoulli|exact_count)");
}

// Uniform random key of n bits, fully determined by the seed.
inline BitBlock gen_key(std::size_t n, std::uint64_t seed) {
    if (n < 1)
        throw InvalidArgument("gen_key: length must be >= 1");
    std::mt19937_64 rng(seed);
    BitBlock out(n);
    for (std::size_t i = 0; i < n; ++i)
        out.set(i, static_cast<std::uint8_t>(uniform_index(rng, 2)));
    return out;
}

struct BscResult {
    BitBlock y;
    double realized_rate = 0.0;
};

// Binary symmetric channel. bernoulli flips each bit independently with
// probability e; exact_count flips exactly round(e*n) uniformly chosen
// positions. realized_rate is the observed flip fraction either way.
inline BscResult apply_bsc(const BitBlock& x, double e, ErrorModel model,
                           std::uint64_t seed) {
    if (e < 0.0 || e > 1.0)
        throw InvalidArgument("apply_bsc: rate " + std::to_string(e) +
                              " outside [0, 1]");
    std::mt19937_64 rng(seed);
    BscResult out;
    out.y = x;
    const std::size_t n = x.size();
    if (model == ErrorModel::bernoulli) {
        for (std::size_t i = 0; i < n; ++i)
            if (uniform_double(rng) < e)
                out.y.flip(i);
    } else {
        const auto flips =
            static_cast<std::size_t>(std::llround(e * static_cast<double>(n)));
        for (std::uint64_t p : sample_without_replacement(rng, n, flips))
            out.y.flip(static_cast<std::size_t>(p));
    }
    out.realized_rate = static_cast<double>(x.hamming_distance(out.y)) /
                        static_cast<double>(n);
    return out;
}

} // namespace qkdpp
