#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qkdpp/degree_spec.hpp"
#include "qkdpp/errors.hpp"
#include "qkdpp/parity_check_matrix.hpp"
#include "qkdpp/rng.hpp"

namespace qkdpp {

struct BuildStats {
    std::size_t restarts = 0;
    std::size_t four_cycle_count = 0;
    bool four_cycle_free = false;
};

namespace detail {

// One greedy construction pass: place each variable's edges on the checks with
// the most remaining capacity, preferring placements that close no 4-cycle
// (progressive edge growth flavour). Returns empty rows on a dead end.
inline bool try_build_graph(const DegreeSpec& spec, std::mt19937_64& rng,
                            std::vector<std::vector<std::uint32_t>>& rows,
                            std::size_t& four_cycles) {
    const std::size_t n = spec.n;
    const std::size_t m = spec.m;
    rows.assign(m, {});
    four_cycles = 0;

    std::vector<std::uint32_t> capacity(spec.check_degrees.begin(),
                                        spec.check_degrees.end());
    std::uint32_t cap_hi = *std::max_element(capacity.begin(), capacity.end());

    // bucket[c] holds checks whose remaining capacity was c when pushed;
    // entries go stale as capacities drop and are compacted on scan.
    std::vector<std::vector<std::uint32_t>> bucket(cap_hi + 1);
    for (std::uint32_t j = 0; j < m; ++j)
        bucket[capacity[j]].push_back(j);

    // High-degree variables first: the exact-capacity realization is easiest
    // when the thirstiest nodes pick while capacity is still spread out.
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i)
        order[i] = i;
    shuffle_vec(order, rng);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                         return spec.variable_degrees[a] > spec.variable_degrees[b];
                     });

    // stamp[v'] == current epoch when v' sits at distance 2 from the variable
    // being placed; connecting to a check containing such a v' closes a 4-cycle.
    std::vector<std::uint32_t> stamp(n, 0);
    std::uint32_t epoch = 0;

    std::vector<std::uint32_t> chosen;
    for (std::uint32_t v : order) {
        ++epoch;
        chosen.clear();
        const std::uint32_t want = spec.variable_degrees[v];
        for (std::uint32_t t = 0; t < want; ++t) {
            std::int64_t pick = -1;
            std::int64_t fallback = -1;
            for (std::uint32_t cap = cap_hi; cap >= 1 && pick < 0; --cap) {
                auto& b = bucket[cap];
                // compact stale entries once, so the scan below sees truth
                for (std::size_t i = 0; i < b.size();) {
                    if (capacity[b[i]] != cap) {
                        b[i] = b.back();
                        b.pop_back();
                    } else {
                        ++i;
                    }
                }
                if (b.empty()) {
                    if (cap == cap_hi && cap_hi > 1)
                        --cap_hi;
                    continue;
                }
                const std::size_t off = static_cast<std::size_t>(uniform_index(rng, b.size()));
                for (std::size_t s = 0; s < b.size(); ++s) {
                    const std::uint32_t c = b[(off + s) % b.size()];
                    if (std::find(chosen.begin(), chosen.end(), c) != chosen.end())
                        continue;
                    bool safe = true;
                    for (std::uint32_t vp : rows[c]) {
                        if (stamp[vp] == epoch) {
                            safe = false;
                            break;
                        }
                    }
                    if (safe) {
                        pick = c;
                        break;
                    }
                    if (fallback < 0)
                        fallback = c;
                }
            }
            if (pick < 0) {
                if (fallback < 0)
                    return false; // no check can take this edge; restart
                pick = fallback;
                ++four_cycles;
            }
            const auto c = static_cast<std::uint32_t>(pick);
            rows[c].push_back(v);
            chosen.push_back(c);
            --capacity[c];
            if (capacity[c] > 0)
                bucket[capacity[c]].push_back(c);
            for (std::uint32_t vp : rows[c])
                stamp[vp] = epoch;
        }
    }
    return true;
}

} // namespace detail

// Realize the degree spec exactly as a full-row-rank sparse matrix,
// deterministic in the seed, with bounded restarts on dead ends or rank
// deficiency. 4-cycle avoidance is best-effort and reported via stats.
inline ParityCheckMatrix build_base_matrix(const DegreeSpec& spec, std::uint64_t seed,
                                           BuildStats* stats = nullptr) {
    spec.validate();
    constexpr std::size_t max_attempts = 50;
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        std::mt19937_64 rng(derive_seed(seed, 0xb111d, attempt));
        std::vector<std::vector<std::uint32_t>> rows;
        std::size_t four_cycles = 0;
        if (!detail::try_build_graph(spec, rng, rows, four_cycles))
            continue;
        ParityCheckMatrix h(spec.m, spec.n, std::move(rows));
        if (gf2_rank(h) != spec.m)
            continue;
        if (stats) {
            stats->restarts = attempt;
            stats->four_cycle_count = four_cycles;
            stats->four_cycle_free = (four_cycles == 0);
        }
        return h;
    }
    throw ConstructionFailed("build_base_matrix: no full-rank realization in " +
                             std::to_string(max_attempts) + " attempts");
}

// Brute-force 4-cycle detector: a 4-cycle exists iff some pair of checks
// shares two variables, i.e. some check pair appears twice across columns.
inline bool has_four_cycle(const ParityCheckMatrix& h) {
    std::vector<std::uint64_t> pairs;
    for (std::size_t i = 0; i < h.variable_count(); ++i) {
        const auto& c = h.col(i);
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = a + 1; b < c.size(); ++b)
                pairs.push_back((std::uint64_t{c[a]} << 32) | c[b]);
    }
    std::sort(pairs.begin(), pairs.end());
    return std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end();
}

} // namespace qkdpp
