#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "qkdpp/errors.hpp"

namespace qkdpp {

// Target degree sequences for a Tanner graph: one degree per variable node and
// per check node. Validation covers edge-count consistency, range, and
// bipartite realizability (Gale-Ryser), so the builder can assume feasibility.
struct DegreeSpec {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<std::uint32_t> variable_degrees; // size n
    std::vector<std::uint32_t> check_degrees;    // size m

    void validate() const {
        if (n == 0 || m == 0)
            throw InfeasibleSpec("DegreeSpec: n and m must be positive");
        if (variable_degrees.size() != n)
            throw InfeasibleSpec("DegreeSpec: expected " + std::to_string(n) +
                                 " variable degrees, got " +
                                 std::to_string(variable_degrees.size()));
        if (check_degrees.size() != m)
            throw InfeasibleSpec("DegreeSpec: expected " + std::to_string(m) +
                                 " check degrees, got " +
                                 std::to_string(check_degrees.size()));
        std::uint64_t var_sum = 0, chk_sum = 0;
        for (std::uint32_t d : variable_degrees) {
            if (d < 1 || d > m)
                throw InfeasibleSpec("DegreeSpec: variable degree " + std::to_string(d) +
                                     " outside [1, m=" + std::to_string(m) + "]");
            var_sum += d;
        }
        for (std::uint32_t d : check_degrees) {
            if (d < 1 || d > n)
                throw InfeasibleSpec("DegreeSpec: check degree " + std::to_string(d) +
                                     " outside [1, n=" + std::to_string(n) + "]");
            chk_sum += d;
        }
        if (var_sum != chk_sum)
            throw InfeasibleSpec("DegreeSpec: edge count mismatch (" +
                                 std::to_string(var_sum) + " from variables vs " +
                                 std::to_string(chk_sum) + " from checks)");

        // Gale-Ryser: with variable degrees a sorted descending, a simple
        // bipartite realization exists iff for every prefix k,
        //   sum_{i<k} a_i <= sum_j min(b_j, k).
        std::vector<std::uint32_t> a = variable_degrees;
        std::sort(a.begin(), a.end(), std::greater<>());
        std::vector<std::uint64_t> count_ge(n + 2, 0); // #checks with degree >= k
        for (std::uint32_t d : check_degrees)
            ++count_ge[d];
        std::uint64_t ge = 0;
        for (std::size_t k = n + 1; k-- > 1;) {
            ge += count_ge[k];
            count_ge[k] = ge;
        }
        std::uint64_t lhs = 0, rhs = 0;
        for (std::size_t k = 1; k <= a.size(); ++k) {
            lhs += a[k - 1];
            // sum_j min(b_j, k) grows by the number of checks with degree >= k
            rhs += count_ge[k];
            if (lhs > rhs)
                throw InfeasibleSpec("DegreeSpec: degree sequences fail the "
                                     "Gale-Ryser condition at prefix " +
                                     std::to_string(k));
        }
    }

    // Regular column degree; row degrees split as evenly as possible.
    static DegreeSpec regular(std::size_t n, std::size_t m, std::uint32_t col_degree) {
        DegreeSpec s;
        s.n = n;
        s.m = m;
        s.variable_degrees.assign(n, col_degree);
        const std::uint64_t edges = std::uint64_t{n} * col_degree;
        const std::uint32_t base = static_cast<std::uint32_t>(edges / m);
        const std::size_t extra = static_cast<std::size_t>(edges % m);
        s.check_degrees.assign(m, base);
        for (std::size_t j = 0; j < extra; ++j)
            ++s.check_degrees[j];
        return s;
    }

    // Irregular profile from (degree, count) pairs; counts must sum to n.
    static DegreeSpec irregular(std::size_t n, std::size_t m,
                                const std::vector<std::pair<std::uint32_t, std::size_t>>& classes) {
        DegreeSpec s;
        s.n = n;
        s.m = m;
        for (const auto& [deg, count] : classes)
            s.variable_degrees.insert(s.variable_degrees.end(), count, deg);
        if (s.variable_degrees.size() != n)
            throw InfeasibleSpec("DegreeSpec::irregular: class counts sum to " +
                                 std::to_string(s.variable_degrees.size()) +
                                 ", expected n = " + std::to_string(n));
        const std::uint64_t edges =
            std::accumulate(s.variable_degrees.begin(), s.variable_degrees.end(),
                            std::uint64_t{0});
        const std::uint32_t base = static_cast<std::uint32_t>(edges / m);
        const std::size_t extra = static_cast<std::size_t>(edges % m);
        s.check_degrees.assign(m, base);
        for (std::size_t j = 0; j < extra; ++j)
            ++s.check_degrees[j];
        return s;
    }
};

} // namespace qkdpp
