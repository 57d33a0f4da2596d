#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "qkdpp/bit_matrix.hpp"
#include "qkdpp/errors.hpp"
#include "qkdpp/parity_check_matrix.hpp"

namespace qkdpp {

// Decomposition H = A · (H' | E_m) · B of a full-row-rank check matrix:
//   A  - invertible m x m row transform,
//   H' - the m x (n-m) parity part,
//   B  - a column permutation, stored as `perm`: column k of (H'|E_m) sits at
//        original column perm[k] of H.
// `independent_positions` are the original columns carrying E_m (the positions
// whose key bits are fully determined by the others plus the syndrome).
struct SystematicForm {
    BitMatrix row_transform;                        // A
    BitMatrix parity_part;                          // H'
    std::vector<std::uint32_t> perm;                // size n
    std::vector<std::uint32_t> independent_positions; // size m, ascending
};

// Rebuild the original dense matrix from a decomposition; used to verify the
// recomposition identity.
inline BitMatrix recompose_dense(const SystematicForm& sf) {
    const std::size_t m = sf.row_transform.rows();
    const std::size_t t = sf.parity_part.cols();
    const std::size_t n = sf.perm.size();
    BitMatrix r(m, n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t row = 0; row < m; ++row) {
            const std::uint8_t bit =
                (k < t) ? sf.parity_part.get(row, k)
                        : static_cast<std::uint8_t>(row == k - t);
            r.set(row, sf.perm[k], bit);
        }
    }
    return sf.row_transform * r;
}

// Gauss-Jordan decomposition. Pivots are chosen on the first nonzero column
// scanning left to right; a matrix whose last m columns already form E_m takes
// a shortcut with identity A and identity permutation. Throws RankDeficient
// when rank(H) < m.
inline SystematicForm systematic_decompose(const ParityCheckMatrix& h) {
    const std::size_t m = h.check_count();
    const std::size_t n = h.variable_count();
    if (n < m)
        throw RankDeficient("systematic_decompose: more checks than variables");
    const std::size_t t = n - m;

    // Shortcut: H = (H' | E_m) as given.
    bool already = true;
    for (std::size_t i = 0; i < m && already; ++i) {
        const auto& c = h.col(t + i);
        already = (c.size() == 1 && c[0] == i);
    }
    if (already) {
        SystematicForm sf;
        sf.row_transform = BitMatrix::identity(m);
        sf.parity_part = BitMatrix(m, t);
        for (std::size_t j = 0; j < m; ++j)
            for (std::uint32_t i : h.row(j))
                if (i < t)
                    sf.parity_part.set(j, i, 1);
        sf.perm.resize(n);
        std::iota(sf.perm.begin(), sf.perm.end(), 0);
        sf.independent_positions.resize(m);
        std::iota(sf.independent_positions.begin(), sf.independent_positions.end(),
                  static_cast<std::uint32_t>(t));
        return sf;
    }

    BitMatrix d = h.to_dense();
    BitMatrix ops = BitMatrix::identity(m); // accumulates the row operations
    std::vector<std::uint32_t> pivots;
    pivots.reserve(m);
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < m; ++c) {
        std::size_t p = r;
        while (p < m && !d.get(p, c))
            ++p;
        if (p == m)
            continue;
        d.swap_rows(r, p);
        ops.swap_rows(r, p);
        for (std::size_t q = 0; q < m; ++q) {
            if (q != r && d.get(q, c)) {
                d.row_xor(q, r);
                ops.row_xor(q, r);
            }
        }
        pivots.push_back(static_cast<std::uint32_t>(c));
        ++r;
    }
    if (r < m)
        throw RankDeficient("systematic_decompose: rank " + std::to_string(r) +
                            " < " + std::to_string(m) + " checks");

    SystematicForm sf;
    sf.row_transform = gf2_invert(ops); // ops·H = d, so H = ops^{-1}·d
    sf.independent_positions = pivots;

    std::vector<std::uint32_t> nonpivots;
    nonpivots.reserve(t);
    {
        std::size_t pi = 0;
        for (std::uint32_t c = 0; c < n; ++c) {
            if (pi < pivots.size() && pivots[pi] == c)
                ++pi;
            else
                nonpivots.push_back(c);
        }
    }
    sf.perm.resize(n);
    for (std::size_t k = 0; k < t; ++k)
        sf.perm[k] = nonpivots[k];
    for (std::size_t k = 0; k < m; ++k)
        sf.perm[t + k] = pivots[k];

    sf.parity_part = BitMatrix(m, t);
    for (std::size_t k = 0; k < t; ++k)
        for (std::size_t row = 0; row < m; ++row)
            if (d.get(row, nonpivots[k]))
                sf.parity_part.set(row, k, 1);
    return sf;
}

} // namespace qkdpp
