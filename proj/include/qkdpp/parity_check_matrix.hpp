#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qkdpp/bit_block.hpp"
#include "qkdpp/bit_matrix.hpp"
#include "qkdpp/errors.hpp"

namespace qkdpp {

// Sparse binary parity-check matrix stored as a Tanner graph: per-check
// variable lists and the transposed per-variable check lists. Adjacency lists
// are kept sorted ascending; the two views always describe the same edge set.
class ParityCheckMatrix {
public:
    ParityCheckMatrix() = default;

    ParityCheckMatrix(std::size_t check_count, std::size_t variable_count,
                      std::vector<std::vector<std::uint32_t>> check_rows)
        : m_(check_count), n_(variable_count), rows_(std::move(check_rows)) {
        if (rows_.size() != m_)
            throw DimensionError("ParityCheckMatrix: expected " + std::to_string(m_) +
                                 " rows, got " + std::to_string(rows_.size()));
        cols_.assign(n_, {});
        for (std::size_t j = 0; j < m_; ++j) {
            auto& row = rows_[j];
            std::sort(row.begin(), row.end());
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (row[k] >= n_)
                    throw DimensionError("ParityCheckMatrix: variable index " +
                                         std::to_string(row[k]) + " out of range in check " +
                                         std::to_string(j));
                if (k > 0 && row[k] == row[k - 1])
                    throw ConsistencyError("ParityCheckMatrix: duplicate variable " +
                                           std::to_string(row[k]) + " in check " +
                                           std::to_string(j));
                cols_[row[k]].push_back(static_cast<std::uint32_t>(j));
            }
            edge_count_ += row.size();
        }
        // Column lists come out sorted because checks are visited in order.
    }

    std::size_t check_count() const noexcept { return m_; }
    std::size_t variable_count() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edge_count_; }

    const std::vector<std::uint32_t>& row(std::size_t j) const {
        if (j >= m_)
            throw DimensionError("ParityCheckMatrix::row: index out of range");
        return rows_[j];
    }

    const std::vector<std::uint32_t>& col(std::size_t i) const {
        if (i >= n_)
            throw DimensionError("ParityCheckMatrix::col: index out of range");
        return cols_[i];
    }

    std::size_t row_degree(std::size_t j) const { return row(j).size(); }
    std::size_t col_degree(std::size_t i) const { return col(i).size(); }

    bool has_entry(std::size_t j, std::size_t i) const {
        const auto& r = row(j);
        return std::binary_search(r.begin(), r.end(), static_cast<std::uint32_t>(i));
    }

    bool operator==(const ParityCheckMatrix& other) const {
        return m_ == other.m_ && n_ == other.n_ && rows_ == other.rows_;
    }

    BitMatrix to_dense() const {
        BitMatrix d(m_, n_);
        for (std::size_t j = 0; j < m_; ++j)
            for (std::uint32_t i : rows_[j])
                d.set(j, i, 1);
        return d;
    }

private:
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::size_t edge_count_ = 0;
    std::vector<std::vector<std::uint32_t>> rows_;
    std::vector<std::vector<std::uint32_t>> cols_;
};

// Syndrome map z = H·x over GF(2).
inline BitBlock mat_vec_mul(const ParityCheckMatrix& h, const BitBlock& x) {
    if (x.size() != h.variable_count())
        throw DimensionError("mat_vec_mul: key length " + std::to_string(x.size()) +
                             " does not match " + std::to_string(h.variable_count()) +
                             " variables");
    BitBlock z(h.check_count());
    for (std::size_t j = 0; j < h.check_count(); ++j) {
        std::uint8_t acc = 0;
        for (std::uint32_t i : h.row(j))
            acc ^= x.get(i);
        z.set(j, acc);
    }
    return z;
}

inline std::size_t gf2_rank(const ParityCheckMatrix& h) {
    return gf2_rank(h.to_dense());
}

} // namespace qkdpp
