#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qkdpp/bit_block.hpp"
#include "qkdpp/errors.hpp"

namespace qkdpp {

// Dense matrix over GF(2), rows packed into 64-bit words. Workhorse for rank
// computations, inversion and the systematic decomposition; not intended for
// sparse iteration (ParityCheckMatrix covers that).
class BitMatrix {
public:
    BitMatrix() = default;

    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), words_per_row_((cols + 63) / 64),
          data_(rows * words_per_row_, 0) {}

    static BitMatrix identity(std::size_t n) {
        BitMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m.set(i, i, 1);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::uint8_t get(std::size_t r, std::size_t c) const {
        check_pos(r, c);
        return (data_[r * words_per_row_ + c / 64] >> (c % 64)) & 1u;
    }

    void set(std::size_t r, std::size_t c, std::uint8_t value) {
        check_pos(r, c);
        std::uint64_t& w = data_[r * words_per_row_ + c / 64];
        const std::uint64_t mask = std::uint64_t{1} << (c % 64);
        if (value)
            w |= mask;
        else
            w &= ~mask;
    }

    void flip(std::size_t r, std::size_t c) {
        check_pos(r, c);
        data_[r * words_per_row_ + c / 64] ^= std::uint64_t{1} << (c % 64);
    }

    // dst_row ^= src_row
    void row_xor(std::size_t dst, std::size_t src) {
        const std::uint64_t* s = &data_[src * words_per_row_];
        std::uint64_t* d = &data_[dst * words_per_row_];
        for (std::size_t w = 0; w < words_per_row_; ++w)
            d[w] ^= s[w];
    }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b)
            return;
        std::uint64_t* pa = &data_[a * words_per_row_];
        std::uint64_t* pb = &data_[b * words_per_row_];
        for (std::size_t w = 0; w < words_per_row_; ++w)
            std::swap(pa[w], pb[w]);
    }

    bool row_is_zero(std::size_t r) const {
        const std::uint64_t* p = &data_[r * words_per_row_];
        for (std::size_t w = 0; w < words_per_row_; ++w)
            if (p[w])
                return false;
        return true;
    }

    bool operator==(const BitMatrix& other) const = default;

    BitBlock multiply(const BitBlock& x) const {
        if (x.size() != cols_)
            throw DimensionError("BitMatrix::multiply: vector length " +
                                 std::to_string(x.size()) + " does not match " +
                                 std::to_string(cols_) + " columns");
        BitBlock y(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            std::uint8_t acc = 0;
            for (std::size_t c = 0; c < cols_; ++c)
                acc ^= static_cast<std::uint8_t>(get(r, c) & x.get(c));
            y.set(r, acc);
        }
        return y;
    }

    // GF(2) product; rows of rhs indexed by set bits of each lhs row.
    friend BitMatrix operator*(const BitMatrix& lhs, const BitMatrix& rhs) {
        if (lhs.cols_ != rhs.rows_)
            throw DimensionError("BitMatrix product: inner dimensions differ");
        BitMatrix out(lhs.rows_, rhs.cols_);
        for (std::size_t r = 0; r < lhs.rows_; ++r)
            for (std::size_t k = 0; k < lhs.cols_; ++k)
                if (lhs.get(r, k))
                    out.row_xor_from(r, rhs, k);
        return out;
    }

    // Rank via plain row echelon elimination (pivot on first nonzero column,
    // eliminate below only). Works in place on a copy taken by the caller.
    std::size_t rank_destructive() {
        std::size_t r = 0;
        for (std::size_t c = 0; c < cols_ && r < rows_; ++c) {
            std::size_t pivot = r;
            while (pivot < rows_ && !get(pivot, c))
                ++pivot;
            if (pivot == rows_)
                continue;
            swap_rows(r, pivot);
            for (std::size_t q = r + 1; q < rows_; ++q)
                if (get(q, c))
                    row_xor(q, r);
            ++r;
        }
        return r;
    }

private:
    void row_xor_from(std::size_t dst, const BitMatrix& src, std::size_t src_row) {
        const std::uint64_t* s = &src.data_[src_row * src.words_per_row_];
        std::uint64_t* d = &data_[dst * words_per_row_];
        for (std::size_t w = 0; w < words_per_row_; ++w)
            d[w] ^= s[w];
    }

    void check_pos(std::size_t r, std::size_t c) const {
        if (r >= rows_ || c >= cols_)
            throw DimensionError("BitMatrix: position (" + std::to_string(r) +
                                 "," + std::to_string(c) + ") out of range for " +
                                 std::to_string(rows_) + "x" + std::to_string(cols_));
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t words_per_row_ = 0;
    std::vector<std::uint64_t> data_;
};

inline std::size_t gf2_rank(BitMatrix m) { return m.rank_destructive(); }

// Inverse of a square invertible matrix by Gauss-Jordan; throws RankDeficient
// if the matrix is singular or not square.
inline BitMatrix gf2_invert(const BitMatrix& m) {
    if (m.rows() != m.cols())
        throw RankDeficient("gf2_invert: matrix is not square");
    const std::size_t n = m.rows();
    BitMatrix work = m;
    BitMatrix inv = BitMatrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        while (pivot < n && !work.get(pivot, c))
            ++pivot;
        if (pivot == n)
            throw RankDeficient("gf2_invert: matrix is singular");
        work.swap_rows(c, pivot);
        inv.swap_rows(c, pivot);
        for (std::size_t q = 0; q < n; ++q) {
            if (q != c && work.get(q, c)) {
                work.row_xor(q, c);
                inv.row_xor(q, c);
            }
        }
    }
    return inv;
}

} // namespace qkdpp
