#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "qkdpp/errors.hpp"

namespace qkdpp {

// Fixed-length vector over GF(2). Length is set at construction and never
// changes; all index access is bounds-checked.
class BitBlock {
public:
    BitBlock() = default;

    explicit BitBlock(std::size_t length) : bits_(length, 0) {}

    explicit BitBlock(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        for (std::uint8_t b : bits_) {
            if (b > 1)
                throw DimensionError("BitBlock: entries must be 0 or 1");
        }
    }

    BitBlock(std::initializer_list<int> bits) {
        bits_.reserve(bits.size());
        for (int b : bits) {
            if (b != 0 && b != 1)
                throw DimensionError("BitBlock: entries must be 0 or 1");
            bits_.push_back(static_cast<std::uint8_t>(b));
        }
    }

    std::size_t size() const noexcept { return bits_.size(); }

    std::uint8_t get(std::size_t i) const {
        check_index(i);
        return bits_[i];
    }

    void set(std::size_t i, std::uint8_t value) {
        check_index(i);
        if (value > 1)
            throw DimensionError("BitBlock::set: value must be 0 or 1");
        bits_[i] = value;
    }

    void flip(std::size_t i) {
        check_index(i);
        bits_[i] ^= 1u;
    }

    BitBlock& operator^=(const BitBlock& other) {
        if (other.size() != size())
            throw DimensionError("BitBlock XOR: length mismatch (" +
                                 std::to_string(size()) + " vs " +
                                 std::to_string(other.size()) + ")");
        for (std::size_t i = 0; i < bits_.size(); ++i)
            bits_[i] ^= other.bits_[i];
        return *this;
    }

    friend BitBlock operator^(BitBlock lhs, const BitBlock& rhs) {
        lhs ^= rhs;
        return lhs;
    }

    bool operator==(const BitBlock& other) const = default;

    std::size_t popcount() const noexcept {
        std::size_t c = 0;
        for (std::uint8_t b : bits_)
            c += b;
        return c;
    }

    bool all_zero() const noexcept { return popcount() == 0; }

    std::size_t hamming_distance(const BitBlock& other) const {
        if (other.size() != size())
            throw DimensionError("hamming_distance: length mismatch");
        std::size_t d = 0;
        for (std::size_t i = 0; i < bits_.size(); ++i)
            d += static_cast<std::size_t>(bits_[i] != other.bits_[i]);
        return d;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(bits_.size());
        for (std::uint8_t b : bits_)
            s.push_back(b ? '1' : '0');
        return s;
    }

    const std::vector<std::uint8_t>& data() const noexcept { return bits_; }

private:
    void check_index(std::size_t i) const {
        if (i >= bits_.size())
            throw DimensionError("BitBlock: index " + std::to_string(i) +
                                 " out of range for length " +
                                 std::to_string(bits_.size()));
    }

    std::vector<std::uint8_t> bits_;
};

} // namespace qkdpp
