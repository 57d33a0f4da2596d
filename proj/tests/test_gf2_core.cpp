#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "qkdpp/bit_block.hpp"
#include "qkdpp/bit_matrix.hpp"
#include "qkdpp/parity_check_matrix.hpp"
#include "qkdpp/rng.hpp"
#include "qkdpp/systematic.hpp"

using namespace qkdpp;

namespace {

ParityCheckMatrix from_rows(std::size_t m, std::size_t n,
                            std::vector<std::vector<std::uint32_t>> rows) {
    return ParityCheckMatrix(m, n, std::move(rows));
}

ParityCheckMatrix identity_pcm(std::size_t n) {
    std::vector<std::vector<std::uint32_t>> rows(n);
    for (std::size_t i = 0; i < n; ++i)
        rows[i] = {static_cast<std::uint32_t>(i)};
    return from_rows(n, n, std::move(rows));
}

ParityCheckMatrix random_pcm(std::size_t m, std::size_t n, std::mt19937_64& rng,
                             double density = 0.5) {
    std::vector<std::vector<std::uint32_t>> rows(m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (uniform_double(rng) < density)
                rows[j].push_back(static_cast<std::uint32_t>(i));
    return from_rows(m, n, std::move(rows));
}

ParityCheckMatrix random_full_rank_pcm(std::size_t m, std::size_t n,
                                       std::mt19937_64& rng) {
    for (;;) {
        ParityCheckMatrix h = random_pcm(m, n, rng);
        if (gf2_rank(h) == m)
            return h;
    }
}

BitBlock random_block(std::size_t n, std::mt19937_64& rng) {
    BitBlock b(n);
    for (std::size_t i = 0; i < n; ++i)
        b.set(i, static_cast<std::uint8_t>(rng() & 1u));
    return b;
}

// Row-span closure: number of distinct XOR combinations is 2^rank.
std::size_t rank_by_span(const ParityCheckMatrix& h) {
    REQUIRE(h.variable_count() <= 64);
    std::set<std::uint64_t> span{0};
    for (std::size_t j = 0; j < h.check_count(); ++j) {
        std::uint64_t mask = 0;
        for (std::uint32_t i : h.row(j))
            mask |= std::uint64_t{1} << i;
        std::set<std::uint64_t> next = span;
        for (std::uint64_t s : span)
            next.insert(s ^ mask);
        span = std::move(next);
    }
    std::size_t r = 0;
    while ((std::size_t{1} << r) < span.size())
        ++r;
    REQUIRE((std::size_t{1} << r) == span.size());
    return r;
}

} // namespace

TEST_CASE("BitBlock basics") {
    BitBlock a{1, 0, 1, 1};
    REQUIRE(a.size() == 4);
    REQUIRE(a.get(0) == 1);
    REQUIRE(a.get(1) == 0);
    REQUIRE(a.popcount() == 3);
    REQUIRE(a.to_string() == "1011");

    SECTION("xor with itself is zero") {
        REQUIRE((a ^ a).all_zero());
    }
    SECTION("length is fixed and access bounds-checked") {
        REQUIRE_THROWS_AS(a.get(4), DimensionError);
        REQUIRE_THROWS_AS(a.set(7, 1), DimensionError);
        BitBlock b{1, 0};
        REQUIRE_THROWS_AS(a ^ b, DimensionError);
        REQUIRE_THROWS_AS(a.hamming_distance(b), DimensionError);
    }
    SECTION("hamming distance") {
        BitBlock b{1, 1, 1, 0};
        REQUIRE(a.hamming_distance(b) == 2);
        REQUIRE(a.hamming_distance(a) == 0);
    }
    SECTION("only binary entries accepted") {
        REQUIRE_THROWS_AS(BitBlock({1, 2, 0}), DimensionError);
        REQUIRE_THROWS_AS(a.set(0, 2), DimensionError);
    }
}

TEST_CASE("ParityCheckMatrix construction and views") {
    ParityCheckMatrix h = from_rows(2, 3, {{0, 1}, {1, 2}});
    REQUIRE(h.check_count() == 2);
    REQUIRE(h.variable_count() == 3);
    REQUIRE(h.edge_count() == 4);
    REQUIRE(h.row_degree(0) == 2);
    REQUIRE(h.col_degree(1) == 2);
    REQUIRE(h.col(0) == std::vector<std::uint32_t>{0});
    REQUIRE(h.col(1) == (std::vector<std::uint32_t>{0, 1}));

    SECTION("rows are sorted on input") {
        ParityCheckMatrix g = from_rows(2, 3, {{1, 0}, {2, 1}});
        REQUIRE(g == h);
    }
    SECTION("duplicate entries rejected") {
        REQUIRE_THROWS_AS(from_rows(1, 3, {{1, 1}}), ConsistencyError);
    }
    SECTION("out-of-range index rejected") {
        REQUIRE_THROWS_AS(from_rows(1, 3, {{3}}), DimensionError);
    }
    SECTION("transpose consistency on a random matrix") {
        std::mt19937_64 rng(7);
        ParityCheckMatrix g = random_pcm(6, 11, rng);
        std::size_t edges_from_cols = 0;
        for (std::size_t i = 0; i < g.variable_count(); ++i) {
            for (std::uint32_t j : g.col(i))
                REQUIRE(g.has_entry(j, i));
            edges_from_cols += g.col_degree(i);
        }
        REQUIRE(edges_from_cols == g.edge_count());
    }
}

TEST_CASE("mat_vec_mul") {
    SECTION("identity matrix returns the key") {
        BitBlock x{1, 0, 1};
        REQUIRE(mat_vec_mul(identity_pcm(3), x) == x);
    }
    SECTION("all-zero key gives all-zero syndrome") {
        std::mt19937_64 rng(3);
        ParityCheckMatrix h = random_pcm(5, 9, rng);
        REQUIRE(mat_vec_mul(h, BitBlock(9)).all_zero());
    }
    SECTION("hand-evaluated 2x3 case") {
        ParityCheckMatrix h = from_rows(2, 3, {{0, 1}, {1, 2}});
        REQUIRE(mat_vec_mul(h, BitBlock{1, 1, 0}) == BitBlock({0, 1}));
    }
    SECTION("length mismatch rejected") {
        REQUIRE_THROWS_AS(mat_vec_mul(identity_pcm(3), BitBlock{1, 0}), DimensionError);
    }
    SECTION("linearity over random inputs") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            ParityCheckMatrix h = random_pcm(6, 14, rng);
            BitBlock x1 = random_block(14, rng);
            BitBlock x2 = random_block(14, rng);
            REQUIRE(mat_vec_mul(h, x1 ^ x2) ==
                    (mat_vec_mul(h, x1) ^ mat_vec_mul(h, x2)));
        }
    }
}

TEST_CASE("gf2_rank") {
    SECTION("identity has full rank") {
        REQUIRE(gf2_rank(identity_pcm(7)) == 7);
    }
    SECTION("zero matrix has rank zero") {
        REQUIRE(gf2_rank(from_rows(4, 6, {{}, {}, {}, {}})) == 0);
    }
    SECTION("dependent third row") {
        ParityCheckMatrix h = from_rows(3, 3, {{0, 1}, {1, 2}, {0, 2}});
        REQUIRE(gf2_rank(h) == 2);
    }
    SECTION("agrees with row-span enumeration up to m=12") {
        std::mt19937_64 rng(19);
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t m = 1 + uniform_index(rng, 12);
            const std::size_t n = 1 + uniform_index(rng, 14);
            ParityCheckMatrix h = random_pcm(m, n, rng, 0.4);
            REQUIRE(gf2_rank(h) == rank_by_span(h));
        }
    }
    SECTION("invariant under row swaps and row additions") {
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t m = 2 + uniform_index(rng, 9);
            const std::size_t n = 2 + uniform_index(rng, 12);
            BitMatrix d = random_pcm(m, n, rng).to_dense();
            BitMatrix mutated = d;
            for (int op = 0; op < 8; ++op) {
                const std::size_t a = uniform_index(rng, m);
                std::size_t b = uniform_index(rng, m);
                if (rng() & 1u)
                    mutated.swap_rows(a, b);
                else if (a != b)
                    mutated.row_xor(a, b);
            }
            REQUIRE(gf2_rank(mutated) == gf2_rank(d));
        }
    }
}

TEST_CASE("BitMatrix inversion and product") {
    std::mt19937_64 rng(31);
    SECTION("inverse times original is identity") {
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t n = 1 + uniform_index(rng, 10);
            BitMatrix m = random_full_rank_pcm(n, n, rng).to_dense();
            BitMatrix inv = gf2_invert(m);
            REQUIRE(inv * m == BitMatrix::identity(n));
            REQUIRE(m * inv == BitMatrix::identity(n));
        }
    }
    SECTION("singular matrix rejected") {
        BitMatrix s(3, 3);
        s.set(0, 0, 1);
        s.set(1, 0, 1); // rows 0 and 1 equal
        REQUIRE_THROWS_AS(gf2_invert(s), RankDeficient);
    }
}

TEST_CASE("systematic_decompose") {
    SECTION("already-systematic matrix takes the trivial form") {
        // H = (H' | E_2) with H' = [[1,0],[1,1]]
        ParityCheckMatrix h = from_rows(2, 4, {{0, 2}, {0, 1, 3}});
        SystematicForm sf = systematic_decompose(h);
        REQUIRE(sf.row_transform == BitMatrix::identity(2));
        REQUIRE(sf.perm == (std::vector<std::uint32_t>{0, 1, 2, 3}));
        REQUIRE(sf.independent_positions == (std::vector<std::uint32_t>{2, 3}));
        REQUIRE(sf.parity_part.get(0, 0) == 1);
        REQUIRE(sf.parity_part.get(1, 1) == 1);
        REQUIRE(recompose_dense(sf) == h.to_dense());
    }
    SECTION("seed-fixed random 4x8 recomposes bit-exactly") {
        std::mt19937_64 rng(4242);
        ParityCheckMatrix h = random_full_rank_pcm(4, 8, rng);
        SystematicForm sf = systematic_decompose(h);
        REQUIRE(recompose_dense(sf) == h.to_dense());
        REQUIRE(sf.independent_positions.size() == 4);
    }
    SECTION("repeated row is rank deficient") {
        ParityCheckMatrix h = from_rows(3, 6, {{0, 2, 4}, {0, 2, 4}, {1, 3}});
        REQUIRE_THROWS_AS(systematic_decompose(h), RankDeficient);
    }
    SECTION("recomposition identity and submatrix rank over random matrices") {
        std::mt19937_64 rng(57);
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t m = 2 + uniform_index(rng, 8);
            const std::size_t n = m + uniform_index(rng, 10);
            ParityCheckMatrix h = random_full_rank_pcm(m, n, rng);
            SystematicForm sf = systematic_decompose(h);
            REQUIRE(recompose_dense(sf) == h.to_dense());

            REQUIRE(gf2_rank(sf.row_transform) == m);
            REQUIRE(std::is_sorted(sf.independent_positions.begin(),
                                   sf.independent_positions.end()));
            // Columns at the recorded positions must span GF(2)^m.
            BitMatrix sub(m, m);
            for (std::size_t k = 0; k < m; ++k)
                for (std::size_t r = 0; r < m; ++r)
                    sub.set(r, k, h.to_dense().get(r, sf.independent_positions[k]));
            REQUIRE(gf2_rank(sub) == m);

            // Permutation is a bijection on column indices.
            std::vector<bool> seen(n, false);
            for (std::uint32_t p : sf.perm) {
                REQUIRE(p < n);
                REQUIRE(!seen[p]);
                seen[p] = true;
            }
        }
    }
    SECTION("wide identity block not in trailing position still recomposes") {
        // E_2 sits in the first two columns; the general path must handle it.
        ParityCheckMatrix h = from_rows(2, 4, {{0, 3}, {1, 2, 3}});
        SystematicForm sf = systematic_decompose(h);
        REQUIRE(recompose_dense(sf) == h.to_dense());
        REQUIRE(sf.independent_positions == (std::vector<std::uint32_t>{0, 1}));
    }
}
