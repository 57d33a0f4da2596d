#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <vector>

#include "qkdpp/alist.hpp"
#include "qkdpp/code_builder.hpp"
#include "qkdpp/code_family.hpp"
#include "qkdpp/degree_spec.hpp"
#include "qkdpp/systematic.hpp"

using namespace qkdpp;

namespace {

ParityCheckMatrix small_full_rank_base(std::uint64_t seed = 77) {
    return build_base_matrix(DegreeSpec::regular(8, 4, 3), seed);
}

std::set<std::uint32_t> heavy_positions(const ParityCheckMatrix& h,
                                        const std::vector<std::uint32_t>& group) {
    std::uint32_t hi = 0;
    for (std::uint32_t p : group)
        hi = std::max(hi, static_cast<std::uint32_t>(h.col_degree(p)));
    std::set<std::uint32_t> out;
    for (std::uint32_t p : group)
        if (h.col_degree(p) == hi)
            out.insert(p);
    return out;
}

} // namespace

TEST_CASE("DegreeSpec validation") {
    SECTION("regular factory is consistent") {
        DegreeSpec s = DegreeSpec::regular(8, 4, 2);
        REQUIRE_NOTHROW(s.validate());
        REQUIRE(s.check_degrees == std::vector<std::uint32_t>(4, 4));
    }
    SECTION("edge-count mismatch rejected") {
        DegreeSpec s = DegreeSpec::regular(8, 4, 2);
        s.variable_degrees[0] = 3;
        REQUIRE_THROWS_AS(s.validate(), InfeasibleSpec);
    }
    SECTION("zero degree rejected") {
        DegreeSpec s = DegreeSpec::regular(8, 4, 2);
        s.variable_degrees[0] = 0;
        s.check_degrees[0] = 3;
        REQUIRE_THROWS_AS(s.validate(), InfeasibleSpec);
    }
    SECTION("degree exceeding opposite dimension rejected") {
        DegreeSpec s = DegreeSpec::regular(4, 8, 2);
        s.variable_degrees[0] = 9; // > m
        s.check_degrees[0] += 7;
        REQUIRE_THROWS_AS(s.validate(), InfeasibleSpec);
    }
    SECTION("Gale-Ryser catches unrealizable concentration") {
        // Sums match and every degree is in range, yet two degree-4 variables
        // would force every check to degree >= 2, contradicting the two
        // degree-1 checks.
        DegreeSpec s;
        s.n = 4;
        s.m = 4;
        s.variable_degrees = {4, 4, 1, 1};
        s.check_degrees = {4, 4, 1, 1};
        REQUIRE_THROWS_AS(s.validate(), InfeasibleSpec);
        s.check_degrees = {3, 3, 2, 2}; // same sum, spread out: realizable
        REQUIRE_NOTHROW(s.validate());
    }
    SECTION("irregular factory counts must sum to n") {
        REQUIRE_THROWS_AS(DegreeSpec::irregular(10, 4, {{2, 4}, {3, 4}}),
                          InfeasibleSpec);
        DegreeSpec s = DegreeSpec::irregular(10, 4, {{2, 6}, {5, 4}});
        REQUIRE(s.variable_degrees.size() == 10);
    }
}

TEST_CASE("build_base_matrix") {
    SECTION("regular 4x8 realizes degrees exactly") {
        BuildStats stats;
        ParityCheckMatrix h = build_base_matrix(DegreeSpec::regular(8, 4, 3), 1234, &stats);
        REQUIRE(h.check_count() == 4);
        REQUIRE(h.variable_count() == 8);
        for (std::size_t i = 0; i < 8; ++i)
            REQUIRE(h.col_degree(i) == 3);
        for (std::size_t j = 0; j < 4; ++j)
            REQUIRE(h.row_degree(j) == 6);
        REQUIRE(gf2_rank(h) == 4);
    }
    SECTION("all-even column degrees can never reach full row rank") {
        // every column appears in an even number of rows, so the rows sum to
        // zero over GF(2); the builder must refuse rather than hand back a
        // rank-deficient matrix
        REQUIRE_THROWS_AS(build_base_matrix(DegreeSpec::regular(8, 4, 2), 1234),
                          ConstructionFailed);
    }
    SECTION("infeasible spec refused before construction") {
        DegreeSpec s = DegreeSpec::regular(8, 4, 3);
        s.check_degrees[0] = 5;
        REQUIRE_THROWS_AS(build_base_matrix(s, 1), InfeasibleSpec);
    }
    SECTION("deterministic in the seed") {
        DegreeSpec s = DegreeSpec::regular(60, 15, 3);
        REQUIRE(build_base_matrix(s, 99) == build_base_matrix(s, 99));
        REQUIRE_FALSE(build_base_matrix(s, 99) == build_base_matrix(s, 100));
    }
    SECTION("girth report matches a brute-force 4-cycle scan") {
        BuildStats stats;
        ParityCheckMatrix h =
            build_base_matrix(DegreeSpec::regular(200, 50, 3), 2024, &stats);
        if (stats.four_cycle_free)
            REQUIRE_FALSE(has_four_cycle(h));
        // dense control case: a 4-cycle is unavoidable and must be detected
        ParityCheckMatrix dense(2, 3, {{0, 1, 2}, {0, 1}});
        REQUIRE(has_four_cycle(dense));
    }
    SECTION("paper-scale shape: n=10000 rate 0.8, full row rank") {
        BuildStats stats;
        ParityCheckMatrix h =
            build_base_matrix(DegreeSpec::regular(10000, 2000, 3), 31337, &stats);
        REQUIRE(h.check_count() == 2000);
        REQUIRE(h.variable_count() == 10000);
        REQUIRE(gf2_rank(h) == 2000);
        REQUIRE(stats.four_cycle_free); // ample room at this sparsity
    }
}

TEST_CASE("derive_family") {
    ParityCheckMatrix base = small_full_rank_base();

    SECTION("u=1 wraps exactly the base") {
        CodeFamily fam = derive_family(base, 1, WaveLayout::compact, 5);
        REQUIRE(fam.u() == 1);
        REQUIRE(fam.member(0) == base);
    }
    SECTION("u=3 members share positions, degrees, and submatrix rank") {
        CodeFamily fam = derive_family(base, 3, WaveLayout::compact, 5);
        REQUIRE(fam.u() == 3);
        REQUIRE(fam.independent_positions().size() == 4);
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& h = fam.member(k);
            // pivoting restricted to the family positions must succeed: the
            // submatrix there is invertible for every member
            BitMatrix sub(4, 4);
            for (std::size_t j = 0; j < 4; ++j)
                for (std::size_t c = 0; c < 4; ++c)
                    sub.set(j, c, h.to_dense().get(j, fam.independent_positions()[c]));
            REQUIRE(gf2_rank(sub) == 4);
        }
    }
    SECTION("deterministic and layout-sensitive") {
        CodeFamily a = derive_family(base, 3, WaveLayout::separated, 5);
        CodeFamily b = derive_family(base, 3, WaveLayout::separated, 5);
        REQUIRE(a == b);
        REQUIRE(a.family_id() == b.family_id());
        CodeFamily c = derive_family(base, 3, WaveLayout::separated, 6);
        REQUIRE_FALSE(a == c);
    }
    SECTION("compact layout preserves per-position degrees") {
        // irregular base: a few heavy columns among light ones
        DegreeSpec s = DegreeSpec::irregular(40, 10, {{5, 2}, {2, 38}});
        ParityCheckMatrix h = build_base_matrix(s, 404);
        CodeFamily fam = derive_family(h, 4, WaveLayout::compact, 11);
        for (std::size_t k = 1; k < fam.u(); ++k)
            for (std::size_t i = 0; i < h.variable_count(); ++i)
                REQUIRE(fam.member(k).col_degree(i) == h.col_degree(i));
    }
    SECTION("separated layout moves heavy columns off the base positions") {
        DegreeSpec s = DegreeSpec::irregular(40, 10, {{5, 2}, {2, 38}});
        ParityCheckMatrix h = build_base_matrix(s, 404);
        CodeFamily fam = derive_family(h, 2, WaveLayout::separated, 11);

        SystematicForm sf = systematic_decompose(h);
        std::vector<std::uint32_t> q_group;
        {
            std::size_t pi = 0;
            for (std::uint32_t i = 0; i < 40; ++i) {
                if (pi < sf.independent_positions.size() &&
                    sf.independent_positions[pi] == i)
                    ++pi;
                else
                    q_group.push_back(i);
            }
        }
        // within each group: member 1's heaviest positions are disjoint from
        // member 0's whenever the group holds enough positions
        for (const auto& group : {q_group, sf.independent_positions}) {
            auto h0 = heavy_positions(fam.member(0), group);
            auto h1 = heavy_positions(fam.member(1), group);
            if (group.size() >= 2 * h0.size() && h0.size() < group.size()) {
                for (std::uint32_t p : h1)
                    REQUIRE(h0.count(p) == 0);
            }
        }
    }
    SECTION("prefix keeps leading members and shared positions") {
        CodeFamily fam = derive_family(base, 4, WaveLayout::compact, 5);
        CodeFamily sub = fam.prefix(2);
        REQUIRE(sub.u() == 2);
        REQUIRE(sub.member(0) == fam.member(0));
        REQUIRE(sub.member(1) == fam.member(1));
        REQUIRE(sub.independent_positions() == fam.independent_positions());
        REQUIRE(sub.family_id() != fam.family_id());
    }
    SECTION("rank-deficient base refused") {
        ParityCheckMatrix bad(3, 6, {{0, 1}, {0, 1}, {2, 3}});
        REQUIRE_THROWS_AS(derive_family(bad, 2, WaveLayout::compact, 1), RankDeficient);
    }
}

TEST_CASE("alist round trips") {
    SECTION("hand-written alist parses to the 2x3 matrix") {
        const std::string text = "3 2\n"
                                 "2 2\n"
                                 "1 2 1\n"
                                 "2 2\n"
                                 "1\n"
                                 "1 2\n"
                                 "2\n"
                                 "1 2\n"
                                 "2 3\n";
        ParityCheckMatrix h = read_alist_string(text);
        REQUIRE(h == ParityCheckMatrix(2, 3, {{0, 1}, {1, 2}}));
    }
    SECTION("canonical 1x1 output") {
        ParityCheckMatrix h(1, 1, {{0}});
        REQUIRE(write_alist_string(h) == "1 1\n1 1\n1\n1\n1\n1\n");
    }
    SECTION("round trip is bit-exact and canonical output is byte-stable") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 20; ++trial) {
            ParityCheckMatrix h = build_base_matrix(
                DegreeSpec::regular(30 + 2 * trial, 10, 3), 1000 + trial);
            const std::string text = write_alist_string(h);
            ParityCheckMatrix back = read_alist_string(text);
            REQUIRE(back == h);
            REQUIRE(write_alist_string(back) == text);
        }
    }
    SECTION("zero padding accepted on read") {
        const std::string padded = "3 2\n"
                                   "2 2\n"
                                   "1 2 1\n"
                                   "2 2\n"
                                   "1 0\n"
                                   "1 2\n"
                                   "2 0\n"
                                   "1 2\n"
                                   "2 3\n";
        REQUIRE(read_alist_string(padded) ==
                ParityCheckMatrix(2, 3, {{0, 1}, {1, 2}}));
    }
    SECTION("truncated file raises ParseError with a line number") {
        const std::string text = "3 2\n2 2\n1 2 1\n";
        try {
            read_alist_string(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            REQUIRE(e.line() == 4);
        }
    }
    SECTION("disagreeing sections raise ConsistencyError") {
        const std::string text = "3 2\n"
                                 "2 2\n"
                                 "1 2 1\n"
                                 "2 2\n"
                                 "1\n"
                                 "1 2\n"
                                 "1\n" // claims v2 touches check 1, rows say check 2
                                 "1 2\n"
                                 "2 3\n";
        REQUIRE_THROWS_AS(read_alist_string(text), ConsistencyError);
    }
    SECTION("out-of-range index raises ParseError") {
        const std::string text = "3 2\n"
                                 "2 2\n"
                                 "1 2 1\n"
                                 "2 2\n"
                                 "1\n"
                                 "1 3\n" // check index 3 > m=2
                                 "2\n"
                                 "1 2\n"
                                 "2 3\n";
        REQUIRE_THROWS_AS(read_alist_string(text), ParseError);
    }
}

TEST_CASE("family directory round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "qkdpp_family_test";
    fs::remove_all(dir);

    ParityCheckMatrix base = build_base_matrix(DegreeSpec::regular(24, 6, 3), 3);
    CodeFamily fam = derive_family(base, 3, WaveLayout::separated, 42);
    write_family_dir(dir, fam);

    SECTION("reads back identical members and metadata") {
        CodeFamily back = read_family_dir(dir);
        REQUIRE(back == fam);
        REQUIRE(back.family_id() == fam.family_id());
    }
    SECTION("missing member file raises IoError") {
        fs::remove(dir / "H2.alist");
        REQUIRE_THROWS_AS(read_family_dir(dir), IoError);
    }
    fs::remove_all(dir);
}
