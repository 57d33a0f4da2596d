#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "qkdpp/bit_matrix.hpp"
#include "qkdpp/errors.hpp"
#include "qkdpp/parity_check_matrix.hpp"
#include "qkdpp/rng.hpp"
#include "qkdpp/systematic.hpp"

namespace qkdpp {

enum class WaveLayout { compact, separated };

inline const char* to_string(WaveLayout w) {
    return w == WaveLayout::compact ? "compact" : "separated";
}

inline WaveLayout wave_layout_from_string(const std::string& s) {
    if (s == "compact")
        return WaveLayout::compact;
    if (s == "separated")
        return WaveLayout::separated;
    throw InvalidArgument("unknown wave layout '" + s + "' (compact|separated)");
}

// u same-shape parity-check matrices sharing one set of m linearly independent
// column positions. Immutable after construction; the stacked-rank audit is
// computed lazily once and shared across copies.
class CodeFamily {
public:
    CodeFamily(std::vector<ParityCheckMatrix> codes,
               std::vector<std::uint32_t> independent_positions, WaveLayout layout,
               std::uint64_t seed)
        : codes_(std::move(codes)), positions_(std::move(independent_positions)),
          layout_(layout), seed_(seed), audit_(std::make_shared<AuditCache>()) {
        if (codes_.empty())
            throw DimensionError("CodeFamily: at least one member required");
        const std::size_t m = codes_[0].check_count();
        const std::size_t n = codes_[0].variable_count();
        for (const auto& h : codes_)
            if (h.check_count() != m || h.variable_count() != n)
                throw DimensionError("CodeFamily: members must share one shape");
        if (positions_.size() != m)
            throw DimensionError("CodeFamily: expected " + std::to_string(m) +
                                 " independent positions, got " +
                                 std::to_string(positions_.size()));
        for (std::size_t k = 0; k < positions_.size(); ++k) {
            if (positions_[k] >= n)
                throw DimensionError("CodeFamily: independent position out of range");
            if (k > 0 && positions_[k] <= positions_[k - 1])
                throw ConsistencyError("CodeFamily: independent positions must be "
                                       "strictly ascending");
        }
        // Every member must be invertible on the shared positions, and carry
        // the base's degree multisets (a permutation preserves both).
        std::vector<std::size_t> row_deg0 = degree_multiset_rows(codes_[0]);
        std::vector<std::size_t> col_deg0 = degree_multiset_cols(codes_[0]);
        for (std::size_t k = 0; k < codes_.size(); ++k) {
            if (submatrix_rank(codes_[k]) != m)
                throw RankDeficient("CodeFamily: member " + std::to_string(k) +
                                    " is singular on the independent positions");
            if (k > 0 && (degree_multiset_rows(codes_[k]) != row_deg0 ||
                          degree_multiset_cols(codes_[k]) != col_deg0))
                throw ConsistencyError("CodeFamily: member " + std::to_string(k) +
                                       " degree multisets differ from member 0");
        }
        id_ = compute_id();
    }

    std::size_t u() const noexcept { return codes_.size(); }
    std::size_t m() const noexcept { return codes_[0].check_count(); }
    std::size_t n() const noexcept { return codes_[0].variable_count(); }

    const ParityCheckMatrix& member(std::size_t k) const {
        if (k >= codes_.size())
            throw DimensionError("CodeFamily::member: index out of range");
        return codes_[k];
    }

    const std::vector<std::uint32_t>& independent_positions() const noexcept {
        return positions_;
    }
    WaveLayout wave_layout() const noexcept { return layout_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t family_id() const noexcept { return id_; }

    // Family restricted to its first u_sub members (shares positions/seed).
    CodeFamily prefix(std::size_t u_sub) const {
        if (u_sub < 1 || u_sub > codes_.size())
            throw DimensionError("CodeFamily::prefix: bad member count");
        return CodeFamily(std::vector<ParityCheckMatrix>(codes_.begin(),
                                                         codes_.begin() + u_sub),
                          positions_, layout_, seed_);
    }

    // GF(2) rank of all members stacked vertically; the measured leakage.
    std::size_t stacked_rank() const {
        std::call_once(audit_->once, [this] {
            BitMatrix stacked(u() * m(), n());
            std::size_t r = 0;
            for (const auto& h : codes_) {
                for (std::size_t j = 0; j < h.check_count(); ++j, ++r)
                    for (std::uint32_t i : h.row(j))
                        stacked.set(r, i, 1);
            }
            audit_->rank = stacked.rank_destructive();
        });
        return audit_->rank;
    }

    bool operator==(const CodeFamily& other) const {
        return codes_ == other.codes_ && positions_ == other.positions_ &&
               layout_ == other.layout_ && seed_ == other.seed_;
    }

private:
    struct AuditCache {
        std::once_flag once;
        std::size_t rank = 0;
    };

    static std::vector<std::size_t> degree_multiset_rows(const ParityCheckMatrix& h) {
        std::vector<std::size_t> d(h.check_count());
        for (std::size_t j = 0; j < h.check_count(); ++j)
            d[j] = h.row_degree(j);
        std::sort(d.begin(), d.end());
        return d;
    }
    static std::vector<std::size_t> degree_multiset_cols(const ParityCheckMatrix& h) {
        std::vector<std::size_t> d(h.variable_count());
        for (std::size_t i = 0; i < h.variable_count(); ++i)
            d[i] = h.col_degree(i);
        std::sort(d.begin(), d.end());
        return d;
    }

    std::size_t submatrix_rank(const ParityCheckMatrix& h) const {
        const std::size_t mm = m();
        BitMatrix sub(mm, mm);
        std::vector<std::uint32_t> col_of(n(), UINT32_MAX);
        for (std::size_t k = 0; k < positions_.size(); ++k)
            col_of[positions_[k]] = static_cast<std::uint32_t>(k);
        for (std::size_t j = 0; j < mm; ++j)
            for (std::uint32_t i : h.row(j))
                if (col_of[i] != UINT32_MAX)
                    sub.set(j, col_of[i], 1);
        return sub.rank_destructive();
    }

    std::uint64_t compute_id() const {
        std::uint64_t x = 0xcbf29ce484222325ULL; // FNV-1a over the structure
        auto mix = [&x](std::uint64_t v) {
            x ^= v;
            x *= 0x100000001b3ULL;
        };
        mix(m());
        mix(n());
        mix(u());
        mix(static_cast<std::uint64_t>(layout_));
        for (const auto& h : codes_)
            for (std::size_t j = 0; j < h.check_count(); ++j) {
                mix(0xfeed ^ j);
                for (std::uint32_t i : h.row(j))
                    mix(i + 1);
            }
        for (std::uint32_t p : positions_)
            mix(0x9e37 ^ p);
        return x;
    }

    std::vector<ParityCheckMatrix> codes_;
    std::vector<std::uint32_t> positions_;
    WaveLayout layout_;
    std::uint64_t seed_;
    std::uint64_t id_ = 0;
    std::shared_ptr<AuditCache> audit_;
};

// Appendix-style family derivation: member 0 is the base; each further member
// permutes base columns independently within the independent-position group and
// within its complement, so all members stay invertible on the shared set.
// `separated` steers each group's heaviest columns onto the least-used
// positions so the high-degree "waves" of distinct members overlap as little
// as possible; `compact` permutes only within equal-degree classes so they
// overlap completely.
inline CodeFamily derive_family(const ParityCheckMatrix& base, std::size_t u,
                                WaveLayout layout, std::uint64_t seed) {
    if (u < 1)
        throw InvalidArgument("derive_family: u must be >= 1");
    const std::size_t n = base.variable_count();

    SystematicForm sf = systematic_decompose(base); // throws RankDeficient
    const std::vector<std::uint32_t>& p_group = sf.independent_positions;
    std::vector<std::uint32_t> q_group;
    q_group.reserve(n - p_group.size());
    {
        std::size_t pi = 0;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (pi < p_group.size() && p_group[pi] == i)
                ++pi;
            else
                q_group.push_back(i);
        }
    }

    std::vector<std::uint32_t> degree(n);
    for (std::uint32_t i = 0; i < n; ++i)
        degree[i] = static_cast<std::uint32_t>(base.col_degree(i));

    std::mt19937_64 rng(derive_seed(seed, 0xfa111, static_cast<std::uint64_t>(layout)));

    // usage[p]: how many members so far put one of the group's heaviest
    // columns at position p (baseline includes member 0).
    std::vector<std::uint32_t> usage(n, 0);
    auto group_max_degree = [&](const std::vector<std::uint32_t>& g) {
        std::uint32_t d = 0;
        for (std::uint32_t p : g)
            d = std::max(d, degree[p]);
        return d;
    };
    const std::uint32_t hi_p = group_max_degree(p_group);
    const std::uint32_t hi_q = q_group.empty() ? 0 : group_max_degree(q_group);
    for (std::uint32_t p : p_group)
        if (degree[p] == hi_p)
            ++usage[p];
    for (std::uint32_t p : q_group)
        if (degree[p] == hi_q)
            ++usage[p];

    std::vector<ParityCheckMatrix> members;
    members.reserve(u);
    members.push_back(base);

    std::vector<std::uint32_t> newpos(n);
    for (std::size_t k = 1; k < u; ++k) {
        auto permute_group = [&](const std::vector<std::uint32_t>& g, std::uint32_t hi) {
            if (g.empty())
                return;
            if (layout == WaveLayout::compact) {
                // shuffle separately within each equal-degree class: every
                // position keeps its degree, so heavy positions coincide
                // across all members
                std::vector<std::uint32_t> cls = g;
                std::stable_sort(cls.begin(), cls.end(),
                                 [&](std::uint32_t a, std::uint32_t b) {
                                     return degree[a] < degree[b];
                                 });
                std::size_t lo = 0;
                while (lo < cls.size()) {
                    std::size_t hi_idx = lo;
                    while (hi_idx < cls.size() &&
                           degree[cls[hi_idx]] == degree[cls[lo]])
                        ++hi_idx;
                    std::vector<std::uint32_t> targets(cls.begin() + lo,
                                                       cls.begin() + hi_idx);
                    shuffle_vec(targets, rng);
                    for (std::size_t t = 0; t < targets.size(); ++t)
                        newpos[cls[lo + t]] = targets[t];
                    lo = hi_idx;
                }
                return;
            }
            // separated: heaviest columns go to the least-used positions
            std::vector<std::uint32_t> heavy_src, light_src;
            for (std::uint32_t p : g)
                (degree[p] == hi ? heavy_src : light_src).push_back(p);
            std::vector<std::uint32_t> slots = g;
            shuffle_vec(slots, rng); // random tie-break before the stable sort
            std::stable_sort(slots.begin(), slots.end(),
                             [&](std::uint32_t a, std::uint32_t b) {
                                 return usage[a] < usage[b];
                             });
            std::vector<std::uint32_t> heavy_dst(slots.begin(),
                                                 slots.begin() + heavy_src.size());
            std::vector<std::uint32_t> light_dst(slots.begin() + heavy_src.size(),
                                                 slots.end());
            shuffle_vec(heavy_dst, rng);
            shuffle_vec(light_dst, rng);
            for (std::size_t t = 0; t < heavy_src.size(); ++t) {
                newpos[heavy_src[t]] = heavy_dst[t];
                ++usage[heavy_dst[t]];
            }
            for (std::size_t t = 0; t < light_src.size(); ++t)
                newpos[light_src[t]] = light_dst[t];
        };
        permute_group(q_group, hi_q);
        permute_group(p_group, hi_p);

        std::vector<std::vector<std::uint32_t>> rows(base.check_count());
        for (std::size_t j = 0; j < base.check_count(); ++j) {
            rows[j].reserve(base.row_degree(j));
            for (std::uint32_t i : base.row(j))
                rows[j].push_back(newpos[i]);
        }
        members.emplace_back(base.check_count(), n, std::move(rows));
    }

    return CodeFamily(std::move(members), p_group, layout, seed);
}

} // namespace qkdpp
