#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qkdpp/bit_block.hpp"
#include "qkdpp/code_family.hpp"
#include "qkdpp/errors.hpp"
#include "qkdpp/estimation.hpp"
#include "qkdpp/rng.hpp"

namespace qkdpp {

// Message magnitudes are capped here after every update; the atanh argument is
// kept strictly inside (-1, 1) so check messages stay finite.
inline constexpr double LLR_CLAMP = 30.0;
inline constexpr double ATANH_ARG_MAX = 1.0 - 1e-12;

enum class Schedule { flooding, shuffled, layered };

inline const char* to_string(Schedule s) {
    switch (s) {
    case Schedule::flooding: return "flooding";
    case Schedule::shuffled: return "shuffled";
    default: return "layered";
    }
}

inline Schedule schedule_from_string(const std::string& s) {
    if (s == "flooding")
        return Schedule::flooding;
    if (s == "shuffled")
        return Schedule::shuffled;
    if (s == "layered")
        return Schedule::layered;
    throw InvalidArgument("unknown schedule '" + s + "' (flooding|shuffled|layered)");
}

enum class ConvergenceMode { random_one, all };

inline const char* to_string(ConvergenceMode m) {
    return m == ConvergenceMode::random_one ? "random-one" : "all";
}

inline ConvergenceMode convergence_mode_from_string(const std::string& s) {
    if (s == "random-one")
        return ConvergenceMode::random_one;
    if (s == "all")
        return ConvergenceMode::all;
    throw InvalidArgument("unknown convergence mode '" + s + "' (random-one|all)");
}

struct IterationCorrection {
    std::uint32_t corrected = 0; // wrong -> right flips this iteration
    std::uint32_t misjudged = 0; // right -> wrong flips this iteration
};

struct DecodeResult {
    bool success = false;
    BitBlock corrected_key;
    std::size_t iterations_used = 0;
    std::vector<IterationCorrection> per_iteration; // filled when truth given
    Schedule schedule = Schedule::flooding;
    std::size_t u = 1;
};

namespace detail {

// Edge tables of one family member in CSR form, viewed from both sides.
// Edge ids are assigned row-major (grouped by check, variables ascending).
struct MemberGraph {
    std::vector<std::size_t> row_ptr;      // m+1 offsets into edge_var
    std::vector<std::uint32_t> edge_var;   // variable of each edge
    std::vector<std::uint32_t> edge_check; // check of each edge
    std::vector<std::size_t> col_ptr;      // n+1 offsets into col_edge
    std::vector<std::size_t> col_edge;     // edge ids grouped by variable

    explicit MemberGraph(const ParityCheckMatrix& h) {
        const std::size_t m = h.check_count();
        const std::size_t n = h.variable_count();
        row_ptr.assign(m + 1, 0);
        for (std::size_t j = 0; j < m; ++j)
            row_ptr[j + 1] = row_ptr[j] + h.row_degree(j);
        edge_var.reserve(row_ptr[m]);
        edge_check.reserve(row_ptr[m]);
        for (std::size_t j = 0; j < m; ++j)
            for (std::uint32_t i : h.row(j)) {
                edge_var.push_back(i);
                edge_check.push_back(static_cast<std::uint32_t>(j));
            }
        col_ptr.assign(n + 1, 0);
        for (std::uint32_t i : edge_var)
            ++col_ptr[i + 1];
        for (std::size_t i = 0; i < n; ++i)
            col_ptr[i + 1] += col_ptr[i];
        col_edge.resize(edge_var.size());
        std::vector<std::size_t> cursor(col_ptr.begin(), col_ptr.end() - 1);
        for (std::size_t e = 0; e < edge_var.size(); ++e)
            col_edge[cursor[edge_var[e]]++] = e; // checks ascend within a column
    }
};

inline double clamp_llr(double v) {
    return std::clamp(v, -LLR_CLAMP, LLR_CLAMP);
}

inline double clamp_tanh_arg(double v) {
    return std::clamp(v, -ATANH_ARG_MAX, ATANH_ARG_MAX);
}

} // namespace detail

// Per-session message tables for every family member. Channel log-ratios
// follow L = log(P[bit=0] / P[bit=1]): positive means 0 is likelier.
// Mutated only by decode() and the explicit setters; treat as read-only
// elsewhere.
class DecoderState {
public:
    DecoderState(const BitBlock& y, double e, const CodeFamily& family)
        : family_(&family) {
        if (!(e > 0.0) || !(e < 0.5))
            throw InvalidErrorRate("initialize: error rate " + std::to_string(e) +
                                   " outside (0, 0.5)");
        if (y.size() != family.n())
            throw DimensionError("initialize: key length " + std::to_string(y.size()) +
                                 " does not match n = " + std::to_string(family.n()));
        channel_bits_ = y;
        const double lp = std::log((1.0 - e) / e);
        channel_.resize(family.n());
        for (std::size_t i = 0; i < family.n(); ++i)
            channel_[i] = detail::clamp_llr(y.get(i) ? -lp : lp);

        graphs_.reserve(family.u());
        v2c_.resize(family.u());
        tanh_v2c_.resize(family.u());
        c2v_.resize(family.u());
        for (std::size_t k = 0; k < family.u(); ++k) {
            graphs_.emplace_back(family.member(k));
            const std::size_t edges = graphs_[k].edge_var.size();
            v2c_[k].resize(edges);
            tanh_v2c_[k].resize(edges);
            c2v_[k].assign(edges, 0.0);
            for (std::size_t e_id = 0; e_id < edges; ++e_id)
                write_v2c(k, e_id, channel_[graphs_[k].edge_var[e_id]]);
        }
    }

    const CodeFamily& family() const noexcept { return *family_; }
    std::size_t u() const noexcept { return graphs_.size(); }
    const BitBlock& channel_bits() const noexcept { return channel_bits_; }
    double channel_llr(std::size_t i) const { return channel_.at(i); }
    std::size_t iteration() const noexcept { return iteration_; }

    double v2c(std::size_t k, std::size_t j, std::size_t i) const {
        return v2c_.at(k)[find_edge(k, j, i)];
    }
    double c2v(std::size_t k, std::size_t j, std::size_t i) const {
        return c2v_.at(k)[find_edge(k, j, i)];
    }
    void set_v2c(std::size_t k, std::size_t j, std::size_t i, double value) {
        write_v2c(k, find_edge(k, j, i), value);
    }
    void set_c2v(std::size_t k, std::size_t j, std::size_t i, double value) {
        c2v_.at(k)[find_edge(k, j, i)] = value;
    }

    // Edge id of (check j, variable i) in member k; DimensionError if absent.
    std::size_t find_edge(std::size_t k, std::size_t j, std::size_t i) const {
        const auto& g = graphs_.at(k);
        if (j + 1 >= g.row_ptr.size())
            throw DimensionError("DecoderState: check index out of range");
        const auto begin = g.edge_var.begin() + static_cast<std::ptrdiff_t>(g.row_ptr[j]);
        const auto end = g.edge_var.begin() + static_cast<std::ptrdiff_t>(g.row_ptr[j + 1]);
        const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(i));
        if (it == end || *it != i)
            throw DimensionError("DecoderState: edge (" + std::to_string(j) + "," +
                                 std::to_string(i) + ") absent from member " +
                                 std::to_string(k));
        return static_cast<std::size_t>(it - g.edge_var.begin());
    }

    // decode() internals; kept public for the message-rule free functions.
    void write_v2c(std::size_t k, std::size_t e_id, double value) {
        const double v = detail::clamp_llr(value);
        v2c_[k][e_id] = v;
        tanh_v2c_[k][e_id] = std::tanh(0.5 * v);
    }

    const detail::MemberGraph& graph(std::size_t k) const { return graphs_.at(k); }
    const std::vector<double>& v2c_table(std::size_t k) const { return v2c_.at(k); }
    const std::vector<double>& tanh_table(std::size_t k) const { return tanh_v2c_.at(k); }
    std::vector<double>& c2v_table(std::size_t k) { return c2v_.at(k); }
    const std::vector<double>& c2v_table(std::size_t k) const { return c2v_.at(k); }
    void bump_iteration() noexcept { ++iteration_; }

private:
    const CodeFamily* family_;
    std::vector<detail::MemberGraph> graphs_;
    std::vector<std::vector<double>> v2c_;      // [member][edge]
    std::vector<std::vector<double>> tanh_v2c_; // tanh(v2c / 2), kept in sync
    std::vector<std::vector<double>> c2v_;
    std::vector<double> channel_; // L_P
    BitBlock channel_bits_;
    std::size_t iteration_ = 0;
};

inline DecoderState initialize(const BitBlock& y, double e, const CodeFamily& family) {
    return DecoderState(y, e, family);
}

namespace detail {

// Check message from the cached tanh values of one check's edges, skipping the
// target edge; sign follows the syndrome bit (0 -> +, 1 -> -).
inline double c2v_from_tanh(const double* tanh_vals, std::size_t degree,
                            std::size_t skip, int syndrome_bit) {
    double prod = 1.0;
    for (std::size_t t = 0; t < degree; ++t)
        if (t != skip)
            prod *= tanh_vals[t];
    prod = clamp_tanh_arg(prod);
    const double mag = 2.0 * std::atanh(prod);
    return clamp_llr(syndrome_bit ? -mag : mag);
}

} // namespace detail

// Check-to-variable rule evaluated on the current state (pure query).
inline double c2v_message(const DecoderState& state, std::size_t k, std::size_t j,
                          std::size_t i, int alice_syndrome_bit) {
    const auto& g = state.graph(k);
    const std::size_t e_id = state.find_edge(k, j, i);
    const std::size_t begin = g.row_ptr[j];
    return detail::c2v_from_tanh(state.tanh_table(k).data() + begin,
                                 g.row_ptr[j + 1] - begin, e_id - begin,
                                 alice_syndrome_bit);
}

// Variable-to-check rule: channel ratio plus all other check messages of the
// same member (within-member exclusion; cross-member information enters only
// through the soft decision).
inline double v2c_message(const DecoderState& state, std::size_t k, std::size_t i,
                          std::size_t j) {
    const auto& g = state.graph(k);
    const std::size_t target = state.find_edge(k, j, i);
    double sum = state.channel_llr(i);
    const auto& c2v = state.c2v_table(k);
    for (std::size_t t = g.col_ptr[i]; t < g.col_ptr[i + 1]; ++t)
        if (g.col_edge[t] != target)
            sum += c2v[g.col_edge[t]];
    return detail::clamp_llr(sum);
}

// Soft decision fusing every member's check messages into the channel ratio.
inline double soft_decision(const DecoderState& state, std::size_t i) {
    double sum = state.channel_llr(i);
    for (std::size_t k = 0; k < state.u(); ++k) {
        const auto& g = state.graph(k);
        const auto& c2v = state.c2v_table(k);
        for (std::size_t t = g.col_ptr[i]; t < g.col_ptr[i + 1]; ++t)
            sum += c2v[g.col_edge[t]];
    }
    return sum;
}

// Positive ratio favours bit 0; an exact tie keeps the observed channel bit.
inline std::uint8_t hard_decision(double llr, std::uint8_t channel_bit) {
    if (llr > 0.0)
        return 0;
    if (llr < 0.0)
        return 1;
    return channel_bit;
}

// Syndrome agreement test. `all` compares every member; `random_one` draws one
// member uniformly (the protocol's cheap rule) and needs the caller's rng.
inline bool convergence_check(const BitBlock& y, const CodeFamily& family,
                              const SyndromeSet& alice, ConvergenceMode mode,
                              std::mt19937_64* rng = nullptr) {
    if (alice.u() != family.u())
        throw DimensionError("convergence_check: syndrome count does not match family");
    if (y.size() != family.n())
        throw DimensionError("convergence_check: key length mismatch");
    for (const auto& s : alice.syndromes)
        if (s.size() != family.m())
            throw DimensionError("convergence_check: syndrome length mismatch");
    if (mode == ConvergenceMode::random_one) {
        if (!rng)
            throw InvalidArgument("convergence_check: random_one mode needs an rng");
        const std::size_t k = static_cast<std::size_t>(uniform_index(*rng, family.u()));
        return mat_vec_mul(family.member(k), y) == alice.syndromes[k];
    }
    for (std::size_t k = 0; k < family.u(); ++k)
        if (!(mat_vec_mul(family.member(k), y) == alice.syndromes[k]))
            return false;
    return true;
}

namespace detail {

// Scratch buffers reused across rows/columns of one pass so the per-edge rules
// run in O(degree) via prefix/suffix accumulation instead of O(degree^2)
// skip-products.
struct PassScratch {
    std::vector<double> pre;  // prefix products or sums
    std::vector<double> vals; // gathered per-edge values
};

// All check messages of one row at once: out[t] carries the product of every
// tanh value except position t, pushed through the atanh rule with the
// syndrome sign. Same factor set as c2v_from_tanh, accumulated as
// prefix * suffix.
inline void row_c2v_batch(const double* tanh_vals, std::size_t degree, int syndrome_bit,
                          double* out, PassScratch& scratch) {
    auto& pre = scratch.pre;
    pre.resize(degree);
    double acc = 1.0;
    for (std::size_t t = 0; t < degree; ++t) {
        pre[t] = acc;
        acc *= tanh_vals[t];
    }
    double suf = 1.0;
    for (std::size_t t = degree; t-- > 0;) {
        const double prod = clamp_tanh_arg(pre[t] * suf);
        const double mag = 2.0 * std::atanh(prod);
        out[t] = clamp_llr(syndrome_bit ? -mag : mag);
        suf *= tanh_vals[t];
    }
}

// All variable messages of one column at once from a fixed c2v snapshot:
// message t gets the channel ratio plus every other incoming check message
// (prefix + suffix sums). Outputs go through write_v2c; `except` skips one
// edge id (the layered pass refreshes only the messages to the other checks).
inline void column_v2c_batch(DecoderState& st, std::size_t k, std::size_t i,
                             PassScratch& scratch,
                             std::size_t except = static_cast<std::size_t>(-1)) {
    const MemberGraph& g = st.graph(k);
    const auto& c2v = st.c2v_table(k);
    const std::size_t cb = g.col_ptr[i];
    const std::size_t deg = g.col_ptr[i + 1] - cb;
    auto& pre = scratch.pre;
    auto& vals = scratch.vals;
    pre.resize(deg);
    vals.resize(deg);
    double acc = st.channel_llr(i);
    for (std::size_t t = 0; t < deg; ++t) {
        vals[t] = c2v[g.col_edge[cb + t]];
        pre[t] = acc;
        acc += vals[t];
    }
    double suf = 0.0;
    for (std::size_t t = deg; t-- > 0;) {
        const std::size_t e_id = g.col_edge[cb + t];
        if (e_id != except)
            st.write_v2c(k, e_id, pre[t] + suf); // write_v2c clamps
        suf += vals[t];
    }
}

// One flooding pass of member k: every check message, then every variable
// message (MBP inner block).
inline void flooding_member_pass(DecoderState& st, std::size_t k, const BitBlock& z) {
    const MemberGraph& g = st.graph(k);
    const std::size_t m = g.row_ptr.size() - 1;
    auto& c2v = st.c2v_table(k);
    const auto& tanh_vals = st.tanh_table(k);
    PassScratch scratch;
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t begin = g.row_ptr[j];
        row_c2v_batch(tanh_vals.data() + begin, g.row_ptr[j + 1] - begin, z.get(j),
                      c2v.data() + begin, scratch);
    }
    const std::size_t n = g.col_ptr.size() - 1;
    for (std::size_t i = 0; i < n; ++i)
        column_v2c_batch(st, k, i, scratch);
}

// One shuffled pass of member k: per variable, refresh its incoming check
// messages, then its outgoing variable messages (MSBP inner block).
inline void shuffled_member_pass(DecoderState& st, std::size_t k, const BitBlock& z) {
    const MemberGraph& g = st.graph(k);
    auto& c2v = st.c2v_table(k);
    const auto& tanh_vals = st.tanh_table(k);
    PassScratch scratch;
    const std::size_t n = g.col_ptr.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cb = g.col_ptr[i];
        const std::size_t ce = g.col_ptr[i + 1];
        for (std::size_t t = cb; t < ce; ++t) {
            const std::size_t e_id = g.col_edge[t];
            const std::size_t j = g.edge_check[e_id];
            const std::size_t rb = g.row_ptr[j];
            c2v[e_id] = c2v_from_tanh(tanh_vals.data() + rb, g.row_ptr[j + 1] - rb,
                                      e_id - rb, z.get(j));
        }
        column_v2c_batch(st, k, i, scratch);
    }
}

// One layered pass of member k: per check, emit its messages and immediately
// refresh each touched variable's messages to its other checks (MLBP block).
// The row's own tanh values never change mid-row (the variable refreshes only
// write messages to other checks), so the whole row's check messages come from
// one batch; they are still published one edge at a time to keep the
// interleaving with the variable refreshes.
inline void layered_member_pass(DecoderState& st, std::size_t k, const BitBlock& z) {
    const MemberGraph& g = st.graph(k);
    auto& c2v = st.c2v_table(k);
    const auto& tanh_vals = st.tanh_table(k);
    PassScratch scratch;
    PassScratch var_scratch;
    std::vector<double> row_msgs;
    const std::size_t m = g.row_ptr.size() - 1;
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t rb = g.row_ptr[j];
        const std::size_t deg = g.row_ptr[j + 1] - rb;
        row_msgs.resize(deg);
        row_c2v_batch(tanh_vals.data() + rb, deg, z.get(j), row_msgs.data(), scratch);
        for (std::size_t t = 0; t < deg; ++t) {
            const std::size_t e_id = rb + t;
            c2v[e_id] = row_msgs[t];
            column_v2c_batch(st, k, g.edge_var[e_id], var_scratch, e_id);
        }
    }
}

} // namespace detail

// Message-passing reconciliation under the selected schedule. Per iteration:
// one pass over every member (member loop outermost, per the family rules),
// then soft decisions, hard decisions, bookkeeping against `truth` when given,
// and the convergence test. The success flag always reflects a post-hoc check
// of every member's syndrome, even in random_one mode.
inline DecodeResult decode(const BitBlock& y, double e, const CodeFamily& family,
                           const SyndromeSet& alice, Schedule schedule,
                           std::size_t max_iterations,
                           const BitBlock* truth = nullptr,
                           ConvergenceMode mode = ConvergenceMode::all,
                           std::uint64_t seed = 0) {
    if (max_iterations < 1)
        throw InvalidArgument("decode: max_iterations must be >= 1");
    if (alice.u() != family.u())
        throw DimensionError("decode: syndrome count does not match family");
    for (const auto& s : alice.syndromes)
        if (s.size() != family.m())
            throw DimensionError("decode: syndrome length mismatch");
    if (truth && truth->size() != family.n())
        throw DimensionError("decode: ground-truth length mismatch");

    DecoderState st(y, e, family); // validates e and |y|
    std::mt19937_64 conv_rng(derive_seed(seed, 0xdec0de, 0));

    DecodeResult res;
    res.schedule = schedule;
    res.u = family.u();
    res.corrected_key = y;

    auto all_match = [&](const BitBlock& cand) {
        for (std::size_t k = 0; k < family.u(); ++k)
            if (!(mat_vec_mul(family.member(k), cand) == alice.syndromes[k]))
                return false;
        return true;
    };

    if (convergence_check(y, family, alice, mode, &conv_rng)) {
        res.success = all_match(y);
        res.iterations_used = 0;
        return res;
    }

    const std::size_t n = family.n();
    BitBlock prev = y; // decisions of the previous iteration, seeded by channel
    BitBlock cur(n);
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        st.bump_iteration();
        for (std::size_t k = 0; k < family.u(); ++k) {
            const BitBlock& z = alice.syndromes[k];
            switch (schedule) {
            case Schedule::flooding:
                detail::flooding_member_pass(st, k, z);
                break;
            case Schedule::shuffled:
                detail::shuffled_member_pass(st, k, z);
                break;
            case Schedule::layered:
                detail::layered_member_pass(st, k, z);
                break;
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            cur.set(i, hard_decision(soft_decision(st, i), st.channel_bits().get(i)));

        if (truth) {
            IterationCorrection ic;
            for (std::size_t i = 0; i < n; ++i) {
                const bool was_right = prev.get(i) == truth->get(i);
                const bool is_right = cur.get(i) == truth->get(i);
                if (!was_right && is_right)
                    ++ic.corrected;
                else if (was_right && !is_right)
                    ++ic.misjudged;
            }
            res.per_iteration.push_back(ic);
        }
        prev = cur;
        res.corrected_key = cur;
        res.iterations_used = it;
        if (convergence_check(cur, family, alice, mode, &conv_rng)) {
            res.success = all_match(cur);
            return res;
        }
    }
    res.iterations_used = max_iterations;
    res.success = false;
    return res;
}

} // namespace qkdpp
