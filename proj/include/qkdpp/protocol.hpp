#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qkdpp/bit_block.hpp"
#include "qkdpp/code_family.hpp"
#include "qkdpp/decoder.hpp"
#include "qkdpp/errors.hpp"
#include "qkdpp/estimation.hpp"

namespace qkdpp {

// Shannon binary entropy in bits; h(0) = h(1) = 0 by continuity.
inline double binary_entropy(double e) {
    if (e < 0.0 || e > 1.0)
        throw InvalidArgument("binary_entropy: rate " + std::to_string(e) +
                              " outside [0, 1]");
    if (e == 0.0 || e == 1.0)
        return 0.0;
    return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

// Inverse of binary_entropy on [0, 0.5], by bisection. Monotone on that
// branch, so the answer is unique.
inline double binary_entropy_inverse(double target) {
    if (target < 0.0 || target > 1.0)
        throw InvalidArgument("binary_entropy_inverse: value " +
                              std::to_string(target) + " outside [0, 1]");
    if (target == 0.0)
        return 0.0;
    if (target == 1.0)
        return 0.5;
    double lo = 0.0, hi = 0.5;
    for (int step = 0; step < 200; ++step) {
        const double mid = 0.5 * (lo + hi);
        if (binary_entropy(mid) < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15)
            break;
    }
    return 0.5 * (lo + hi);
}

struct EfficiencyResult {
    double f = 0.0;
    bool infeasible = false; // f <= 1: the rate sits at or beyond the limit
};

// Disclosure ratio f = alpha * m / (n * h(e)); values <= 1 are flagged rather
// than rejected (no code can reconcile there, but the arithmetic is defined).
inline EfficiencyResult reconciliation_efficiency(std::size_t m, std::size_t n,
                                                  double e, double alpha) {
    if (m < 1 || n < 1)
        throw InvalidArgument("reconciliation_efficiency: empty code");
    if (alpha < 1.0)
        throw InvalidArgument("reconciliation_efficiency: alpha " +
                              std::to_string(alpha) + " below 1");
    if (e == 0.0)
        throw ZeroEntropy("reconciliation_efficiency: zero error rate has zero entropy");
    if (e < 0.0 || e >= 0.5)
        throw InvalidArgument("reconciliation_efficiency: rate " + std::to_string(e) +
                              " outside (0, 0.5)");
    const double h = binary_entropy(e);
    if (h == 0.0)
        throw ZeroEntropy("reconciliation_efficiency: vanishing entropy");
    EfficiencyResult out;
    out.f = alpha * static_cast<double>(m) / (static_cast<double>(n) * h);
    out.infeasible = out.f <= 1.0;
    return out;
}

struct LeakageAudit {
    std::size_t rank_stacked = 0;
    double alpha = 0.0;
};

// Measured leakage multiplier: GF(2) rank of all members stacked, over m.
inline LeakageAudit leakage_audit(const CodeFamily& family) {
    LeakageAudit audit;
    audit.rank_stacked = family.stacked_rank();
    audit.alpha = static_cast<double>(audit.rank_stacked) /
                  static_cast<double>(family.m());
    return audit;
}

// Drop the m key bits at the family's independent positions, keeping the
// relative order of the surviving n - m bits.
inline BitBlock discard_leakage(const BitBlock& key, const CodeFamily& family) {
    if (key.size() != family.n())
        throw DimensionError("discard_leakage: key length " + std::to_string(key.size()) +
                             " does not match n = " + std::to_string(family.n()));
    const auto& drop = family.independent_positions(); // sorted ascending
    BitBlock out(family.n() - family.m());
    std::size_t next_drop = 0;
    std::size_t w = 0;
    for (std::size_t i = 0; i < family.n(); ++i) {
        if (next_drop < drop.size() && drop[next_drop] == i) {
            ++next_drop;
            continue;
        }
        out.set(w++, key.get(i));
    }
    return out;
}

inline SyndromeSet alice_encode(const BitBlock& x, const CodeFamily& family) {
    return compute_syndromes(x, family);
}

enum class EstimatorKind { multi_syndrome, sampling };

inline const char* to_string(EstimatorKind k) {
    return k == EstimatorKind::multi_syndrome ? "multi" : "sampling";
}

inline EstimatorKind estimator_kind_from_string(const std::string& s) {
    if (s == "multi")
        return EstimatorKind::multi_syndrome;
    if (s == "sampling")
        return EstimatorKind::sampling;
    throw InvalidArgument("unknown estimator '" + s + "' (multi|sampling)");
}

// Alice's published sample for the sampling estimator: positions and her bit
// values there.
struct SampleDisclosure {
    std::vector<std::uint32_t> positions;
    BitBlock bits;
};

// Session configuration. The default threshold is the Shannon ceiling of the
// code rate, h^-1(m/n): above it no f > 1 reconciliation exists.
struct SessionParams {
    const CodeFamily* family = nullptr;
    double threshold = 0.0;
    std::size_t max_iterations = 100;
    Schedule schedule = Schedule::flooding;
    EstimatorKind estimator = EstimatorKind::multi_syndrome;
    ConvergenceMode convergence_mode = ConvergenceMode::all;
    double grid_step = 1e-4;
    std::uint64_t seed = 0;

    SessionParams() = default;

    explicit SessionParams(const CodeFamily& fam) : family(&fam) {
        threshold = binary_entropy_inverse(static_cast<double>(fam.m()) /
                                           static_cast<double>(fam.n()));
    }

    void validate() const {
        if (!family)
            throw InvalidArgument("SessionParams: no family bound");
        if (!(threshold > 0.0) || threshold > 0.5)
            throw InvalidArgument("SessionParams: threshold " +
                                  std::to_string(threshold) + " outside (0, 0.5]");
        if (max_iterations < 1)
            throw InvalidArgument("SessionParams: max_iterations must be >= 1");
        if (!(grid_step > 0.0))
            throw InvalidArgument("SessionParams: grid_step must be positive");
    }
};

enum class ReconcileStatus { Success, DecodeFailure, Aborted };

inline const char* to_string(ReconcileStatus s) {
    switch (s) {
    case ReconcileStatus::Success: return "Success";
    case ReconcileStatus::DecodeFailure: return "DecodeFailure";
    default: return "Aborted";
    }
}

struct ReconcileOutcome {
    ReconcileStatus status = ReconcileStatus::DecodeFailure;
    BitBlock corrected_key; // n - m bits on Success, empty otherwise
    EstimateReport estimate_report;
    DecodeResult decode_result;
    std::size_t leakage_bits = 0;
    double alpha = 0.0;
    double efficiency_f = 0.0;
};

// Bob's side of a session: estimate the error rate from the syndrome deltas
// (or a disclosed sample), gate on the threshold, decode, then discard the
// leaked positions. `truth` is simulation instrumentation only: it enables the
// per-iteration correction bookkeeping and is never consulted by the decoding
// decisions themselves.
inline ReconcileOutcome bob_reconcile(const BitBlock& y, const SyndromeSet& alice,
                                      const SessionParams& params,
                                      const SampleDisclosure* sample = nullptr,
                                      const BitBlock* truth = nullptr) {
    params.validate();
    const CodeFamily& family = *params.family;
    if (y.size() != family.n())
        throw DimensionError("bob_reconcile: key length " + std::to_string(y.size()) +
                             " does not match n = " + std::to_string(family.n()));
    if (alice.family_id != family.family_id())
        throw FamilyMismatch("bob_reconcile: syndromes bound to a different family");
    if (alice.u() != family.u())
        throw FamilyMismatch("bob_reconcile: member count mismatch");

    ReconcileOutcome out;
    const std::size_t n = family.n();
    const std::size_t m = family.m();
    const double e_floor = 1.0 / (2.0 * static_cast<double>(n));

    bool aborted = false;
    if (params.estimator == EstimatorKind::multi_syndrome) {
        const SyndromeSet bob = compute_syndromes(y, family);
        const std::vector<BitBlock> deltas = syndrome_delta(alice, bob);
        out.estimate_report =
            estimate_qber_mle(deltas, family, params.threshold, params.grid_step);
        // The grid saturates at the threshold, so a boundary estimate means
        // "at least the threshold": treat it as exceeding.
        aborted = out.estimate_report.estimate >= params.threshold;
    } else {
        if (!sample)
            throw InvalidArgument("bob_reconcile: sampling estimator needs a disclosure");
        BitBlock mine(sample->positions.size());
        if (sample->bits.size() != sample->positions.size())
            throw DimensionError("bob_reconcile: disclosure size mismatch");
        for (std::size_t t = 0; t < sample->positions.size(); ++t) {
            if (sample->positions[t] >= n)
                throw DimensionError("bob_reconcile: disclosed position out of range");
            mine.set(t, y.get(sample->positions[t]));
        }
        out.estimate_report = estimate_qber_sampling(sample->bits, mine);
        aborted = out.estimate_report.estimate > params.threshold;
    }

    const LeakageAudit audit = leakage_audit(family);
    out.leakage_bits = std::max(m, audit.rank_stacked);
    out.alpha = static_cast<double>(out.leakage_bits) / static_cast<double>(m);
    const double e_used =
        std::clamp(out.estimate_report.estimate, e_floor, 0.5 - e_floor);
    out.efficiency_f = reconciliation_efficiency(m, n, e_used, out.alpha).f;

    if (aborted) {
        out.status = ReconcileStatus::Aborted;
        return out;
    }

    out.decode_result = decode(y, e_used, family, alice, params.schedule,
                               params.max_iterations, truth, params.convergence_mode,
                               params.seed);
    if (!out.decode_result.success) {
        out.status = ReconcileStatus::DecodeFailure;
        return out;
    }
    out.status = ReconcileStatus::Success;
    out.corrected_key = discard_leakage(out.decode_result.corrected_key, family);
    return out;
}

} // namespace qkdpp
