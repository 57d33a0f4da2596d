#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "qkdpp/bit_block.hpp"
#include "qkdpp/code_family.hpp"
#include "qkdpp/errors.hpp"
#include "qkdpp/parity_check_matrix.hpp"

namespace qkdpp {

// u syndromes of one key against one family; family_id pins which family.
struct SyndromeSet {
    std::vector<BitBlock> syndromes;
    std::uint64_t family_id = 0;

    std::size_t u() const noexcept { return syndromes.size(); }
};

enum class EstimationMethod { multi_syndrome, single_syndrome, sampling };

inline const char* to_string(EstimationMethod m) {
    switch (m) {
    case EstimationMethod::multi_syndrome: return "multi_syndrome";
    case EstimationMethod::single_syndrome: return "single_syndrome";
    default: return "sampling";
    }
}

struct EstimateReport {
    double estimate = 0.0;
    EstimationMethod method = EstimationMethod::multi_syndrome;
    std::size_t disclosed_bits = 0;
    double log_likelihood_at_estimate = 0.0;
    double grid_step = 0.0;
};

inline SyndromeSet compute_syndromes(const BitBlock& x, const CodeFamily& family) {
    if (x.size() != family.n())
        throw DimensionError("compute_syndromes: key length " +
                             std::to_string(x.size()) + " does not match n = " +
                             std::to_string(family.n()));
    SyndromeSet out;
    out.family_id = family.family_id();
    out.syndromes.reserve(family.u());
    for (std::size_t k = 0; k < family.u(); ++k)
        out.syndromes.push_back(mat_vec_mul(family.member(k), x));
    return out;
}

inline std::vector<BitBlock> syndrome_delta(const SyndromeSet& za, const SyndromeSet& zb) {
    if (za.family_id != zb.family_id)
        throw FamilyMismatch("syndrome_delta: syndrome sets bound to different families");
    if (za.u() != zb.u())
        throw FamilyMismatch("syndrome_delta: member counts differ");
    std::vector<BitBlock> deltas;
    deltas.reserve(za.u());
    for (std::size_t k = 0; k < za.u(); ++k) {
        if (za.syndromes[k].size() != zb.syndromes[k].size())
            throw FamilyMismatch("syndrome_delta: syndrome lengths differ");
        deltas.push_back(za.syndromes[k] ^ zb.syndromes[k]);
    }
    return deltas;
}

// Probability that an odd number of the d bits entering one check flipped:
// (1 - (1-2e')^d) / 2. Repeated multiplication keeps the integer power exact.
inline double odd_error_prob(double e_prime, std::uint32_t d) {
    const double base = 1.0 - 2.0 * e_prime;
    double pw = 1.0;
    for (std::uint32_t i = 0; i < d; ++i)
        pw *= base;
    return 0.5 * (1.0 - pw);
}

namespace detail {

inline void check_delta_shape(const std::vector<BitBlock>& deltas,
                              const CodeFamily& family) {
    if (deltas.size() != family.u())
        throw DimensionError("expected " + std::to_string(family.u()) +
                             " syndrome deltas, got " + std::to_string(deltas.size()));
    for (const auto& d : deltas)
        if (d.size() != family.m())
            throw DimensionError("syndrome delta length " + std::to_string(d.size()) +
                                 " does not match m = " + std::to_string(family.m()));
}

} // namespace detail

// Log of the product likelihood: sum over members and checks of
// log(1 - dz + (2 dz - 1) p(e', d_check)). Returns -infinity when a term
// vanishes (e.g. e' = 0 against a nonzero delta bit); that is a value, not an
// error, so the grid search can skip the point.
inline double log_likelihood(double e_prime, const std::vector<BitBlock>& deltas,
                             const CodeFamily& family) {
    detail::check_delta_shape(deltas, family);
    double total = 0.0;
    for (std::size_t k = 0; k < family.u(); ++k) {
        const ParityCheckMatrix& h = family.member(k);
        for (std::size_t j = 0; j < family.m(); ++j) {
            const double p = odd_error_prob(e_prime, static_cast<std::uint32_t>(h.row_degree(j)));
            const double term = deltas[k].get(j) ? p : 1.0 - p;
            if (term <= 0.0)
                return -std::numeric_limits<double>::infinity();
            total += std::log(term);
        }
    }
    return total;
}

// Maximum-likelihood QBER from syndrome deltas by grid search over
// (0, threshold]; all-zero deltas pin the estimate to exactly 0. The grid is
// {grid_step, 2*grid_step, ...} capped with the exact threshold point; ties
// break toward the smaller rate. Histogramming by check degree makes each
// evaluation O(#degree classes) instead of O(u*m).
inline EstimateReport estimate_qber_mle(const std::vector<BitBlock>& deltas,
                                        const CodeFamily& family, double threshold,
                                        double grid_step = 1e-4) {
    if (!(grid_step > 0.0))
        throw InvalidArgument("estimate_qber_mle: grid_step must be positive");
    if (!(threshold > 0.0) || threshold > 0.5)
        throw InvalidArgument("estimate_qber_mle: threshold must be in (0, 0.5]");
    detail::check_delta_shape(deltas, family);

    EstimateReport report;
    report.method = family.u() == 1 ? EstimationMethod::single_syndrome
                                    : EstimationMethod::multi_syndrome;
    report.disclosed_bits = 0;
    report.grid_step = grid_step;

    // counts[degree] = (zero-delta checks, one-delta checks) across members
    std::map<std::uint32_t, std::pair<std::uint64_t, std::uint64_t>> counts;
    bool any_one = false;
    for (std::size_t k = 0; k < family.u(); ++k) {
        const ParityCheckMatrix& h = family.member(k);
        for (std::size_t j = 0; j < family.m(); ++j) {
            auto& c = counts[static_cast<std::uint32_t>(h.row_degree(j))];
            if (deltas[k].get(j)) {
                ++c.second;
                any_one = true;
            } else {
                ++c.first;
            }
        }
    }
    if (!any_one) {
        report.estimate = 0.0;
        report.log_likelihood_at_estimate = 0.0; // every factor is exactly 1
        return report;
    }

    double best_e = threshold;
    double best_ll = -std::numeric_limits<double>::infinity();
    auto consider = [&](double e) {
        double ll = 0.0;
        for (const auto& [deg, c] : counts) {
            const double p = odd_error_prob(e, deg);
            if ((c.second && p <= 0.0) || (c.first && p >= 1.0)) {
                ll = -std::numeric_limits<double>::infinity();
                break;
            }
            if (c.first)
                ll += static_cast<double>(c.first) * std::log(1.0 - p);
            if (c.second)
                ll += static_cast<double>(c.second) * std::log(p);
        }
        if (ll > best_ll) {
            best_ll = ll;
            best_e = e;
        }
    };
    for (std::size_t i = 1;; ++i) {
        const double e = static_cast<double>(i) * grid_step;
        if (e >= threshold - 1e-15)
            break;
        consider(e);
    }
    consider(threshold);

    report.estimate = best_e;
    report.log_likelihood_at_estimate = log_likelihood(best_e, deltas, family);
    return report;
}

// Baseline estimator: disclose a sample of both keys, count mismatches.
inline EstimateReport estimate_qber_sampling(const BitBlock& x_sample,
                                             const BitBlock& y_sample) {
    if (x_sample.size() == 0 || y_sample.size() == 0)
        throw EmptySample("estimate_qber_sampling: empty sample");
    if (x_sample.size() != y_sample.size())
        throw DimensionError("estimate_qber_sampling: sample lengths differ");
    EstimateReport report;
    report.method = EstimationMethod::sampling;
    report.disclosed_bits = x_sample.size();
    report.estimate = static_cast<double>(x_sample.hamming_distance(y_sample)) /
                      static_cast<double>(x_sample.size());
    report.log_likelihood_at_estimate = 0.0;
    report.grid_step = 0.0;
    return report;
}

} // namespace qkdpp
