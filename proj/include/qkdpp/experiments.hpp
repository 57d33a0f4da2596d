#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qkdpp/code_builder.hpp"
#include "qkdpp/code_family.hpp"
#include "qkdpp/decoder.hpp"
#include "qkdpp/degree_spec.hpp"
#include "qkdpp/errors.hpp"
#include "qkdpp/estimation.hpp"
#include "qkdpp/protocol.hpp"
#include "qkdpp/rng.hpp"
#include "qkdpp/simulation.hpp"

namespace qkdpp {

enum class Experiment {
    est_accuracy,
    iterations_vs_qber,
    iterations_vs_u,
    wave_effect,
    success_rate,
    corrections_per_iter,
    ber_after_k,
};

inline const char* to_string(Experiment e) {
    switch (e) {
    case Experiment::est_accuracy: return "est_accuracy";
    case Experiment::iterations_vs_qber: return "iterations_vs_qber";
    case Experiment::iterations_vs_u: return "iterations_vs_u";
    case Experiment::wave_effect: return "wave_effect";
    case Experiment::success_rate: return "success_rate";
    case Experiment::corrections_per_iter: return "corrections_per_iter";
    default: return "ber_after_k";
    }
}

inline Experiment experiment_from_string(const std::string& s) {
    if (s == "est_accuracy")
        return Experiment::est_accuracy;
    if (s == "iterations_vs_qber")
        return Experiment::iterations_vs_qber;
    if (s == "iterations_vs_u")
        return Experiment::iterations_vs_u;
    if (s == "wave_effect")
        return Experiment::wave_effect;
    if (s == "success_rate")
        return Experiment::success_rate;
    if (s == "corrections_per_iter")
        return Experiment::corrections_per_iter;
    if (s == "ber_after_k")
        return Experiment::ber_after_k;
    throw InvalidArgument("unknown experiment '" + s + "'");
}

struct ExperimentSpec {
    Experiment experiment = Experiment::est_accuracy;
    std::size_t n = 10000;
    double rate = 0.8;
    std::size_t u = 5;
    std::vector<double> qber_list;
    std::size_t trials = 1;
    std::size_t max_iterations = 100;
    std::vector<Schedule> schedule_list;
    std::uint64_t seed = 1;
    ErrorModel error_model = ErrorModel::exact_count;
    std::size_t k_iters = 5;
    bool timing = false; // when false, wall_seconds is reported as 0

    void validate() const {
        if (trials < 1)
            throw InvalidArgument("ExperimentSpec: trials must be >= 1");
        if (n < 8)
            throw InvalidArgument("ExperimentSpec: n must be >= 8");
        if (!(rate > 0.0) || !(rate < 1.0))
            throw InvalidArgument("ExperimentSpec: rate must lie in (0, 1)");
        if (u < 1)
            throw InvalidArgument("ExperimentSpec: u must be >= 1");
        if (qber_list.empty())
            throw InvalidArgument("ExperimentSpec: empty qber list");
        for (double q : qber_list)
            if (!(q > 0.0) || !(q < 0.5))
                throw InvalidArgument("ExperimentSpec: qber " + std::to_string(q) +
                                      " outside (0, 0.5)");
        if (max_iterations < 1)
            throw InvalidArgument("ExperimentSpec: max_iterations must be >= 1");
        if (k_iters < 1)
            throw InvalidArgument("ExperimentSpec: k_iters must be >= 1");
        if (schedule_list.empty() && experiment != Experiment::est_accuracy)
            throw InvalidArgument("ExperimentSpec: empty schedule list");
    }
};

// Preset matching each experiment's reference configuration.
inline ExperimentSpec default_spec(Experiment ex) {
    ExperimentSpec s;
    s.experiment = ex;
    switch (ex) {
    case Experiment::est_accuracy:
        s.qber_list = {0.0068, 0.0166, 0.0267};
        s.trials = 2000;
        break;
    case Experiment::iterations_vs_qber:
        s.qber_list = {0.02, 0.025, 0.03};
        s.trials = 100;
        s.schedule_list = {Schedule::flooding, Schedule::shuffled, Schedule::layered};
        s.error_model = ErrorModel::bernoulli; // physical BSC for the rate sweep
        break;
    case Experiment::iterations_vs_u:
        s.qber_list = {0.0246};
        s.trials = 100;
        s.schedule_list = {Schedule::flooding};
        break;
    case Experiment::wave_effect:
        s.qber_list = {0.024, 0.026, 0.028};
        s.trials = 100;
        s.schedule_list = {Schedule::flooding};
        break;
    case Experiment::success_rate:
        s.qber_list = {0.0275};
        s.trials = 1000;
        s.schedule_list = {Schedule::flooding};
        break;
    case Experiment::corrections_per_iter:
        s.qber_list = {0.0267};
        s.trials = 100;
        s.schedule_list = {Schedule::flooding};
        break;
    case Experiment::ber_after_k:
        s.qber_list = {0.0202, 0.02155, 0.0229, 0.02425, 0.0256};
        s.trials = 1000;
        s.schedule_list = {Schedule::shuffled};
        s.k_iters = 5;
        break;
    }
    return s;
}

struct MetricsRecord {
    std::size_t trial_id = 0;
    std::string algorithm;
    std::size_t u = 0;
    std::string schedule = "none";
    double qber_injected = 0.0;
    double qber_realized = 0.0;
    double qber_estimated = 0.0;
    std::size_t iterations_used = 0;
    bool success = false;
    double ber_final = 0.0;
    std::vector<IterationCorrection> per_iteration;
    std::size_t leakage_bits = 0;
    double alpha = 0.0;
    double efficiency_f = 0.0;
    double wall_seconds = 0.0;
};

// Paper-style algorithm labels: single-matrix schedules are BP/SBP/LBP, the
// multi-matrix counterparts MBP/MSBP/MLBP.
inline std::string decode_algorithm_label(std::size_t u, Schedule sched) {
    std::string tail;
    switch (sched) {
    case Schedule::flooding: tail = "BP"; break;
    case Schedule::shuffled: tail = "SBP"; break;
    case Schedule::layered: tail = "LBP"; break;
    }
    return u > 1 ? "M" + tail : tail;
}

inline std::size_t checks_for_rate(std::size_t n, double rate) {
    const auto m = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * (1.0 - rate)));
    if (m < 1 || m >= n)
        throw InvalidArgument("checks_for_rate: rate " + std::to_string(rate) +
                              " gives no usable check count at n = " + std::to_string(n));
    return m;
}

// Estimation-experiment profile: 5-regular columns (25-regular rows at rate
// 0.8). Syndrome-based estimation wants uniform column degrees: columns of
// degree d land in d(d-1)/2 check pairs, so a heavy-tailed profile makes many
// check pairs share a column and their parities positively correlated, which
// puts a variance floor under the estimate that extra members cannot remove.
// A regular profile keeps the checks near-independent and the estimator near
// its information bound.
inline DegreeSpec estimation_degree_spec(std::size_t n, double rate) {
    const std::size_t m = checks_for_rate(n, rate);
    DegreeSpec spec;
    spec.n = n;
    spec.m = m;
    spec.variable_degrees.assign(n, 5);
    const std::size_t edges = 5 * n;
    spec.check_degrees.assign(m, static_cast<std::uint32_t>(edges / m));
    const std::size_t extra = edges % m;
    for (std::size_t j = 0; j < extra; ++j)
        ++spec.check_degrees[j];
    spec.validate();
    return spec;
}

// Decode-experiment profile: a near-capacity irregular distribution (degree-20
// tail, degree-8 shoulder, degree-3/degree-2 bulk, degree-2 mass at the
// stability bound). The high-degree nodes seed the correction wave that the
// separated layout spreads, and they push the single-matrix waterfall close to
// the rates the experiments probe; the failures there are small trapped sets,
// which is what the extra members rescue.
inline DegreeSpec bench_degree_spec(std::size_t n, double rate) {
    const std::size_t m = checks_for_rate(n, rate);
    const std::size_t top = std::max<std::size_t>(1, n / 10);           // degree 20
    const std::size_t high = std::max<std::size_t>(1, (n * 17) / 100);  // degree 8
    const std::size_t mid4 = std::max<std::size_t>(1, (n * 20) / 100);  // degree 4
    const std::size_t mid3 = std::max<std::size_t>(1, (n * 10) / 100);  // degree 3
    if (top + high + mid4 + mid3 >= n)
        throw InvalidArgument("bench_degree_spec: n too small for the profile");
    const std::size_t low = n - top - high - mid4 - mid3; // degree 2
    DegreeSpec spec;
    spec.n = n;
    spec.m = m;
    spec.variable_degrees.assign(top, 20);
    spec.variable_degrees.insert(spec.variable_degrees.end(), high, 8);
    spec.variable_degrees.insert(spec.variable_degrees.end(), mid4, 4);
    spec.variable_degrees.insert(spec.variable_degrees.end(), mid3, 3);
    spec.variable_degrees.insert(spec.variable_degrees.end(), low, 2);
    const std::size_t edges = 20 * top + 8 * high + 4 * mid4 + 3 * mid3 + 2 * low;
    spec.check_degrees.assign(m, static_cast<std::uint32_t>(edges / m));
    const std::size_t extra = edges % m;
    for (std::size_t j = 0; j < extra; ++j)
        ++spec.check_degrees[j];
    spec.validate();
    return spec;
}

struct RunSummary {
    std::size_t records = 0;
    std::size_t decode_trials = 0;
    std::size_t successes = 0;
    std::size_t discard_matches = 0;   // successes whose final key equals Alice's
    std::uint64_t total_error_bits = 0; // residual errors across decode trials
    std::uint64_t total_bits = 0;       // decode trials x n, for the BER ratio
};

using RecordSink = std::function<void(const MetricsRecord&)>;

namespace detail {

struct TrialData {
    BitBlock x;
    BitBlock y;
    double realized = 0.0;
    std::uint64_t session_seed = 0;
    std::uint64_t sample_seed = 0;
};

// Key and channel noise depend only on (master seed, parameter index, trial),
// so every algorithm at one (qber, trial) point sees the same key pair.
inline TrialData make_trial(const ExperimentSpec& spec, std::size_t param_idx,
                            std::size_t trial, double qber) {
    const std::uint64_t base = derive_seed(spec.seed, param_idx, trial);
    TrialData td;
    td.x = gen_key(spec.n, derive_seed(base, 0, 0));
    BscResult bsc = apply_bsc(td.x, qber, spec.error_model, derive_seed(base, 1, 0));
    td.y = std::move(bsc.y);
    td.realized = bsc.realized_rate;
    td.sample_seed = derive_seed(base, 2, 0);
    td.session_seed = derive_seed(base, 3, 0);
    return td;
}

class StopWatch {
public:
    explicit StopWatch(bool enabled) : enabled_(enabled) {
        if (enabled_)
            start_ = std::chrono::steady_clock::now();
    }
    double seconds() const {
        if (!enabled_)
            return 0.0;
        const auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double>(d).count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

// One full reconciliation session against `fam`, recorded with ground truth.
inline MetricsRecord run_session(const ExperimentSpec& spec, const CodeFamily& fam,
                                 const TrialData& td, std::size_t trial, double qber,
                                 Schedule sched, std::size_t iteration_cap,
                                 RunSummary& summary) {
    SessionParams params(fam);
    // Decode experiments measure behaviour at fixed injected rates; the
    // session gate stays out of the way so high points are not censored.
    params.threshold = 0.49;
    params.max_iterations = iteration_cap;
    params.schedule = sched;
    params.seed = td.session_seed;

    StopWatch watch(spec.timing);
    const SyndromeSet alice = alice_encode(td.x, fam);
    const ReconcileOutcome out = bob_reconcile(td.y, alice, params, nullptr, &td.x);
    const double elapsed = watch.seconds();

    MetricsRecord rec;
    rec.trial_id = trial;
    rec.algorithm = decode_algorithm_label(fam.u(), sched);
    rec.u = fam.u();
    rec.schedule = to_string(sched);
    rec.qber_injected = qber;
    rec.qber_realized = td.realized;
    rec.qber_estimated = out.estimate_report.estimate;
    rec.iterations_used = out.decode_result.iterations_used;
    rec.success = out.status == ReconcileStatus::Success;
    const BitBlock& final_key = out.decode_result.corrected_key;
    rec.ber_final = static_cast<double>(final_key.hamming_distance(td.x)) /
                    static_cast<double>(spec.n);
    rec.per_iteration = out.decode_result.per_iteration;
    rec.leakage_bits = out.leakage_bits;
    rec.alpha = out.alpha;
    rec.efficiency_f = out.efficiency_f;
    rec.wall_seconds = elapsed;

    ++summary.decode_trials;
    summary.total_error_bits += final_key.hamming_distance(td.x);
    summary.total_bits += spec.n;
    if (rec.success) {
        ++summary.successes;
        if (out.corrected_key == discard_leakage(td.x, fam))
            ++summary.discard_matches;
    }
    return rec;
}

// Estimation rows report the channel traffic each method consumed: u*m
// syndrome bits for the syndrome estimators, sample size for sampling.
// (EstimateReport.disclosed_bits counts only *key* bits, which is zero for
// syndrome methods, and so cannot carry this comparison.)
inline MetricsRecord estimation_record(const ExperimentSpec& spec, std::size_t trial,
                                       double qber, const TrialData& td,
                                       const std::string& algorithm, std::size_t u,
                                       const EstimateReport& report, double elapsed,
                                       std::size_t m, std::size_t disclosed) {
    MetricsRecord rec;
    rec.trial_id = trial;
    rec.algorithm = algorithm;
    rec.u = u;
    rec.schedule = "none";
    rec.qber_injected = qber;
    rec.qber_realized = td.realized;
    rec.qber_estimated = report.estimate;
    rec.iterations_used = 0;
    rec.success = true;
    rec.ber_final = 0.0;
    rec.leakage_bits = disclosed;
    rec.alpha = static_cast<double>(disclosed) / static_cast<double>(m);
    const double e_floor = 1.0 / (2.0 * static_cast<double>(spec.n));
    const double e_used = std::clamp(report.estimate, e_floor, 0.5 - e_floor);
    rec.efficiency_f =
        reconciliation_efficiency(m, spec.n, e_used,
                                  std::max(1.0, rec.alpha))
            .f;
    rec.wall_seconds = elapsed;
    return rec;
}

} // namespace detail

// Runs one experiment, streaming records to `sink` in deterministic
// (parameter, trial, algorithm) order. Families are built once up front;
// ConstructionFailed propagates after any already-generated records have been
// delivered to the sink.
inline RunSummary run_experiment(const ExperimentSpec& spec, RecordSink sink) {
    spec.validate();
    RunSummary summary;
    auto emit = [&](const MetricsRecord& rec) {
        ++summary.records;
        if (sink)
            sink(rec);
    };

    const std::uint64_t build_seed = derive_seed(spec.seed, 0xb01d, 0);
    const DegreeSpec degree_spec = spec.experiment == Experiment::est_accuracy
                                       ? estimation_degree_spec(spec.n, spec.rate)
                                       : bench_degree_spec(spec.n, spec.rate);
    ParityCheckMatrix base = build_base_matrix(degree_spec, build_seed);

    const std::size_t m = base.check_count();

    if (spec.experiment == Experiment::est_accuracy) {
        CodeFamily fam = derive_family(base, spec.u, WaveLayout::compact, build_seed);
        CodeFamily single = fam.prefix(1);
        for (std::size_t p = 0; p < spec.qber_list.size(); ++p) {
            const double qber = spec.qber_list[p];
            for (std::size_t t = 0; t < spec.trials; ++t) {
                detail::TrialData td = detail::make_trial(spec, p, t, qber);

                detail::StopWatch w_multi(spec.timing);
                const auto deltas_multi =
                    syndrome_delta(alice_encode(td.x, fam), compute_syndromes(td.y, fam));
                SessionParams defaults(fam);
                EstimateReport rep_multi = estimate_qber_mle(
                    deltas_multi, fam, defaults.threshold, defaults.grid_step);
                emit(detail::estimation_record(spec, t, qber, td, "multi_syndrome",
                                               fam.u(), rep_multi, w_multi.seconds(), m,
                                               fam.u() * m));

                detail::StopWatch w_single(spec.timing);
                const auto deltas_single = syndrome_delta(
                    alice_encode(td.x, single), compute_syndromes(td.y, single));
                EstimateReport rep_single = estimate_qber_mle(
                    deltas_single, single, defaults.threshold, defaults.grid_step);
                emit(detail::estimation_record(spec, t, qber, td, "single_syndrome", 1,
                                               rep_single, w_single.seconds(), m, m));

                detail::StopWatch w_samp(spec.timing);
                std::mt19937_64 sample_rng(td.sample_seed);
                const auto positions =
                    sample_without_replacement(sample_rng, spec.n, spec.n / 2);
                BitBlock xs(positions.size()), ys(positions.size());
                for (std::size_t i = 0; i < positions.size(); ++i) {
                    xs.set(i, td.x.get(static_cast<std::size_t>(positions[i])));
                    ys.set(i, td.y.get(static_cast<std::size_t>(positions[i])));
                }
                EstimateReport rep_samp = estimate_qber_sampling(xs, ys);
                emit(detail::estimation_record(spec, t, qber, td, "sampling", 0,
                                               rep_samp, w_samp.seconds(), m,
                                               rep_samp.disclosed_bits));
            }
        }
        return summary;
    }

    if (spec.experiment == Experiment::wave_effect) {
        const CodeFamily compact =
            derive_family(base, spec.u, WaveLayout::compact, build_seed);
        const CodeFamily separated =
            derive_family(base, spec.u, WaveLayout::separated, build_seed);
        for (std::size_t p = 0; p < spec.qber_list.size(); ++p) {
            const double qber = spec.qber_list[p];
            for (std::size_t t = 0; t < spec.trials; ++t) {
                detail::TrialData td = detail::make_trial(spec, p, t, qber);
                for (Schedule sched : spec.schedule_list) {
                    MetricsRecord rc = detail::run_session(
                        spec, compact, td, t, qber, sched, spec.max_iterations, summary);
                    rc.algorithm += "-compact";
                    emit(rc);
                    MetricsRecord rs = detail::run_session(
                        spec, separated, td, t, qber, sched, spec.max_iterations, summary);
                    rs.algorithm += "-separated";
                    emit(rs);
                }
            }
        }
        return summary;
    }

    // Remaining experiments work on prefixes of one compact family.
    CodeFamily family = derive_family(base, spec.u, WaveLayout::compact, build_seed);
    std::vector<CodeFamily> prefixes;
    std::vector<std::size_t> u_values;
    if (spec.experiment == Experiment::iterations_vs_u) {
        for (std::size_t k = 1; k <= spec.u; ++k)
            u_values.push_back(k);
    } else if (spec.u > 1) {
        u_values = {1, spec.u};
    } else {
        u_values = {1};
    }
    for (std::size_t k : u_values)
        prefixes.push_back(family.prefix(k));

    const std::size_t cap = spec.experiment == Experiment::ber_after_k
                                ? spec.k_iters
                                : spec.max_iterations;

    for (std::size_t p = 0; p < spec.qber_list.size(); ++p) {
        const double qber = spec.qber_list[p];
        for (std::size_t t = 0; t < spec.trials; ++t) {
            detail::TrialData td = detail::make_trial(spec, p, t, qber);
            for (std::size_t f = 0; f < prefixes.size(); ++f)
                for (Schedule sched : spec.schedule_list)
                    emit(detail::run_session(spec, prefixes[f], td, t, qber, sched,
                                             cap, summary));
        }
    }
    return summary;
}

} // namespace qkdpp
