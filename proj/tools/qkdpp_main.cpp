// qkdpp — multi-matrix LDPC reconciliation toolkit.
//
// Subcommands:
//   build      construct a code family and write it as an alist directory
//   estimate   run the QBER estimators over simulated keys
//   reconcile  run one full reconciliation session
//   bench      run a named experiment preset and stream metrics CSV
//
// Exit codes: 0 success, 2 invalid arguments or malformed input,
// 3 construction failure, 4 I/O failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qkdpp/alist.hpp"
#include "qkdpp/code_builder.hpp"
#include "qkdpp/code_family.hpp"
#include "qkdpp/csv.hpp"
#include "qkdpp/decoder.hpp"
#include "qkdpp/degree_spec.hpp"
#include "qkdpp/errors.hpp"
#include "qkdpp/estimation.hpp"
#include "qkdpp/experiments.hpp"
#include "qkdpp/protocol.hpp"
#include "qkdpp/rng.hpp"
#include "qkdpp/simulation.hpp"

namespace {

using namespace qkdpp;

struct GlobalOpts {
    std::uint64_t seed = 1;
    std::string out;
    bool timing = false;
};

// Opens --out for CSV, or falls back to stdout; keeps the stream alive.
struct CsvTarget {
    std::ostream* main = nullptr;
    std::ostream* iters = nullptr; // only with --out (sibling needs a path)
    std::ofstream main_file;
    std::ofstream iters_file;

    explicit CsvTarget(const std::string& out, bool want_iters) {
        if (out.empty()) {
            main = &std::cout;
            return;
        }
        main_file.open(out);
        if (!main_file)
            throw IoError("cannot open '" + out + "' for writing");
        main = &main_file;
        if (want_iters) {
            const std::string sibling = out + ".iters.csv";
            iters_file.open(sibling);
            if (!iters_file)
                throw IoError("cannot open '" + sibling + "' for writing");
            iters = &iters_file;
        }
    }

    void finish() {
        if (main_file.is_open()) {
            main_file.flush();
            if (!main_file)
                throw IoError("write failed for the output CSV");
        }
        if (iters_file.is_open()) {
            iters_file.flush();
            if (!iters_file)
                throw IoError("write failed for the iteration CSV");
        }
    }
};

void require_qber(double q) {
    if (!(q > 0.0) || !(q < 0.5))
        throw InvalidArgument("qber must lie in (0, 0.5)");
}

int cmd_build(const GlobalOpts& g, std::size_t n, double rate, std::size_t u,
              const std::string& wave) {
    if (g.out.empty())
        throw InvalidArgument("build requires --out DIR");
    const std::size_t m = checks_for_rate(n, rate);
    const DegreeSpec spec = DegreeSpec::regular(n, m, 3);
    const ParityCheckMatrix base = build_base_matrix(spec, g.seed);
    const CodeFamily fam =
        derive_family(base, u, wave_layout_from_string(wave), g.seed);
    write_family_dir(g.out, fam);
    std::cout << "wrote family: dir=" << g.out << " n=" << fam.n() << " m=" << fam.m()
              << " u=" << fam.u() << " layout=" << to_string(fam.wave_layout())
              << " seed=" << g.seed << '\n';
    return 0;
}

int cmd_estimate(const GlobalOpts& g, const std::string& family_dir, double qber,
                 std::size_t trials, const std::string& method) {
    require_qber(qber);
    if (trials < 1)
        throw InvalidArgument("estimate: trials must be >= 1");
    const CodeFamily fam = read_family_dir(family_dir);
    const std::size_t m = fam.m();

    // Same trial seeds and record semantics as the est_accuracy experiment.
    ExperimentSpec es;
    es.experiment = Experiment::est_accuracy;
    es.n = fam.n();
    es.seed = g.seed;
    es.timing = g.timing;
    es.error_model = ErrorModel::exact_count;

    const SessionParams defaults(fam);
    const CodeFamily single = fam.prefix(1);

    CsvTarget target(g.out, /*want_iters=*/false);
    MetricsCsvWriter writer(*target.main);
    for (std::size_t t = 0; t < trials; ++t) {
        const detail::TrialData td = detail::make_trial(es, 0, t, qber);
        if (method == "multi") {
            detail::StopWatch w(g.timing);
            const auto deltas =
                syndrome_delta(alice_encode(td.x, fam), compute_syndromes(td.y, fam));
            const EstimateReport rep =
                estimate_qber_mle(deltas, fam, defaults.threshold, defaults.grid_step);
            writer.write(detail::estimation_record(es, t, qber, td, "multi_syndrome",
                                                   fam.u(), rep, w.seconds(), m,
                                                   fam.u() * m));
        } else if (method == "single") {
            detail::StopWatch w(g.timing);
            const auto deltas = syndrome_delta(alice_encode(td.x, single),
                                               compute_syndromes(td.y, single));
            const EstimateReport rep = estimate_qber_mle(deltas, single,
                                                         defaults.threshold,
                                                         defaults.grid_step);
            writer.write(detail::estimation_record(es, t, qber, td, "single_syndrome",
                                                   1, rep, w.seconds(), m, m));
        } else { // sampling at rate 0.5
            detail::StopWatch w(g.timing);
            std::mt19937_64 rng(td.sample_seed);
            const auto positions = sample_without_replacement(rng, es.n, es.n / 2);
            BitBlock xs(positions.size()), ys(positions.size());
            for (std::size_t i = 0; i < positions.size(); ++i) {
                xs.set(i, td.x.get(positions[i]));
                ys.set(i, td.y.get(positions[i]));
            }
            const EstimateReport rep = estimate_qber_sampling(xs, ys);
            writer.write(detail::estimation_record(es, t, qber, td, "sampling", 0, rep,
                                                   w.seconds(), m, rep.disclosed_bits));
        }
    }
    target.finish();
    if (!g.out.empty())
        std::cout << "wrote " << trials << " records to " << g.out << '\n';
    return 0;
}

int cmd_reconcile(const GlobalOpts& g, const std::string& family_dir, double qber,
                  const std::string& schedule, std::size_t max_iter,
                  const std::string& mode) {
    require_qber(qber);
    if (max_iter < 1)
        throw InvalidArgument("reconcile: max-iter must be >= 1");
    const CodeFamily fam = read_family_dir(family_dir);

    ExperimentSpec es;
    es.n = fam.n();
    es.seed = g.seed;
    es.timing = g.timing;
    es.error_model = ErrorModel::exact_count;
    const detail::TrialData td = detail::make_trial(es, 0, 0, qber);

    SessionParams params(fam); // threshold defaults to the code-rate ceiling
    params.schedule = schedule_from_string(schedule);
    params.max_iterations = max_iter;
    params.convergence_mode = convergence_mode_from_string(mode);
    params.seed = td.session_seed;

    detail::StopWatch watch(g.timing);
    const SyndromeSet alice = alice_encode(td.x, fam);
    const ReconcileOutcome out = bob_reconcile(td.y, alice, params, nullptr, &td.x);
    const double elapsed = watch.seconds();

    MetricsRecord rec;
    rec.trial_id = 0;
    rec.algorithm = decode_algorithm_label(fam.u(), params.schedule);
    rec.u = fam.u();
    rec.schedule = to_string(params.schedule);
    rec.qber_injected = qber;
    rec.qber_realized = td.realized;
    rec.qber_estimated = out.estimate_report.estimate;
    rec.iterations_used = out.decode_result.iterations_used;
    rec.success = out.status == ReconcileStatus::Success;
    rec.ber_final =
        static_cast<double>(out.decode_result.corrected_key.hamming_distance(td.x)) /
        static_cast<double>(es.n);
    rec.per_iteration = out.decode_result.per_iteration;
    rec.leakage_bits = out.leakage_bits;
    rec.alpha = out.alpha;
    rec.efficiency_f = out.efficiency_f;
    rec.wall_seconds = elapsed;

    CsvTarget target(g.out, /*want_iters=*/!g.out.empty());
    MetricsCsvWriter writer(*target.main, target.iters);
    writer.write(rec);
    target.finish();

    std::cerr << "status=" << to_string(out.status)
              << " estimate=" << format_real(rec.qber_estimated)
              << " threshold=" << format_real(params.threshold)
              << " iterations=" << rec.iterations_used
              << " leakage=" << rec.leakage_bits << " key_out="
              << out.corrected_key.size() << '\n';
    return 0;
}

void write_bench_manifest(const std::string& path, const std::string& experiment,
                          const ExperimentSpec& spec) {
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    os << "experiment " << experiment << '\n';
    os << "n " << spec.n << '\n';
    os << "rate " << format_real(spec.rate) << '\n';
    os << "u " << spec.u << '\n';
    os << "qber";
    for (double q : spec.qber_list)
        os << ' ' << format_real(q);
    os << '\n';
    os << "trials " << spec.trials << '\n';
    os << "max_iterations " << spec.max_iterations << '\n';
    os << "schedules";
    for (Schedule s : spec.schedule_list)
        os << ' ' << to_string(s);
    os << '\n';
    os << "seed " << spec.seed << '\n';
    os << "error_model " << to_string(spec.error_model) << '\n';
    os << "k_iters " << spec.k_iters << '\n';
    os << "timing " << (spec.timing ? 1 : 0) << '\n';
    os << "prng mt19937_64 splitmix64-derived\n";
    os << "key_reuse paired\n"; // one key pair per (qber, trial), all algorithms
    os.flush();
    if (!os)
        throw IoError("write failed for '" + path + "'");
}

int cmd_bench(const GlobalOpts& g, CLI::App* cmd, const std::string& experiment,
              std::size_t n, double rate, std::size_t u,
              const std::vector<double>& qber, std::size_t trials,
              std::size_t max_iter, const std::vector<std::string>& schedules,
              const std::string& error_model, std::size_t k_iters) {
    ExperimentSpec spec = default_spec(experiment_from_string(experiment));
    if (cmd->count("--n"))
        spec.n = n;
    if (cmd->count("--rate"))
        spec.rate = rate;
    if (cmd->count("--u"))
        spec.u = u;
    if (cmd->count("--qber"))
        spec.qber_list = qber;
    if (cmd->count("--trials"))
        spec.trials = trials;
    if (cmd->count("--max-iter"))
        spec.max_iterations = max_iter;
    if (cmd->count("--schedule")) {
        spec.schedule_list.clear();
        for (const std::string& s : schedules)
            spec.schedule_list.push_back(schedule_from_string(s));
    }
    if (cmd->count("--error-model"))
        spec.error_model = error_model_from_string(error_model);
    if (cmd->count("--k-iters"))
        spec.k_iters = k_iters;
    spec.seed = g.seed;
    spec.timing = g.timing;
    spec.validate();

    CsvTarget target(g.out, /*want_iters=*/!g.out.empty());
    if (!g.out.empty())
        write_bench_manifest(g.out + ".manifest", experiment, spec);
    MetricsCsvWriter writer(*target.main, target.iters);
    const RunSummary summary =
        run_experiment(spec, [&](const MetricsRecord& r) { writer.write(r); });
    target.finish();

    std::cerr << "records=" << summary.records
              << " decode_trials=" << summary.decode_trials
              << " successes=" << summary.successes;
    if (summary.total_bits > 0)
        std::cerr << " ber=" << format_real(static_cast<double>(summary.total_error_bits) /
                                            static_cast<double>(summary.total_bits));
    std::cerr << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-matrix LDPC reconciliation toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master PRNG seed")->capture_default_str();
    app.add_option("--out", g.out,
                   "output path: CSV file (estimate/reconcile/bench) or directory (build)");
    app.add_flag("--timing", g.timing,
                 "measure wall_seconds (off by default so reruns are byte-identical)");

    // build
    auto* build = app.add_subcommand("build", "construct and persist a code family");
    build->fallthrough();
    std::size_t b_n = 10000;
    double b_rate = 0.8;
    std::size_t b_u = 1;
    std::string b_wave = "compact";
    build->add_option("--n", b_n, "key length")->capture_default_str();
    build->add_option("--rate", b_rate, "code rate (n-m)/n")->capture_default_str();
    build->add_option("--u", b_u, "number of family members")->capture_default_str();
    build->add_option("--wave", b_wave, "high-degree wave layout")
        ->check(CLI::IsMember({"compact", "separated"}))
        ->capture_default_str();

    // estimate
    auto* est = app.add_subcommand("estimate", "run a QBER estimator over trials");
    est->fallthrough();
    std::string e_family;
    double e_qber = 0.0;
    std::size_t e_trials = 1;
    std::string e_method = "multi";
    est->add_option("--family", e_family, "family directory from `build`")->required();
    est->add_option("--qber", e_qber, "injected error rate")->required();
    est->add_option("--trials", e_trials, "number of trials")->capture_default_str();
    est->add_option("--method", e_method, "estimator")
        ->check(CLI::IsMember({"multi", "single", "sampling"}))
        ->capture_default_str();

    // reconcile
    auto* rec = app.add_subcommand("reconcile", "run one reconciliation session");
    rec->fallthrough();
    std::string r_family;
    double r_qber = 0.0;
    std::string r_schedule = "flooding";
    std::size_t r_max_iter = 100;
    std::string r_mode = "all";
    rec->add_option("--family", r_family, "family directory from `build`")->required();
    rec->add_option("--qber", r_qber, "injected error rate")->required();
    rec->add_option("--schedule", r_schedule, "message-passing schedule")
        ->check(CLI::IsMember({"flooding", "shuffled", "layered"}))
        ->capture_default_str();
    rec->add_option("--max-iter", r_max_iter, "iteration cap")->capture_default_str();
    rec->add_option("--mode", r_mode, "convergence check mode")
        ->check(CLI::IsMember({"random-one", "all"}))
        ->capture_default_str();

    // bench
    auto* bench = app.add_subcommand("bench", "run an experiment preset");
    bench->fallthrough();
    std::string x_experiment;
    std::size_t x_n = 0, x_u = 0, x_trials = 0, x_max_iter = 0, x_k = 0;
    double x_rate = 0.0;
    std::vector<double> x_qber;
    std::vector<std::string> x_schedules;
    std::string x_error_model;
    bench->add_option("experiment", x_experiment, "experiment name")
        ->required()
        ->check(CLI::IsMember({"est_accuracy", "iterations_vs_qber", "iterations_vs_u",
                               "wave_effect", "success_rate", "corrections_per_iter",
                               "ber_after_k"}));
    bench->add_option("--n", x_n, "key length (preset default if omitted)");
    bench->add_option("--rate", x_rate, "code rate");
    bench->add_option("--u", x_u, "number of family members");
    bench->add_option("--qber", x_qber, "injected error rates (repeatable)");
    bench->add_option("--trials", x_trials, "trials per parameter point");
    bench->add_option("--max-iter", x_max_iter, "iteration cap");
    bench->add_option("--schedule", x_schedules, "schedules (repeatable)")
        ->check(CLI::IsMember({"flooding", "shuffled", "layered"}));
    bench->add_option("--error-model", x_error_model, "channel model")
        ->check(CLI::IsMember({"bernoulli", "exact_count"}));
    bench->add_option("--k-iters", x_k, "iteration cap for ber_after_k");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e); // prints help or the error message
        return rc == 0 ? 0 : 2;
    }

    try {
        if (build->parsed())
            return cmd_build(g, b_n, b_rate, b_u, b_wave);
        if (est->parsed())
            return cmd_estimate(g, e_family, e_qber, e_trials, e_method);
        if (rec->parsed())
            return cmd_reconcile(g, r_family, r_qber, r_schedule, r_max_iter, r_mode);
        return cmd_bench(g, bench, x_experiment, x_n, x_rate, x_u, x_qber, x_trials,
                         x_max_iter, x_schedules, x_error_model, x_k);
    } catch (const ConstructionFailed& e) {
        std::cerr << "construction failure: " << e.what() << '\n';
        return 3;
    } catch (const RankDeficient& e) {
        std::cerr << "construction failure: " << e.what() << '\n';
        return 3;
    } catch (const InfeasibleSpec& e) {
        std::cerr << "construction failure: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O failure: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
