#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "qkdpp/experiments.hpp"

namespace qkdpp {

inline constexpr const char* METRICS_CSV_HEADER =
    "trial_id,algorithm,u,schedule,qber_injected,qber_realized,qber_estimated,"
    "iterations_used,success,ber_final,leakage_bits,alpha,efficiency_f,wall_seconds";

inline constexpr const char* ITERS_CSV_HEADER = "trial_id,iteration,n_c,n_m";

// Reals carry 9 significant digits so repeated runs are byte-identical.
inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string to_csv_row(const MetricsRecord& r) {
    std::string row;
    row += std::to_string(r.trial_id);
    row += ',';
    row += r.algorithm;
    row += ',';
    row += std::to_string(r.u);
    row += ',';
    row += r.schedule;
    row += ',';
    row += format_real(r.qber_injected);
    row += ',';
    row += format_real(r.qber_realized);
    row += ',';
    row += format_real(r.qber_estimated);
    row += ',';
    row += std::to_string(r.iterations_used);
    row += ',';
    row += r.success ? '1' : '0';
    row += ',';
    row += format_real(r.ber_final);
    row += ',';
    row += std::to_string(r.leakage_bits);
    row += ',';
    row += format_real(r.alpha);
    row += ',';
    row += format_real(r.efficiency_f);
    row += ',';
    row += format_real(r.wall_seconds);
    return row;
}

// Streams records to the main CSV and, when an iteration stream is attached,
// the per-iteration correction series to the sibling file. Sibling rows appear
// in the same record order as the main file; iterations are 1-based.
class MetricsCsvWriter {
public:
    explicit MetricsCsvWriter(std::ostream& main, std::ostream* iters = nullptr)
        : main_(main), iters_(iters) {
        main_ << METRICS_CSV_HEADER << '\n';
        if (iters_)
            *iters_ << ITERS_CSV_HEADER << '\n';
    }

    // Flushes after every record so partial results survive a later error.
    void write(const MetricsRecord& rec) {
        main_ << to_csv_row(rec) << '\n';
        if (iters_) {
            for (std::size_t t = 0; t < rec.per_iteration.size(); ++t)
                *iters_ << rec.trial_id << ',' << (t + 1) << ','
                        << rec.per_iteration[t].corrected << ','
                        << rec.per_iteration[t].misjudged << '\n';
            iters_->flush();
        }
        main_.flush();
    }

private:
    std::ostream& main_;
    std::ostream* iters_;
};

} // namespace qkdpp
