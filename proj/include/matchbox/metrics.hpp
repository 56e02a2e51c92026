#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "matchbox/error.hpp"
#include "matchbox/instance.hpp"
#include "matchbox/svm.hpp"

namespace matchbox {

using PairSet = std::set<std::pair<Tid, Tid>>;

// Normalizes an unordered pair for set membership.
inline std::pair<Tid, Tid> ordered_pair(Tid a, Tid b) {
    return a < b ? std::pair<Tid, Tid>{a, b} : std::pair<Tid, Tid>{b, a};
}

struct PairCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

inline PairCounts count_pairs(const PairSet& predicted, const PairSet& truth) {
    PairCounts c;
    for (const auto& p : predicted) (truth.count(p) ? c.tp : c.fp) += 1;
    for (const auto& p : truth)
        if (!predicted.count(p)) c.fn += 1;
    return c;
}

// Standard precision/recall over unordered pair sets. An empty prediction
// set is vacuously precise and an empty truth set is vacuously recalled —
// both conventions avoid 0/0 and make empty datasets score perfect.
inline std::pair<double, double> precision_recall(const PairSet& predicted,
                                                  const PairSet& truth) {
    const PairCounts c = count_pairs(predicted, truth);
    const double precision =
        predicted.empty() ? 1.0
                          : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double recall =
        truth.empty() ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return {precision, recall};
}

// Quality summary of one blocking + classification pass over a relation.
struct MetricsReport {
    std::string mode;               // which blocking produced the candidates
    std::size_t records = 0;        // n: records in the relation
    std::size_t total_pairs = 0;    // N = n * n
    std::size_t candidate_pairs = 0; // S: pairs the blocking let through
    double reduction = 1.0;         // 1 - S/N
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 1.0;
    double recall = 1.0;

    bool operator==(const MetricsReport&) const = default;
};

inline MetricsReport make_metrics(std::string mode, std::size_t records,
                                  std::size_t candidate_count, const PairSet& predicted,
                                  const PairSet& truth) {
    MetricsReport report;
    report.mode = std::move(mode);
    report.records = records;
    report.total_pairs = records * records;
    report.candidate_pairs = candidate_count;
    report.reduction =
        records == 0 ? 1.0
                     : 1.0 - static_cast<double>(candidate_count) /
                                 static_cast<double>(report.total_pairs);
    const PairCounts c = count_pairs(predicted, truth);
    report.tp = c.tp;
    report.fp = c.fp;
    report.fn = c.fn;
    const auto [precision, recall] = precision_recall(predicted, truth);
    report.precision = precision;
    report.recall = recall;
    return report;
}

inline std::string render_metrics_csv(const std::vector<MetricsReport>& rows) {
    std::string out =
        "mode,records,total_pairs,candidate_pairs,reduction_ratio,tp,fp,fn,precision,recall\n";
    for (const MetricsReport& r : rows) {
        out += r.mode + "," + std::to_string(r.records) + "," + std::to_string(r.total_pairs) +
               "," + std::to_string(r.candidate_pairs) + "," +
               detail::format_double(r.reduction) + "," + std::to_string(r.tp) + "," +
               std::to_string(r.fp) + "," + std::to_string(r.fn) + "," +
               detail::format_double(r.precision) + "," + detail::format_double(r.recall) +
               "\n";
    }
    return out;
}

// Classifier verdicts on one relation's candidate pairs, sorted.
inline std::string render_pairs_csv(const std::string& relation, const PairSet& pairs) {
    std::string out = "relation,tid1,tid2\n";
    for (const auto& [a, b] : pairs)
        out += relation + "," + std::to_string(a) + "," + std::to_string(b) + "\n";
    return out;
}

} // namespace matchbox
