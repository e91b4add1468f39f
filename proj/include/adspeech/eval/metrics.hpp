#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "adspeech/common/error.hpp"

namespace adspeech {

enum class Aggregation { Pooled, MeanOfFolds };

inline const char* aggregation_name(Aggregation a) {
    return a == Aggregation::Pooled ? "pooled" : "mean-of-folds";
}

// Confusion counts and the positive-class (AD) metric suite. A metric whose
// denominator is zero is 0 with its flag set, so degenerate folds aggregate
// instead of crashing.
struct EvalMetrics {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    Aggregation aggregation = Aggregation::Pooled;
    bool precision_zero_denominator = false;
    bool recall_zero_denominator = false;
    bool specificity_zero_denominator = false;
    bool f1_zero_denominator = false;

    nlohmann::json to_json() const {
        return {{"tp", tp},
                {"fp", fp},
                {"fn", fn},
                {"tn", tn},
                {"accuracy", accuracy},
                {"precision", precision},
                {"recall", recall},
                {"specificity", specificity},
                {"f1", f1},
                {"aggregation", aggregation_name(aggregation)},
                {"flags",
                 {{"precision_zero_denominator", precision_zero_denominator},
                  {"recall_zero_denominator", recall_zero_denominator},
                  {"specificity_zero_denominator", specificity_zero_denominator},
                  {"f1_zero_denominator", f1_zero_denominator}}}};
    }
};

inline EvalMetrics compute_metrics(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
    require(tp >= 0 && fp >= 0 && fn >= 0 && tn >= 0, Errc::InvalidArgument,
            "confusion counts must be nonnegative");
    const std::int64_t total = tp + fp + fn + tn;
    require(total > 0, Errc::InvalidArgument, "confusion matrix is all zero");

    EvalMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
    if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    else m.precision_zero_denominator = true;
    if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    else m.recall_zero_denominator = true;
    if (tn + fp > 0) m.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
    else m.specificity_zero_denominator = true;
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else m.f1_zero_denominator = true;
    return m;
}

// Signed per-metric differences in percentage points: 100 * (a - b).
// Antisymmetric under swapping the sources.
struct GapReport {
    double accuracy_pp = 0.0;
    double precision_pp = 0.0;
    double recall_pp = 0.0;
    double specificity_pp = 0.0;
    double f1_pp = 0.0;

    nlohmann::json to_json() const {
        auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
        return {{"accuracy_pp", accuracy_pp},
                {"precision_pp", precision_pp},
                {"recall_pp", recall_pp},
                {"specificity_pp", specificity_pp},
                {"f1_pp", f1_pp},
                {"display",
                 {{"accuracy_pp", round2(accuracy_pp)},
                  {"precision_pp", round2(precision_pp)},
                  {"recall_pp", round2(recall_pp)},
                  {"specificity_pp", round2(specificity_pp)},
                  {"f1_pp", round2(f1_pp)}}}};
    }
};

inline GapReport gap_report(const EvalMetrics& a, const EvalMetrics& b) {
    GapReport g;
    g.accuracy_pp = 100.0 * (a.accuracy - b.accuracy);
    g.precision_pp = 100.0 * (a.precision - b.precision);
    g.recall_pp = 100.0 * (a.recall - b.recall);
    g.specificity_pp = 100.0 * (a.specificity - b.specificity);
    g.f1_pp = 100.0 * (a.f1 - b.f1);
    return g;
}

// Accuracy delta against the published acoustic baseline, in percentage
// points.
inline double baseline_delta(double model_accuracy, double baseline_accuracy = 0.6479) {
    require(model_accuracy >= 0.0 && model_accuracy <= 1.0 && baseline_accuracy >= 0.0 &&
                baseline_accuracy <= 1.0,
            Errc::InvalidArgument, "accuracies must lie in [0, 1]");
    return 100.0 * (model_accuracy - baseline_accuracy);
}

// Top-m models by accuracy, descending; ties break by ascending name.
inline std::vector<std::pair<std::string, double>> rank_models(
    std::vector<std::pair<std::string, double>> results, std::size_t m) {
    require(!results.empty(), Errc::InvalidArgument, "no model results to rank");
    require(m >= 1, Errc::InvalidArgument, "ranking needs m >= 1");
    require(m <= results.size(), Errc::InvalidArgument, "m exceeds the number of results");
    std::stable_sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    results.resize(m);
    return results;
}

}  // namespace adspeech
