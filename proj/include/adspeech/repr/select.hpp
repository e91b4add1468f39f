#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "adspeech/common/error.hpp"
#include "adspeech/repr/dataset.hpp"

namespace adspeech {

// Sentinel F for columns with zero within-class variance but nonzero
// between-class variance; keeps the ranking total without non-finite values.
inline constexpr double kDegenerateFSentinel = 1e12;

// One-way ANOVA F per column: ratio of between-class to within-class mean
// squares for the binary label.
inline std::vector<double> anova_f(const LabeledDataset& ds) {
    require(ds.size() >= 3, Errc::InvalidArgument, "ANOVA needs at least 3 rows");
    require(ds.both_classes_present(), Errc::SingleClass, "ANOVA needs both classes present");

    std::size_t n_pos = 0;
    for (int y : ds.labels) n_pos += static_cast<std::size_t>(y);
    const std::size_t n = ds.size();
    const std::size_t n_neg = n - n_pos;
    const double k = 2.0;

    std::vector<double> scores(ds.width());
    for (std::size_t c = 0; c < ds.width(); ++c) {
        double sum_pos = 0.0, sum_neg = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            (ds.labels[r] == 1 ? sum_pos : sum_neg) += ds.matrix.at(r, c);
        const double mean_pos = sum_pos / static_cast<double>(n_pos);
        const double mean_neg = sum_neg / static_cast<double>(n_neg);
        const double grand = (sum_pos + sum_neg) / static_cast<double>(n);

        const double ss_between = static_cast<double>(n_pos) * (mean_pos - grand) * (mean_pos - grand) +
                                  static_cast<double>(n_neg) * (mean_neg - grand) * (mean_neg - grand);
        double ss_within = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = ds.matrix.at(r, c) - (ds.labels[r] == 1 ? mean_pos : mean_neg);
            ss_within += d * d;
        }
        const double ms_between = ss_between / (k - 1.0);
        const double ms_within = ss_within / (static_cast<double>(n) - k);
        if (ms_between <= 0.0) scores[c] = 0.0;
        else if (ms_within <= 0.0) scores[c] = kDegenerateFSentinel;
        else scores[c] = ms_between / ms_within;
    }
    return scores;
}

// Univariate top-k column choice. chosen_indices are strictly ascending;
// scores cover every input column.
struct ColumnSelector {
    std::vector<std::size_t> chosen_indices;
    std::vector<double> scores;
    std::string layout_id;
    int k = 0;
};

inline ColumnSelector select_top_k(const LabeledDataset& ds, int k = 10,
                                   const std::string& layout_id = "") {
    require(k >= 1, Errc::InvalidArgument, "selector k must be >= 1");
    ColumnSelector sel;
    sel.k = k;
    sel.layout_id = layout_id;
    sel.scores = anova_f(ds);

    std::vector<std::size_t> order(ds.width());
    std::iota(order.begin(), order.end(), 0);
    // Largest F first; ties broken by ascending column index.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sel.scores[a] != sel.scores[b]) return sel.scores[a] > sel.scores[b];
        return a < b;
    });
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), ds.width());
    sel.chosen_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(sel.chosen_indices.begin(), sel.chosen_indices.end());
    return sel;
}

inline LabeledDataset apply_selector(const ColumnSelector& sel, const LabeledDataset& ds) {
    for (std::size_t i : sel.chosen_indices)
        require(i < ds.width(), Errc::InvalidArgument, "selector index out of range for dataset");
    LabeledDataset out;
    out.matrix = ds.matrix.select_columns(sel.chosen_indices);
    out.labels = ds.labels;
    out.subject_ids = ds.subject_ids;
    out.column_names.reserve(sel.chosen_indices.size());
    for (std::size_t i : sel.chosen_indices) out.column_names.push_back(ds.column_names[i]);
    return out;
}

inline nlohmann::json selector_to_json(const ColumnSelector& sel) {
    return nlohmann::json{{"layout_id", sel.layout_id},
                          {"k", sel.k},
                          {"indices", sel.chosen_indices},
                          {"scores", sel.scores}};
}

inline ColumnSelector selector_from_json(const nlohmann::json& j) {
    ColumnSelector sel;
    sel.layout_id = j.at("layout_id").get<std::string>();
    sel.k = j.at("k").get<int>();
    sel.chosen_indices = j.at("indices").get<std::vector<std::size_t>>();
    sel.scores = j.at("scores").get<std::vector<double>>();
    return sel;
}

}  // namespace adspeech
