#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "adspeech/ml/model.hpp"

namespace adspeech {

// CART with Gini impurity: no depth limit, thresholds at midpoints of
// sorted unique values, split chosen by maximum impurity decrease with
// deterministic tie-breaking (lowest feature index, then lowest threshold).
// A single-class dataset trains to a single leaf.
class TreeModel final : public TrainedModel {
public:
    struct TreeNode {
        bool is_leaf = true;
        std::size_t feature = 0;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = 0;
        double score = 0.0;  // positive-class fraction at the leaf
        std::size_t n_samples = 0;
    };

    TreeModel(ModelSpec spec, std::size_t width, std::vector<TreeNode> nodes, TrainingDiagnostics diag)
        : spec_(std::move(spec)), width_(width), nodes_(std::move(nodes)), diag_(std::move(diag)) {}

    static TreeModel train(const ModelSpec& spec, const LabeledDataset& data) {
        spec.validate();
        require(data.size() >= 1, Errc::DegenerateInput, "training needs at least 1 row");
        const auto& p = std::get<TreeParams>(spec.params);

        std::vector<TreeNode> nodes;
        std::vector<std::size_t> all(data.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        build(data, p, all, nodes);

        TrainingDiagnostics diag;
        diag.iterations = static_cast<int>(nodes.size());
        diag.converged = true;
        return TreeModel(spec, data.width(), std::move(nodes), std::move(diag));
    }

    const ModelSpec& spec() const override { return spec_; }
    const TrainingDiagnostics& diagnostics() const override { return diag_; }
    std::size_t input_width() const override { return width_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    Prediction predict(const Matrix& rows) const override {
        check_width(rows);
        Prediction out;
        out.labels.resize(rows.rows);
        out.scores.resize(rows.rows);
        for (std::size_t i = 0; i < rows.rows; ++i) {
            const double* row = rows.row(i);
            int at = 0;
            while (!nodes_[static_cast<std::size_t>(at)].is_leaf) {
                const auto& nd = nodes_[static_cast<std::size_t>(at)];
                at = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
            }
            const auto& leaf = nodes_[static_cast<std::size_t>(at)];
            out.labels[i] = leaf.label;
            out.scores[i] = leaf.score;
        }
        return out;
    }

    nlohmann::json meta_json() const override {
        return {{"width", width_}, {"n_nodes", nodes_.size()}};
    }

    // Node serialization: 8 doubles per node.
    std::vector<double> param_blob() const override {
        std::vector<double> blob;
        blob.reserve(nodes_.size() * 8);
        for (const auto& nd : nodes_) {
            blob.push_back(nd.is_leaf ? 1.0 : 0.0);
            blob.push_back(static_cast<double>(nd.feature));
            blob.push_back(nd.threshold);
            blob.push_back(static_cast<double>(nd.left));
            blob.push_back(static_cast<double>(nd.right));
            blob.push_back(static_cast<double>(nd.label));
            blob.push_back(nd.score);
            blob.push_back(static_cast<double>(nd.n_samples));
        }
        return blob;
    }

    static TreeModel from_blob(ModelSpec spec, TrainingDiagnostics diag, const nlohmann::json& meta,
                               const std::vector<double>& blob) {
        const auto width = meta.at("width").get<std::size_t>();
        const auto n_nodes = meta.at("n_nodes").get<std::size_t>();
        require(blob.size() == n_nodes * 8, Errc::SchemaViolation, "decision tree blob length mismatch");
        std::vector<TreeNode> nodes(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const double* b = blob.data() + i * 8;
            nodes[i].is_leaf = b[0] != 0.0;
            nodes[i].feature = static_cast<std::size_t>(b[1]);
            nodes[i].threshold = b[2];
            nodes[i].left = static_cast<int>(b[3]);
            nodes[i].right = static_cast<int>(b[4]);
            nodes[i].label = static_cast<int>(b[5]);
            nodes[i].score = b[6];
            nodes[i].n_samples = static_cast<std::size_t>(b[7]);
        }
        return TreeModel(std::move(spec), width, std::move(nodes), std::move(diag));
    }

private:
    static double gini(std::size_t n_pos, std::size_t n) {
        if (n == 0) return 0.0;
        const double p = static_cast<double>(n_pos) / static_cast<double>(n);
        return 2.0 * p * (1.0 - p);
    }

    static int build(const LabeledDataset& data, const TreeParams& hp,
                     const std::vector<std::size_t>& idx, std::vector<TreeNode>& nodes) {
        const int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();

        std::size_t n_pos = 0;
        for (std::size_t i : idx) n_pos += static_cast<std::size_t>(data.labels[i]);
        const std::size_t n = idx.size();
        const double node_gini = gini(n_pos, n);

        auto make_leaf = [&]() {
            TreeNode& nd = nodes[static_cast<std::size_t>(node_id)];
            nd.is_leaf = true;
            nd.n_samples = n;
            nd.score = n > 0 ? static_cast<double>(n_pos) / static_cast<double>(n) : 0.0;
            // Majority label; exact tie goes to the positive class.
            nd.label = 2 * n_pos >= n ? 1 : 0;
        };

        if (n < static_cast<std::size_t>(hp.min_samples_split) || node_gini == 0.0) {
            make_leaf();
            return node_id;
        }

        // Best (feature, threshold) by weighted Gini decrease. Features and
        // thresholds scan in ascending order and the comparison is strict,
        // so ties resolve to the lowest feature index, then lowest threshold.
        double best_gain = 1e-12;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;

        std::vector<std::pair<double, int>> values(n);
        for (std::size_t f = 0; f < data.width(); ++f) {
            for (std::size_t k = 0; k < n; ++k)
                values[k] = {data.matrix.at(idx[k], f), data.labels[idx[k]]};
            std::sort(values.begin(), values.end());

            std::size_t left_n = 0, left_pos = 0;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                ++left_n;
                left_pos += static_cast<std::size_t>(values[k].second);
                if (values[k].first == values[k + 1].first) continue;
                const std::size_t right_n = n - left_n;
                if (left_n < static_cast<std::size_t>(hp.min_samples_leaf) ||
                    right_n < static_cast<std::size_t>(hp.min_samples_leaf))
                    continue;
                const double w_left = static_cast<double>(left_n) / static_cast<double>(n);
                const double child =
                    w_left * gini(left_pos, left_n) + (1.0 - w_left) * gini(n_pos - left_pos, right_n);
                const double gain = node_gini - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5 * (values[k].first + values[k + 1].first);
                    found = true;
                }
            }
        }
        if (!found) {
            make_leaf();
            return node_id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx)
            (data.matrix.at(i, best_feature) <= best_threshold ? left_idx : right_idx).push_back(i);

        {
            TreeNode& nd = nodes[static_cast<std::size_t>(node_id)];
            nd.is_leaf = false;
            nd.feature = best_feature;
            nd.threshold = best_threshold;
            nd.n_samples = n;
            nd.score = static_cast<double>(n_pos) / static_cast<double>(n);
            nd.label = 2 * n_pos >= n ? 1 : 0;
        }
        const int left = build(data, hp, left_idx, nodes);
        const int right = build(data, hp, right_idx, nodes);
        nodes[static_cast<std::size_t>(node_id)].left = left;
        nodes[static_cast<std::size_t>(node_id)].right = right;
        return node_id;
    }

    ModelSpec spec_;
    std::size_t width_;
    std::vector<TreeNode> nodes_;
    TrainingDiagnostics diag_;
};

}  // namespace adspeech
