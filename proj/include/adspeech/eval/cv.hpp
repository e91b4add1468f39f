#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adspeech/common/parallel.hpp"
#include "adspeech/eval/folds.hpp"
#include "adspeech/eval/metrics.hpp"
#include "adspeech/ml/trainer.hpp"
#include "adspeech/repr/select.hpp"
#include "adspeech/repr/standardize.hpp"

namespace adspeech {

struct SelectorSettings {
    bool enabled = false;
    int k = 10;
};

struct PipelineSpec {
    SelectorSettings selector;
    bool standardize = false;
    ModelSpec model;

    nlohmann::json to_json() const {
        return {{"selector", {{"enabled", selector.enabled}, {"k", selector.k}}},
                {"standardize", standardize},
                {"model", spec_to_json(model)}};
    }
};

struct FoldOutcome {
    EvalMetrics metrics;
    std::vector<std::size_t> chosen_columns;  // empty when the selector is off
    TrainingDiagnostics diagnostics;
};

struct CvResult {
    std::vector<FoldOutcome> folds;
    EvalMetrics aggregate;
    FoldScheme scheme = FoldScheme::Loso;
    std::uint64_t seed = 0;
    PipelineSpec pipeline;

    nlohmann::json to_json(nlohmann::json extra = {}) const {
        nlohmann::json fold_rows = nlohmann::json::array();
        for (const auto& f : folds) {
            nlohmann::json row = f.metrics.to_json();
            row["chosen_columns"] = f.chosen_columns;
            row["converged"] = f.diagnostics.converged;
            fold_rows.push_back(std::move(row));
        }
        nlohmann::json j = {{"pipeline", pipeline.to_json()},
                            {"scheme", fold_scheme_name(scheme)},
                            {"seed", seed},
                            {"rng", kRngName},
                            {"aggregation", aggregation_name(aggregate.aggregation)},
                            {"fit_scope", "fold-local"},
                            {"folds", fold_rows},
                            {"aggregate", aggregate.to_json()}};
        for (auto& [key, value] : extra.items()) j[key] = value;
        return j;
    }
};

// Runs the pipeline through a fold plan. Selector and standardizer are fit
// inside each fold on its training rows only; they never see held-out rows
// (and the harness asserts the fitted width matches the training slice).
// LOSO aggregates the pooled confusion matrix over all held-out
// predictions; k-fold aggregates the unweighted mean of per-fold metrics.
// Per-fold model seeds derive from (seed, fold index), so parallel
// execution order cannot change results.
inline CvResult run_cv(const LabeledDataset& dataset, const PipelineSpec& pipeline, const FoldPlan& plan,
                       std::size_t workers = 1) {
    dataset.validate();
    require(plan.n_rows == dataset.size(), Errc::InvalidArgument,
            "fold plan was built for a different dataset size");
    require(!plan.folds.empty(), Errc::InvalidArgument, "fold plan is empty");
    pipeline.model.validate();

    CvResult result;
    result.scheme = plan.scheme;
    result.seed = plan.seed;
    result.pipeline = pipeline;
    result.folds.resize(plan.folds.size());

    parallel_for(plan.folds.size(), workers, [&](std::size_t fi) {
        const Fold& fold = plan.folds[fi];
        LabeledDataset train_ds = dataset.select_rows(fold.train_indices);
        LabeledDataset test_ds = dataset.select_rows(fold.test_indices);

        FoldOutcome outcome;
        if (pipeline.selector.enabled) {
            const ColumnSelector sel = select_top_k(train_ds, pipeline.selector.k);
            require(sel.scores.size() == train_ds.width(), Errc::Internal,
                    "selector was not fit on the fold's training slice");
            outcome.chosen_columns = sel.chosen_indices;
            train_ds = apply_selector(sel, train_ds);
            test_ds = apply_selector(sel, test_ds);
        }
        if (pipeline.standardize) {
            const Standardizer st = fit_standardizer(train_ds);
            require(st.means.size() == train_ds.width(), Errc::Internal,
                    "standardizer was not fit on the fold's training slice");
            train_ds = standardize(st, train_ds);
            test_ds = standardize(st, test_ds);
        }

        ModelSpec fold_spec = pipeline.model;
        fold_spec.seed = mix_seed(pipeline.model.seed, fi);
        const auto model = train(fold_spec, train_ds);
        const Prediction pred = model->predict(test_ds.matrix);

        std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (std::size_t i = 0; i < test_ds.size(); ++i) {
            const int truth = test_ds.labels[i];
            const int guess = pred.labels[i];
            if (truth == 1 && guess == 1) ++tp;
            else if (truth == 0 && guess == 1) ++fp;
            else if (truth == 1 && guess == 0) ++fn;
            else ++tn;
        }
        outcome.metrics = compute_metrics(tp, fp, fn, tn);
        outcome.diagnostics = model->diagnostics();
        result.folds[fi] = std::move(outcome);
    });

    if (plan.scheme == FoldScheme::Loso) {
        std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (const auto& f : result.folds) {
            tp += f.metrics.tp;
            fp += f.metrics.fp;
            fn += f.metrics.fn;
            tn += f.metrics.tn;
        }
        result.aggregate = compute_metrics(tp, fp, fn, tn);
        result.aggregate.aggregation = Aggregation::Pooled;
    } else {
        EvalMetrics agg;
        agg.aggregation = Aggregation::MeanOfFolds;
        const double nf = static_cast<double>(result.folds.size());
        for (const auto& f : result.folds) {
            agg.tp += f.metrics.tp;
            agg.fp += f.metrics.fp;
            agg.fn += f.metrics.fn;
            agg.tn += f.metrics.tn;
            agg.accuracy += f.metrics.accuracy / nf;
            agg.precision += f.metrics.precision / nf;
            agg.recall += f.metrics.recall / nf;
            agg.specificity += f.metrics.specificity / nf;
            agg.f1 += f.metrics.f1 / nf;
            agg.precision_zero_denominator |= f.metrics.precision_zero_denominator;
            agg.recall_zero_denominator |= f.metrics.recall_zero_denominator;
            agg.specificity_zero_denominator |= f.metrics.specificity_zero_denominator;
            agg.f1_zero_denominator |= f.metrics.f1_zero_denominator;
        }
        result.aggregate = agg;
    }
    return result;
}

}  // namespace adspeech
