#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "adspeech/common/rng.hpp"
#include "adspeech/eval/cv.hpp"
#include "adspeech/eval/folds.hpp"
#include "adspeech/eval/metrics.hpp"

using namespace adspeech;

namespace {

LabeledDataset synthetic_subjects(std::size_t n, std::size_t d, double separation, std::uint64_t seed) {
    SplitMix64 rng(seed);
    LabeledDataset ds;
    ds.matrix = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i % 2 == 0 ? 0 : 1;
        ds.labels.push_back(y);
        ds.subject_ids.push_back("subj" + std::to_string(i));
        for (std::size_t c = 0; c < d; ++c)
            ds.matrix.at(i, c) = rng.next_gaussian() + (y == 1 ? separation : 0.0);
    }
    for (std::size_t c = 0; c < d; ++c) ds.column_names.push_back("f" + std::to_string(c));
    return ds;
}

}  // namespace

TEST_CASE("published test-set rows reconstruct from their confusion matrices") {
    // 71 held-out subjects; the unique nonnegative integer solutions.
    const EvalMetrics svm_feat = compute_metrics(11, 1, 24, 35);
    REQUIRE(svm_feat.accuracy == Catch::Approx(0.6479).margin(5e-5));
    REQUIRE(svm_feat.precision == Catch::Approx(0.9167).margin(5e-5));
    REQUIRE(svm_feat.recall == Catch::Approx(0.3143).margin(5e-5));
    REQUIRE(svm_feat.f1 == Catch::Approx(0.4681).margin(5e-5));

    const EvalMetrics svm_combo = compute_metrics(28, 16, 7, 20);
    REQUIRE(svm_combo.accuracy == Catch::Approx(0.6761).margin(5e-5));
    REQUIRE(svm_combo.precision == Catch::Approx(0.6364).margin(5e-5));
    REQUIRE(svm_combo.recall == Catch::Approx(0.8000).margin(5e-5));
    REQUIRE(svm_combo.f1 == Catch::Approx(0.7089).margin(5e-5));
}

TEST_CASE("all-correct predictions score 1.0 everywhere") {
    const EvalMetrics m = compute_metrics(10, 0, 0, 10);
    REQUIRE(m.accuracy == 1.0);
    REQUIRE(m.precision == 1.0);
    REQUIRE(m.recall == 1.0);
    REQUIRE(m.specificity == 1.0);
    REQUIRE(m.f1 == 1.0);
}

TEST_CASE("zero denominators flag instead of crashing") {
    const EvalMetrics m = compute_metrics(0, 0, 3, 7);  // never predicts positive
    REQUIRE(m.precision == 0.0);
    REQUIRE(m.precision_zero_denominator);
    REQUIRE(m.f1 == 0.0);
    REQUIRE(m.f1_zero_denominator);
    REQUIRE_THROWS_AS(compute_metrics(0, 0, 0, 0), Error);
    REQUIRE_THROWS_AS(compute_metrics(-1, 0, 0, 5), Error);
}

TEST_CASE("precision and recall identities hold exhaustively") {
    // precision*(tp+fp) == tp and recall*(tp+fn) == tp for every
    // nonnegative pair with sum up to 1000.
    std::size_t violations = 0;
    for (std::int64_t tp = 0; tp <= 1000; ++tp) {
        for (std::int64_t other = 0; tp + other <= 1000; ++other) {
            if (tp + other == 0) continue;
            const double bound = 1e-12 * static_cast<double>(std::max<std::int64_t>(1, tp));
            const EvalMetrics mp = compute_metrics(tp, other, 0, 1);
            if (std::abs(mp.precision * static_cast<double>(tp + other) - static_cast<double>(tp)) > bound)
                ++violations;
            const EvalMetrics mr = compute_metrics(tp, 0, other, 1);
            if (std::abs(mr.recall * static_cast<double>(tp + other) - static_cast<double>(tp)) > bound)
                ++violations;
        }
    }
    REQUIRE(violations == 0);
}

TEST_CASE("LOSO on 166 subjects yields 166 singleton folds") {
    const auto ds = synthetic_subjects(166, 4, 1.0, 1);
    const FoldPlan plan = make_loso_folds(ds);
    REQUIRE(plan.folds.size() == 166);
    for (const auto& f : plan.folds) {
        REQUIRE(f.test_indices.size() == 1);
        REQUIRE(f.train_indices.size() == 165);
    }
}

TEST_CASE("rows sharing a subject id are held out together") {
    auto ds = synthetic_subjects(10, 2, 1.0, 2);
    ds.subject_ids[3] = ds.subject_ids[2];  // two rows, one subject
    const FoldPlan plan = make_loso_folds(ds);
    REQUIRE(plan.folds.size() == 9);
    bool found_pair = false;
    for (const auto& f : plan.folds)
        if (f.test_indices.size() == 2) {
            found_pair = true;
            REQUIRE(f.test_indices == std::vector<std::size_t>({2, 3}));
        }
    REQUIRE(found_pair);
}

TEST_CASE("stratified 10-fold of 83/83 gives sizes {16,17} and positives {8,9}") {
    LabeledDataset ds;
    ds.matrix = Matrix(166, 2);
    for (std::size_t i = 0; i < 166; ++i) {
        ds.labels.push_back(i < 83 ? 0 : 1);
        ds.subject_ids.push_back("s" + std::to_string(i));
        ds.matrix.at(i, 0) = static_cast<double>(i);
    }
    ds.column_names = {"a", "b"};

    const FoldPlan plan = make_stratified_kfold(ds, 10, 42);
    REQUIRE(plan.folds.size() == 10);
    for (const auto& f : plan.folds) {
        REQUIRE((f.test_indices.size() == 16 || f.test_indices.size() == 17));
        std::size_t pos = 0;
        for (std::size_t i : f.test_indices) pos += static_cast<std::size_t>(ds.labels[i]);
        REQUIRE((pos == 8 || pos == 9));
    }
}

TEST_CASE("stratified folding is deterministic in the seed") {
    const auto ds = synthetic_subjects(60, 2, 1.0, 3);
    const FoldPlan a = make_stratified_kfold(ds, 10, 7);
    const FoldPlan b = make_stratified_kfold(ds, 10, 7);
    const FoldPlan c = make_stratified_kfold(ds, 10, 8);
    for (std::size_t f = 0; f < 10; ++f) REQUIRE(a.folds[f].test_indices == b.folds[f].test_indices);
    bool any_difference = false;
    for (std::size_t f = 0; f < 10; ++f)
        any_difference |= a.folds[f].test_indices != c.folds[f].test_indices;
    REQUIRE(any_difference);
    c.validate();  // different seed still partitions
}

TEST_CASE("k equal to n on a single-class set degenerates to LOSO") {
    LabeledDataset ds;
    ds.matrix = Matrix(6, 1);
    for (std::size_t i = 0; i < 6; ++i) {
        ds.labels.push_back(1);
        ds.subject_ids.push_back("s" + std::to_string(i));
        ds.matrix.at(i, 0) = static_cast<double>(i);
    }
    ds.column_names = {"x"};
    const FoldPlan plan = make_stratified_kfold(ds, 6, 5);
    REQUIRE(plan.folds.size() == 6);
    for (const auto& f : plan.folds) REQUIRE(f.test_indices.size() == 1);
}

TEST_CASE("a class smaller than k is rejected") {
    const auto ds = synthetic_subjects(10, 2, 1.0, 4);  // 5 per class
    REQUIRE_THROWS_AS(make_stratified_kfold(ds, 6, 1), Error);
}

TEST_CASE("fold plans partition the index set for random sizes and seeds") {
    SplitMix64 rng(90);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 20 + 2 * rng.next_below(40);
        const auto ds = synthetic_subjects(n, 2, 1.0, 100 + trial);
        make_loso_folds(ds).validate();
        make_stratified_kfold(ds, 2 + static_cast<int>(rng.next_below(6)), rng.next_u64()).validate();
    }
}

TEST_CASE("degenerate constant classifier pools to accuracy 0.5, recall 1, precision 0.5") {
    // All-identical features force the tree to a single tied leaf, which
    // resolves to the positive class: a constant all-positive classifier.
    // Subjects come in (pos, neg) pairs so every LOSO training slice stays
    // balanced and the tie persists.
    LabeledDataset ds;
    const std::size_t n = 20;
    ds.matrix = Matrix(n, 2, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        ds.labels.push_back(i % 2 == 0 ? 1 : 0);
        ds.subject_ids.push_back("pair" + std::to_string(i / 2));
    }
    ds.column_names = {"a", "b"};

    PipelineSpec pipe;
    pipe.model = default_spec(ModelFamily::DecisionTree, 1);
    const CvResult res = run_cv(ds, pipe, make_loso_folds(ds));
    REQUIRE(res.aggregate.aggregation == Aggregation::Pooled);
    REQUIRE(res.aggregate.accuracy == Catch::Approx(0.5));
    REQUIRE(res.aggregate.recall == Catch::Approx(1.0));
    REQUIRE(res.aggregate.precision == Catch::Approx(0.5));
    REQUIRE(res.aggregate.tp + res.aggregate.fp + res.aggregate.fn + res.aggregate.tn ==
            static_cast<std::int64_t>(n));
}

TEST_CASE("LOSO pooled accuracy equals the mean of singleton-fold accuracies") {
    const auto ds = synthetic_subjects(30, 3, 2.0, 5);
    PipelineSpec pipe;
    pipe.model = default_spec(ModelFamily::LogisticRegression, 2);
    const CvResult res = run_cv(ds, pipe, make_loso_folds(ds));
    double mean_acc = 0.0;
    for (const auto& f : res.folds) mean_acc += f.metrics.accuracy;
    mean_acc /= static_cast<double>(res.folds.size());
    REQUIRE(res.aggregate.accuracy == Catch::Approx(mean_acc).margin(1e-12));
}

TEST_CASE("separable two-cluster corpus reaches LOSO accuracy 0.95 with LR") {
    // Separation chosen so the nearest-mean brute-force oracle is ~perfect.
    const auto ds = synthetic_subjects(60, 4, 6.0, 6);

    std::size_t oracle_correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        // Leave-one-out class means.
        std::vector<double> mean0(ds.width(), 0.0), mean1(ds.width(), 0.0);
        double n0 = 0.0, n1 = 0.0;
        for (std::size_t r = 0; r < ds.size(); ++r) {
            if (r == i) continue;
            auto& m = ds.labels[r] == 1 ? mean1 : mean0;
            (ds.labels[r] == 1 ? n1 : n0) += 1.0;
            for (std::size_t c = 0; c < ds.width(); ++c) m[c] += ds.matrix.at(r, c);
        }
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t c = 0; c < ds.width(); ++c) {
            d0 += std::pow(ds.matrix.at(i, c) - mean0[c] / n0, 2.0);
            d1 += std::pow(ds.matrix.at(i, c) - mean1[c] / n1, 2.0);
        }
        oracle_correct += (d1 < d0 ? 1 : 0) == ds.labels[i];
    }
    REQUIRE(static_cast<double>(oracle_correct) / static_cast<double>(ds.size()) >= 0.99);

    PipelineSpec pipe;
    pipe.model = default_spec(ModelFamily::LogisticRegression, 3);
    const CvResult res = run_cv(ds, pipe, make_loso_folds(ds), 4);
    REQUIRE(res.aggregate.accuracy >= 0.95);
}

TEST_CASE("fold-local selector fitting picks different columns across folds") {
    // Column discriminativeness depends on single rows: leaving out row 0
    // (an outlier spoiling column 0) flips the top-1 choice between folds.
    LabeledDataset ds;
    const std::size_t n = 12;
    ds.matrix = Matrix(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i % 2;
        ds.labels.push_back(y);
        ds.subject_ids.push_back("s" + std::to_string(i));
        ds.matrix.at(i, 0) = y == 1 ? 1.0 : 0.0;
        ds.matrix.at(i, 1) = y == 1 ? 1.0 : 0.0;
    }
    ds.matrix.at(0, 0) = 40.0;   // ruins column 0 except when row 0 is held out
    ds.matrix.at(1, 1) = -40.0;  // ruins column 1 except when row 1 is held out
    ds.matrix.at(2, 0) += 0.01;  // symmetry breakers so no sentinel F values appear
    ds.matrix.at(3, 1) += 0.01;
    ds.column_names = {"a", "b"};

    PipelineSpec pipe;
    pipe.selector.enabled = true;
    pipe.selector.k = 1;
    pipe.model = default_spec(ModelFamily::DecisionTree, 4);
    const CvResult res = run_cv(ds, pipe, make_loso_folds(ds));

    std::set<std::vector<std::size_t>> distinct;
    for (const auto& f : res.folds) distinct.insert(f.chosen_columns);
    REQUIRE(distinct.size() >= 2);
}

TEST_CASE("run_cv rejects a plan built for another dataset") {
    const auto ds = synthetic_subjects(20, 2, 1.0, 7);
    const auto other = synthetic_subjects(30, 2, 1.0, 8);
    const FoldPlan plan = make_loso_folds(other);
    PipelineSpec pipe;
    pipe.model = default_spec(ModelFamily::DecisionTree, 5);
    REQUIRE_THROWS_AS(run_cv(ds, pipe, plan), Error);
}

TEST_CASE("model ranking reproduces the published leaderboard head") {
    const std::vector<std::pair<std::string, double>> loso_accuracies = {
        {"LR-feat", 0.6386},  {"LR-embed", 0.6747},  {"LR-combo", 0.6687},
        {"SVM-feat", 0.6566}, {"SVM-embed", 0.6566}, {"SVM-combo", 0.6807},
        {"NN-feat", 0.6265},  {"NN-embed", 0.6566},  {"NN-combo", 0.6928},
        {"DT-feat", 0.5843},  {"DT-embed", 0.6807},  {"DT-combo", 0.6867},
    };
    const auto top5 = rank_models(loso_accuracies, 5);
    REQUIRE(top5.size() == 5);
    REQUIRE(top5[0].first == "NN-combo");
    REQUIRE(top5[0].second == Catch::Approx(0.6928));

    // Brute-force sort oracle.
    auto sorted = loso_accuracies;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (std::size_t i = 0; i < 5; ++i) REQUIRE(top5[i] == sorted[i]);
}

TEST_CASE("equal accuracies rank alphabetically") {
    const auto ranked = rank_models({{"zeta", 0.5}, {"alpha", 0.5}, {"mid", 0.5}}, 3);
    REQUIRE(ranked[0].first == "alpha");
    REQUIRE(ranked[1].first == "mid");
    REQUIRE(ranked[2].first == "zeta");
    REQUIRE_THROWS_AS(rank_models({{"a", 0.5}}, 0), Error);
}

TEST_CASE("gap report reproduces published accuracy gaps") {
    auto with_accuracy = [](double acc) {
        EvalMetrics m;
        m.accuracy = acc;
        return m;
    };
    // Test-vs-10-fold and test-vs-LOSO for the feature SVM.
    REQUIRE(gap_report(with_accuracy(0.6479), with_accuracy(0.6265)).accuracy_pp ==
            Catch::Approx(2.14).margin(0.005));
    REQUIRE(gap_report(with_accuracy(0.6479), with_accuracy(0.6566)).accuracy_pp ==
            Catch::Approx(-0.87).margin(0.005));
    // LOSO-vs-10-fold rows.
    REQUIRE(gap_report(with_accuracy(0.6386), with_accuracy(0.6084)).accuracy_pp ==
            Catch::Approx(3.02).margin(0.005));
    REQUIRE(gap_report(with_accuracy(0.5843), with_accuracy(0.5964)).accuracy_pp ==
            Catch::Approx(-1.21).margin(0.005));
}

TEST_CASE("gap report is antisymmetric") {
    EvalMetrics a = compute_metrics(10, 5, 3, 12);
    EvalMetrics b = compute_metrics(8, 7, 5, 10);
    const GapReport ab = gap_report(a, b);
    const GapReport ba = gap_report(b, a);
    REQUIRE(ab.accuracy_pp == Catch::Approx(-ba.accuracy_pp).margin(1e-12));
    REQUIRE(ab.precision_pp == Catch::Approx(-ba.precision_pp).margin(1e-12));
    REQUIRE(ab.recall_pp == Catch::Approx(-ba.recall_pp).margin(1e-12));
    REQUIRE(ab.f1_pp == Catch::Approx(-ba.f1_pp).margin(1e-12));
    const GapReport self = gap_report(a, a);
    REQUIRE(self.accuracy_pp == 0.0);
    REQUIRE(self.f1_pp == 0.0);
}

TEST_CASE("baseline delta arithmetic") {
    REQUIRE(baseline_delta(0.6761) == Catch::Approx(2.82).margin(1e-9));
    REQUIRE(baseline_delta(0.6479) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(baseline_delta(0.6056) == Catch::Approx(-4.23).margin(1e-9));
}
