#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adspeech/common/rng.hpp"
#include "adspeech/repr/fuse.hpp"
#include "adspeech/repr/select.hpp"
#include "adspeech/repr/standardize.hpp"

using namespace adspeech;

namespace {

LabeledDataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    LabeledDataset ds;
    ds.matrix = Matrix(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(rows[r].begin(), rows[r].end(), ds.matrix.row(r));
    ds.labels = labels;
    for (std::size_t r = 0; r < rows.size(); ++r) ds.subject_ids.push_back("s" + std::to_string(r));
    for (std::size_t c = 0; c < ds.matrix.cols; ++c) ds.column_names.push_back("c" + std::to_string(c));
    return ds;
}

}  // namespace

TEST_CASE("fusion lays out features then embedding") {
    FeatureVector fv;
    SplitMix64 rng(1);
    for (auto& v : fv.values) v = rng.next_double(-3.0, 3.0);
    EmbeddingVector emb;
    emb.values.resize(kEmbeddingDim);
    for (auto& v : emb.values) v = rng.next_double(-3.0, 3.0);

    const auto fused = fuse("clip1", fv, "clip1", emb);
    REQUIRE(fused.size() == 936);
    for (int i = 0; i < kFeatureDim; ++i)
        REQUIRE(fused[static_cast<std::size_t>(i)] == fv.values[static_cast<std::size_t>(i)]);
    SplitMix64 probe(2);
    for (int t = 0; t < 100; ++t) {
        const auto j = static_cast<std::size_t>(probe.next_below(kEmbeddingDim));
        REQUIRE(fused[kFeatureDim + j] == emb.values[j]);
    }
}

TEST_CASE("fusion with a zero embedding preserves the feature prefix") {
    FeatureVector fv;
    for (std::size_t i = 0; i < fv.values.size(); ++i) fv.values[i] = static_cast<double>(i);
    EmbeddingVector emb;
    emb.values.assign(kEmbeddingDim, 0.0);
    const auto fused = fuse("c", fv, "c", emb);
    for (int i = 0; i < kFeatureDim; ++i)
        REQUIRE(fused[static_cast<std::size_t>(i)] == static_cast<double>(i));
    for (int i = kFeatureDim; i < kFusedDim; ++i) REQUIRE(fused[static_cast<std::size_t>(i)] == 0.0);
}

TEST_CASE("fusion rejects mismatched ids") {
    FeatureVector fv;
    EmbeddingVector emb;
    emb.values.assign(kEmbeddingDim, 0.0);
    REQUIRE_THROWS_AS(fuse("clipA", fv, "clipB", emb), Error);
}

TEST_CASE("anova F of a constant column is zero") {
    const auto ds = make_dataset({{1.0, 0.0}, {1.0, 1.0}, {1.0, 2.0}, {1.0, 3.0}}, {0, 0, 1, 1});
    const auto f = anova_f(ds);
    REQUIRE(f[0] == 0.0);
    REQUIRE(f[1] > 0.0);
}

TEST_CASE("anova F hand computation: groups {0,1} vs {2,3} give F = 8") {
    const auto ds = make_dataset({{0.0}, {1.0}, {2.0}, {3.0}}, {0, 0, 1, 1});
    const auto f = anova_f(ds);
    REQUIRE(f[0] == Catch::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("anova F is translation and scale invariant") {
    SplitMix64 rng(31);
    std::vector<std::vector<double>> rows(30, std::vector<double>(4));
    std::vector<int> labels(30);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        labels[r] = r < 15 ? 0 : 1;
        for (auto& v : rows[r]) v = rng.next_double(-2.0, 2.0) + labels[r];
    }
    const auto base = anova_f(make_dataset(rows, labels));

    auto shifted = rows;
    for (auto& row : shifted) row[2] += 1234.5;
    const auto f_shift = anova_f(make_dataset(shifted, labels));
    REQUIRE(f_shift[2] == Catch::Approx(base[2]).margin(1e-9));

    auto scaled = rows;
    for (auto& row : scaled) row[1] *= -42.0;
    const auto f_scale = anova_f(make_dataset(scaled, labels));
    REQUIRE(f_scale[1] == Catch::Approx(base[1]).margin(1e-9 * std::max(1.0, base[1])));
}

TEST_CASE("anova requires both classes") {
    const auto ds = make_dataset({{0.0}, {1.0}, {2.0}}, {1, 1, 1});
    REQUIRE_THROWS_MATCHES(anova_f(ds), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                               return e.code() == Errc::SingleClass;
                           }));
}

TEST_CASE("zero within-class variance with class separation hits the F sentinel") {
    const auto ds = make_dataset({{0.0}, {0.0}, {1.0}, {1.0}}, {0, 0, 1, 1});
    const auto f = anova_f(ds);
    REQUIRE(f[0] == kDegenerateFSentinel);
}

TEST_CASE("top-k selection matches a brute-force sort of recomputed scores") {
    SplitMix64 rng(77);
    std::vector<std::vector<double>> rows(40, std::vector<double>(25));
    std::vector<int> labels(40);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        labels[r] = r % 2;
        for (std::size_t c = 0; c < 25; ++c)
            rows[r][c] = rng.next_gaussian() + (c % 5 == 0 ? labels[r] * (static_cast<double>(c) / 10.0) : 0.0);
    }
    const auto ds = make_dataset(rows, labels);
    const ColumnSelector sel = select_top_k(ds, 10);
    REQUIRE(sel.chosen_indices.size() == 10);
    REQUIRE(std::is_sorted(sel.chosen_indices.begin(), sel.chosen_indices.end()));

    // Brute force: independent recomputation + sort.
    const auto scores = anova_f(ds);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<std::size_t> expected(order.begin(), order.begin() + 10);
    std::sort(expected.begin(), expected.end());
    REQUIRE(sel.chosen_indices == expected);
}

TEST_CASE("k >= width selects every column") {
    const auto ds = make_dataset({{0.0, 1.0}, {1.0, 0.0}, {2.0, 1.0}, {3.0, 0.0}}, {0, 0, 1, 1});
    const ColumnSelector sel = select_top_k(ds, 99);
    REQUIRE(sel.chosen_indices == std::vector<std::size_t>({0, 1}));
}

TEST_CASE("selection is permutation-equivariant") {
    SplitMix64 rng(555);
    std::vector<std::vector<double>> rows(30, std::vector<double>(8));
    std::vector<int> labels(30);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        labels[r] = r % 2;
        for (std::size_t c = 0; c < 8; ++c)
            rows[r][c] = rng.next_gaussian() + labels[r] * static_cast<double>(c) * 0.3;
    }
    const auto ds = make_dataset(rows, labels);
    const auto sel = select_top_k(ds, 3);

    // Reverse the columns and re-select.
    std::vector<std::vector<double>> rev_rows(rows.size(), std::vector<double>(8));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < 8; ++c) rev_rows[r][c] = rows[r][7 - c];
    const auto rev_sel = select_top_k(make_dataset(rev_rows, labels), 3);

    std::vector<std::size_t> mapped;
    for (std::size_t i : rev_sel.chosen_indices) mapped.push_back(7 - i);
    std::sort(mapped.begin(), mapped.end());
    REQUIRE(mapped == sel.chosen_indices);
}

TEST_CASE("apply_selector projects columns and preserves labels") {
    const auto ds = make_dataset({{1.0, 10.0}, {2.0, 20.0}, {3.0, 30.0}, {4.0, 40.0}}, {0, 0, 1, 1});

    ColumnSelector identity;
    identity.chosen_indices = {0, 1};
    const auto same = apply_selector(identity, ds);
    REQUIRE(same.matrix.data == ds.matrix.data);
    REQUIRE(same.labels == ds.labels);

    ColumnSelector only0;
    only0.chosen_indices = {0};
    const auto projected = apply_selector(only0, ds);
    REQUIRE(projected.width() == 1);
    for (std::size_t r = 0; r < 4; ++r) REQUIRE(projected.matrix.at(r, 0) == ds.matrix.at(r, 0));

    ColumnSelector bad;
    bad.chosen_indices = {5};
    REQUIRE_THROWS_AS(apply_selector(bad, ds), Error);
}

TEST_CASE("re-scoring kept columns reproduces their F values") {
    SplitMix64 rng(99);
    std::vector<std::vector<double>> rows(24, std::vector<double>(6));
    std::vector<int> labels(24);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        labels[r] = r % 2;
        for (auto& v : rows[r]) v = rng.next_gaussian() + 0.8 * labels[r];
    }
    const auto ds = make_dataset(rows, labels);
    const auto sel = select_top_k(ds, 3);
    const auto projected = apply_selector(sel, ds);
    const auto rescored = anova_f(projected);
    for (std::size_t i = 0; i < sel.chosen_indices.size(); ++i)
        REQUIRE(rescored[i] == Catch::Approx(sel.scores[sel.chosen_indices[i]]).margin(1e-12));
}

TEST_CASE("standardizer gives zero mean and unit sd on its training fold") {
    SplitMix64 rng(5);
    std::vector<std::vector<double>> rows(50, std::vector<double>(3));
    std::vector<int> labels(50);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        labels[r] = r % 2;
        rows[r] = {rng.next_double(0.0, 100.0), rng.next_gaussian() * 1e-3, 42.0};
    }
    const auto ds = make_dataset(rows, labels);
    const Standardizer st = fit_standardizer(ds);
    const auto z = standardize(st, ds);

    for (std::size_t c = 0; c < 2; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < z.size(); ++r) mean += z.matrix.at(r, c);
        mean /= static_cast<double>(z.size());
        double var = 0.0;
        for (std::size_t r = 0; r < z.size(); ++r) var += std::pow(z.matrix.at(r, c) - mean, 2.0);
        var /= static_cast<double>(z.size());
        REQUIRE(mean == Catch::Approx(0.0).margin(1e-10));
        REQUIRE(std::sqrt(var) == Catch::Approx(1.0).margin(1e-10));
    }
    // Constant column passes through unscaled.
    for (std::size_t r = 0; r < z.size(); ++r) REQUIRE(z.matrix.at(r, 2) == 42.0);
}

TEST_CASE("the fitted transform applies verbatim to held-out copies") {
    SplitMix64 rng(6);
    std::vector<std::vector<double>> rows(20, std::vector<double>(2));
    std::vector<int> labels(20);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        labels[r] = r % 2;
        rows[r] = {rng.next_double(-5.0, 5.0), rng.next_double(100.0, 200.0)};
    }
    const auto ds = make_dataset(rows, labels);
    const Standardizer st = fit_standardizer(ds);
    const auto once = standardize(st, ds);
    const auto again = standardize(st, ds);
    REQUIRE(once.matrix.data == again.matrix.data);
}

TEST_CASE("selector JSON round trip") {
    SplitMix64 rng(12);
    std::vector<std::vector<double>> rows(20, std::vector<double>(5));
    std::vector<int> labels(20);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        labels[r] = r % 2;
        for (auto& v : rows[r]) v = rng.next_gaussian() + labels[r];
    }
    const auto sel = select_top_k(make_dataset(rows, labels), 2, "layout-x");
    const auto j = selector_to_json(sel);
    const auto back = selector_from_json(j);
    REQUIRE(back.layout_id == "layout-x");
    REQUIRE(back.k == 2);
    REQUIRE(back.chosen_indices == sel.chosen_indices);
    REQUIRE(back.scores == sel.scores);
}
