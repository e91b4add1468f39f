#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "adspeech/common/error.hpp"
#include "adspeech/common/rng.hpp"
#include "adspeech/repr/dataset.hpp"

namespace adspeech {

enum class FoldScheme { Loso, StratifiedK };

inline const char* fold_scheme_name(FoldScheme s) {
    return s == FoldScheme::Loso ? "loso" : "stratified-k";
}

struct Fold {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

struct FoldPlan {
    std::vector<Fold> folds;
    FoldScheme scheme = FoldScheme::Loso;
    std::uint64_t seed = 0;
    std::size_t n_rows = 0;

    // Test sets must be pairwise disjoint, cover every row exactly once,
    // and be disjoint from their own training side.
    void validate() const {
        std::vector<int> seen(n_rows, 0);
        for (const auto& f : folds) {
            std::vector<int> in_test(n_rows, 0);
            for (std::size_t i : f.test_indices) {
                require(i < n_rows, Errc::Internal, "fold index out of range");
                ++seen[i];
                in_test[i] = 1;
            }
            for (std::size_t i : f.train_indices) {
                require(i < n_rows, Errc::Internal, "fold index out of range");
                require(!in_test[i], Errc::Internal, "row appears on both sides of a fold");
            }
            require(f.train_indices.size() + f.test_indices.size() == n_rows, Errc::Internal,
                    "fold does not partition the dataset");
        }
        for (std::size_t i = 0; i < n_rows; ++i)
            require(seen[i] == 1, Errc::Internal, "fold test sets do not partition the rows");
    }
};

// One fold per subject; rows sharing a subject_id are held out together.
// Fold order follows first appearance in the dataset.
inline FoldPlan make_loso_folds(const LabeledDataset& ds) {
    require(ds.size() >= 2, Errc::InvalidArgument, "LOSO needs at least 2 rows");
    FoldPlan plan;
    plan.scheme = FoldScheme::Loso;
    plan.n_rows = ds.size();

    std::vector<std::string> subject_order;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto [it, inserted] = groups.try_emplace(ds.subject_ids[i]);
        if (inserted) subject_order.push_back(ds.subject_ids[i]);
        it->second.push_back(i);
    }
    for (const auto& subject : subject_order) {
        Fold f;
        f.test_indices = groups[subject];
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (ds.subject_ids[i] != subject) f.train_indices.push_back(i);
        plan.folds.push_back(std::move(f));
    }
    plan.validate();
    return plan;
}

// Seeded stratified k-fold: each class is shuffled, then dealt into folds
// so that per-fold class counts differ from perfect proportion by at most
// one and fold sizes differ by at most one. Each class's oversized folds
// start where the previous class's ended, which is what keeps total fold
// sizes balanced.
inline FoldPlan make_stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed) {
    require(k >= 2, Errc::InvalidArgument, "stratified k-fold needs k >= 2");
    const auto kk = static_cast<std::size_t>(k);
    require(kk <= ds.size(), Errc::InvalidArgument, "k exceeds the number of rows");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
    for (const auto& [label, members] : by_class)
        require(members.size() >= kk, Errc::InvalidArgument,
                "class " + std::to_string(label) + " has fewer members (" +
                    std::to_string(members.size()) + ") than k");

    FoldPlan plan;
    plan.scheme = FoldScheme::StratifiedK;
    plan.seed = seed;
    plan.n_rows = ds.size();
    plan.folds.resize(kk);

    std::size_t extra_offset = 0;
    for (auto& [label, members] : by_class) {
        SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(label) + 0x9E37u));
        shuffle_inplace(members, rng);
        const std::size_t base = members.size() / kk;
        const std::size_t extras = members.size() % kk;
        std::size_t off = 0;
        for (std::size_t f = 0; f < kk; ++f) {
            std::size_t take = base;
            // Folds [extra_offset, extra_offset + extras) mod k get one more.
            const std::size_t rel = (f + kk - extra_offset % kk) % kk;
            if (rel < extras) ++take;
            for (std::size_t j = 0; j < take; ++j) plan.folds[f].test_indices.push_back(members[off++]);
        }
        require(off == members.size(), Errc::Internal, "stratified split lost rows");
        extra_offset += extras;
    }

    for (auto& f : plan.folds) {
        std::sort(f.test_indices.begin(), f.test_indices.end());
        std::vector<int> in_test(ds.size(), 0);
        for (std::size_t i : f.test_indices) in_test[i] = 1;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (!in_test[i]) f.train_indices.push_back(i);
    }
    plan.validate();
    return plan;
}

}  // namespace adspeech
