#pragma once

#include <cmath>
#include <vector>

#include "adspeech/common/error.hpp"
#include "adspeech/repr/dataset.hpp"

namespace adspeech {

// Per-column z-scoring fit on training rows only. Columns with (population)
// sd below 1e-12 pass through unscaled. The fitted transform is applied
// verbatim to any evaluation split.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> scales;  // 1/sd, or 1 for degenerate columns

    void apply(Matrix& m) const {
        require(m.cols == means.size(), Errc::DimensionMismatch,
                "standardizer width does not match matrix width");
        for (std::size_t r = 0; r < m.rows; ++r) {
            double* row = m.row(r);
            for (std::size_t c = 0; c < m.cols; ++c) row[c] = (row[c] - means[c]) * scales[c];
        }
    }
};

inline Standardizer fit_standardizer(const LabeledDataset& train) {
    require(train.size() >= 2, Errc::InvalidArgument, "standardizer needs at least 2 rows");
    Standardizer s;
    s.means.resize(train.width());
    s.scales.resize(train.width());
    const double n = static_cast<double>(train.size());
    for (std::size_t c = 0; c < train.width(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < train.size(); ++r) mean += train.matrix.at(r, c);
        mean /= n;
        double var = 0.0;
        for (std::size_t r = 0; r < train.size(); ++r) {
            const double d = train.matrix.at(r, c) - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / n);
        if (sd < 1e-12) {
            s.means[c] = 0.0;
            s.scales[c] = 1.0;
        } else {
            s.means[c] = mean;
            s.scales[c] = 1.0 / sd;
        }
    }
    return s;
}

inline LabeledDataset standardize(const Standardizer& s, const LabeledDataset& ds) {
    LabeledDataset out = ds;
    s.apply(out.matrix);
    return out;
}

}  // namespace adspeech
