#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "adspeech/common/error.hpp"
#include "adspeech/common/matrix.hpp"

namespace adspeech {

// A labeled design matrix: one row per clip, AD = positive class.
struct LabeledDataset {
    Matrix matrix;
    std::vector<int> labels;  // 1 = AD, 0 = CN
    std::vector<std::string> subject_ids;
    std::vector<std::string> column_names;

    std::size_t size() const { return matrix.rows; }
    std::size_t width() const { return matrix.cols; }

    void validate() const {
        require(labels.size() == matrix.rows && subject_ids.size() == matrix.rows,
                Errc::SchemaViolation, "dataset needs one label and subject id per row");
        require(column_names.size() == matrix.cols, Errc::SchemaViolation,
                "dataset needs one column name per column");
        for (double v : matrix.data)
            require(std::isfinite(v), Errc::SchemaViolation, "dataset contains a non-finite entry");
        for (int y : labels)
            require(y == 0 || y == 1, Errc::SchemaViolation, "labels must be binary");
    }

    LabeledDataset select_rows(const std::vector<std::size_t>& idx) const {
        LabeledDataset out;
        out.matrix = matrix.select_rows(idx);
        out.column_names = column_names;
        out.labels.reserve(idx.size());
        out.subject_ids.reserve(idx.size());
        for (std::size_t i : idx) {
            out.labels.push_back(labels[i]);
            out.subject_ids.push_back(subject_ids[i]);
        }
        return out;
    }

    bool both_classes_present() const {
        bool pos = false, neg = false;
        for (int y : labels) (y == 1 ? pos : neg) = true;
        return pos && neg;
    }
};

}  // namespace adspeech
