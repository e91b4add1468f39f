#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "adspeech/common/error.hpp"

namespace adspeech {

// Dense row-major matrix of doubles. Nothing clever; the pipelines here are
// small enough that a flat vector plus two sizes is the right tool.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows);
        for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
        return out;
    }

    Matrix select_rows(const std::vector<std::size_t>& idx) const {
        Matrix out(idx.size(), cols);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            require(idx[i] < rows, Errc::InvalidArgument, "row index out of range");
            const double* src = row(idx[i]);
            std::copy(src, src + cols, out.row(i));
        }
        return out;
    }

    Matrix select_columns(const std::vector<std::size_t>& idx) const {
        Matrix out(rows, idx.size());
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t i = 0; i < idx.size(); ++i) {
                require(idx[i] < cols, Errc::InvalidArgument, "column index out of range");
                out.at(r, i) = at(r, idx[i]);
            }
        return out;
    }
};

}  // namespace adspeech
