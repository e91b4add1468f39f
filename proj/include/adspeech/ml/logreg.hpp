#pragma once

#include <cmath>
#include <vector>

#include "adspeech/common/csv.hpp"
#include "adspeech/ml/model.hpp"
#include "adspeech/ml/optimize.hpp"

namespace adspeech {

namespace logreg_detail {

// log(1 + exp(-t)) without overflow.
inline double softplus_neg(double t) {
    if (t > 0.0) return std::log1p(std::exp(-t));
    return -t + std::log1p(std::exp(t));
}

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace logreg_detail

// L2-penalized logistic regression minimizing
//   sum_i log(1 + exp(-y_i (w.x_i + b))) + ||w||^2 / (2C)
// by L-BFGS until the gradient infinity norm falls below tol. The intercept
// is not penalized.
class LogRegModel final : public TrainedModel {
public:
    LogRegModel(ModelSpec spec, std::vector<double> weights, double bias, TrainingDiagnostics diag)
        : spec_(std::move(spec)), weights_(std::move(weights)), bias_(bias), diag_(std::move(diag)) {}

    static LogRegModel train(const ModelSpec& spec, const LabeledDataset& data) {
        spec.validate();
        require(data.size() >= 2, Errc::DegenerateInput, "training needs at least 2 rows");
        require(data.both_classes_present(), Errc::SingleClass,
                "logistic regression needs both classes present");
        const auto& p = std::get<LogRegParams>(spec.params);
        const std::size_t n = data.size(), d = data.width();
        const double inv_c = 1.0 / p.c;

        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = data.labels[i] == 1 ? 1.0 : -1.0;

        auto objective = [&](const std::vector<double>& x, std::vector<double>& grad) {
            // x = [w_0..w_{d-1}, b]
            grad.assign(d + 1, 0.0);
            double f = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double* row = data.matrix.row(i);
                double z = x[d];
                for (std::size_t j = 0; j < d; ++j) z += x[j] * row[j];
                const double t = y[i] * z;
                f += logreg_detail::softplus_neg(t);
                const double coef = -y[i] * logreg_detail::sigmoid(-t);
                for (std::size_t j = 0; j < d; ++j) grad[j] += coef * row[j];
                grad[d] += coef;
            }
            for (std::size_t j = 0; j < d; ++j) {
                f += 0.5 * inv_c * x[j] * x[j];
                grad[j] += inv_c * x[j];
            }
            return f;
        };

        LbfgsResult res = lbfgs_minimize(std::vector<double>(d + 1, 0.0), objective, p.tol, p.max_iter);

        TrainingDiagnostics diag;
        diag.iterations = res.iterations;
        diag.final_objective = res.objective;
        diag.converged = res.converged;
        if (!res.converged)
            diag.note = "L-BFGS stopped with gradient inf-norm " + format_double(res.grad_inf_norm);

        std::vector<double> w(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(d));
        return LogRegModel(spec, std::move(w), res.x[d], std::move(diag));
    }

    const ModelSpec& spec() const override { return spec_; }
    const TrainingDiagnostics& diagnostics() const override { return diag_; }
    std::size_t input_width() const override { return weights_.size(); }

    Prediction predict(const Matrix& rows) const override {
        check_width(rows);
        Prediction out;
        out.labels.resize(rows.rows);
        out.scores.resize(rows.rows);
        for (std::size_t i = 0; i < rows.rows; ++i) {
            const double* row = rows.row(i);
            double z = bias_;
            for (std::size_t j = 0; j < weights_.size(); ++j) z += weights_[j] * row[j];
            const double prob = logreg_detail::sigmoid(z);
            out.scores[i] = prob;
            out.labels[i] = prob >= 0.5 ? 1 : 0;
        }
        return out;
    }

    nlohmann::json meta_json() const override {
        return {{"width", weights_.size()}};
    }

    std::vector<double> param_blob() const override {
        std::vector<double> blob = weights_;
        blob.push_back(bias_);
        return blob;
    }

    static LogRegModel from_blob(ModelSpec spec, TrainingDiagnostics diag, const nlohmann::json& meta,
                                 const std::vector<double>& blob) {
        const auto width = meta.at("width").get<std::size_t>();
        require(blob.size() == width + 1, Errc::SchemaViolation, "logistic regression blob length mismatch");
        std::vector<double> w(blob.begin(), blob.begin() + static_cast<std::ptrdiff_t>(width));
        return LogRegModel(std::move(spec), std::move(w), blob[width], std::move(diag));
    }

private:
    ModelSpec spec_;
    std::vector<double> weights_;
    double bias_;
    TrainingDiagnostics diag_;
};

}  // namespace adspeech
