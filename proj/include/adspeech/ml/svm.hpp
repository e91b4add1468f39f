#pragma once

#include <cmath>
#include <vector>

#include "adspeech/ml/model.hpp"

namespace adspeech {

// C-SVM with RBF kernel k(x,z) = exp(-gamma ||x-z||^2), solved in the dual
// by sequential minimal optimization with maximal-violating-pair working-set
// selection. Optimization stops when every KKT violation is below kkt_tol.
class SvmModel final : public TrainedModel {
public:
    SvmModel(ModelSpec spec, Matrix support_vectors, std::vector<double> coefficients, double rho,
             TrainingDiagnostics diag)
        : spec_(std::move(spec)),
          support_vectors_(std::move(support_vectors)),
          coefficients_(std::move(coefficients)),
          rho_(rho),
          diag_(std::move(diag)) {}

    struct DualSolution {
        std::vector<double> alpha;
        std::vector<double> gradient;  // of the dual objective
        double rho = 0.0;
        int iterations = 0;
        bool converged = false;
    };

    // Exposed separately so tests can check dual feasibility directly.
    static DualSolution solve_dual(const Matrix& x, const std::vector<double>& y, double gamma, double c,
                                   double tol) {
        const std::size_t n = x.rows;
        // Full kernel matrix; training sets here are small.
        std::vector<double> q(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double k = rbf(x.row(i), x.row(j), x.cols, gamma);
                q[i * n + j] = y[i] * y[j] * k;
                q[j * n + i] = q[i * n + j];
            }

        DualSolution sol;
        sol.alpha.assign(n, 0.0);
        sol.gradient.assign(n, -1.0);  // G_i = (Q a)_i - 1 at a = 0

        const int max_iter = std::max<int>(10000, static_cast<int>(200 * n));
        int it = 0;
        for (; it < max_iter; ++it) {
            // Maximal violating pair.
            int i_up = -1, j_low = -1;
            double m_val = -1e300, m_low = 1e300;
            for (std::size_t k = 0; k < n; ++k) {
                const double v = -y[k] * sol.gradient[k];
                const bool in_up = (y[k] > 0 && sol.alpha[k] < c) || (y[k] < 0 && sol.alpha[k] > 0);
                const bool in_low = (y[k] > 0 && sol.alpha[k] > 0) || (y[k] < 0 && sol.alpha[k] < c);
                if (in_up && v > m_val) {
                    m_val = v;
                    i_up = static_cast<int>(k);
                }
                if (in_low && v < m_low) {
                    m_low = v;
                    j_low = static_cast<int>(k);
                }
            }
            if (i_up < 0 || j_low < 0 || m_val - m_low < tol) {
                sol.converged = true;
                break;
            }
            const auto i = static_cast<std::size_t>(i_up);
            const auto j = static_cast<std::size_t>(j_low);

            const double old_ai = sol.alpha[i], old_aj = sol.alpha[j];
            if (y[i] != y[j]) {
                double quad = q[i * n + i] + q[j * n + j] + 2.0 * q[i * n + j];
                quad = std::max(quad, 1e-12);
                const double delta = (-sol.gradient[i] - sol.gradient[j]) / quad;
                const double diff = sol.alpha[i] - sol.alpha[j];
                sol.alpha[i] += delta;
                sol.alpha[j] += delta;
                if (diff > 0 && sol.alpha[j] < 0) { sol.alpha[j] = 0; sol.alpha[i] = diff; }
                else if (diff <= 0 && sol.alpha[i] < 0) { sol.alpha[i] = 0; sol.alpha[j] = -diff; }
                if (diff > 0) {
                    if (sol.alpha[i] > c) { sol.alpha[i] = c; sol.alpha[j] = c - diff; }
                } else {
                    if (sol.alpha[j] > c) { sol.alpha[j] = c; sol.alpha[i] = c + diff; }
                }
            } else {
                double quad = q[i * n + i] + q[j * n + j] - 2.0 * q[i * n + j];
                quad = std::max(quad, 1e-12);
                const double delta = (sol.gradient[i] - sol.gradient[j]) / quad;
                const double sum = sol.alpha[i] + sol.alpha[j];
                sol.alpha[i] -= delta;
                sol.alpha[j] += delta;
                if (sum > c) {
                    if (sol.alpha[i] > c) { sol.alpha[i] = c; sol.alpha[j] = sum - c; }
                    if (sol.alpha[j] > c) { sol.alpha[j] = c; sol.alpha[i] = sum - c; }
                } else {
                    if (sol.alpha[j] < 0) { sol.alpha[j] = 0; sol.alpha[i] = sum; }
                    if (sol.alpha[i] < 0) { sol.alpha[i] = 0; sol.alpha[j] = sum; }
                }
            }

            const double d_i = sol.alpha[i] - old_ai;
            const double d_j = sol.alpha[j] - old_aj;
            if (d_i == 0.0 && d_j == 0.0) {
                sol.converged = true;  // numerically stuck at the boundary
                break;
            }
            for (std::size_t k = 0; k < n; ++k)
                sol.gradient[k] += q[k * n + i] * d_i + q[k * n + j] * d_j;
        }
        sol.iterations = it;

        // rho from free support vectors, falling back to the violation midpoint.
        double free_sum = 0.0;
        std::size_t free_count = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (sol.alpha[k] > 1e-12 && sol.alpha[k] < c - 1e-12) {
                free_sum += y[k] * sol.gradient[k];
                ++free_count;
            }
        }
        if (free_count > 0) {
            sol.rho = free_sum / static_cast<double>(free_count);
        } else {
            double up = -1e300, low = 1e300;
            for (std::size_t k = 0; k < n; ++k) {
                const double v = -y[k] * sol.gradient[k];
                const bool in_up = (y[k] > 0 && sol.alpha[k] < c) || (y[k] < 0 && sol.alpha[k] > 0);
                const bool in_low = (y[k] > 0 && sol.alpha[k] > 0) || (y[k] < 0 && sol.alpha[k] < c);
                if (in_up) up = std::max(up, v);
                if (in_low) low = std::min(low, v);
            }
            sol.rho = -(up + low) / 2.0;
        }
        return sol;
    }

    static SvmModel train(const ModelSpec& spec, const LabeledDataset& data) {
        spec.validate();
        require(data.size() >= 2, Errc::DegenerateInput, "training needs at least 2 rows");
        require(data.both_classes_present(), Errc::SingleClass, "SVM needs both classes present");
        const auto& p = std::get<SvmParams>(spec.params);

        std::vector<double> y(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) y[i] = data.labels[i] == 1 ? 1.0 : -1.0;

        DualSolution sol = solve_dual(data.matrix, y, p.gamma, p.c, p.kkt_tol);

        std::vector<std::size_t> sv_idx;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (sol.alpha[i] > 1e-12) sv_idx.push_back(i);

        Matrix sv = data.matrix.select_rows(sv_idx);
        std::vector<double> coef(sv_idx.size());
        for (std::size_t s = 0; s < sv_idx.size(); ++s)
            coef[s] = sol.alpha[sv_idx[s]] * y[sv_idx[s]];

        TrainingDiagnostics diag;
        diag.iterations = sol.iterations;
        diag.converged = sol.converged;
        double dual_obj = 0.0;  // 0.5 a'Qa - e'a = 0.5 sum a_i (G_i - 1)
        for (std::size_t i = 0; i < data.size(); ++i)
            dual_obj += 0.5 * sol.alpha[i] * (sol.gradient[i] - 1.0);
        diag.final_objective = dual_obj;
        if (!sol.converged) diag.note = "SMO iteration cap reached before KKT tolerance";

        return SvmModel(spec, std::move(sv), std::move(coef), sol.rho, std::move(diag));
    }

    const ModelSpec& spec() const override { return spec_; }
    const TrainingDiagnostics& diagnostics() const override { return diag_; }
    std::size_t input_width() const override { return support_vectors_.cols; }

    double decision_value(const double* row) const {
        const auto& p = std::get<SvmParams>(spec_.params);
        double f = -rho_;
        for (std::size_t s = 0; s < support_vectors_.rows; ++s)
            f += coefficients_[s] * rbf(support_vectors_.row(s), row, support_vectors_.cols, p.gamma);
        return f;
    }

    Prediction predict(const Matrix& rows) const override {
        check_width(rows);
        Prediction out;
        out.labels.resize(rows.rows);
        out.scores.resize(rows.rows);
        for (std::size_t i = 0; i < rows.rows; ++i) {
            const double f = decision_value(rows.row(i));
            out.scores[i] = f;
            out.labels[i] = f >= 0.0 ? 1 : 0;
        }
        return out;
    }

    nlohmann::json meta_json() const override {
        return {{"width", support_vectors_.cols}, {"n_sv", support_vectors_.rows}};
    }

    std::vector<double> param_blob() const override {
        std::vector<double> blob;
        blob.reserve(1 + coefficients_.size() + support_vectors_.data.size());
        blob.push_back(rho_);
        blob.insert(blob.end(), coefficients_.begin(), coefficients_.end());
        blob.insert(blob.end(), support_vectors_.data.begin(), support_vectors_.data.end());
        return blob;
    }

    static SvmModel from_blob(ModelSpec spec, TrainingDiagnostics diag, const nlohmann::json& meta,
                              const std::vector<double>& blob) {
        const auto width = meta.at("width").get<std::size_t>();
        const auto n_sv = meta.at("n_sv").get<std::size_t>();
        require(blob.size() == 1 + n_sv + n_sv * width, Errc::SchemaViolation, "SVM blob length mismatch");
        const double rho = blob[0];
        std::vector<double> coef(blob.begin() + 1, blob.begin() + 1 + static_cast<std::ptrdiff_t>(n_sv));
        Matrix sv(n_sv, width);
        std::copy(blob.begin() + 1 + static_cast<std::ptrdiff_t>(n_sv), blob.end(), sv.data.begin());
        return SvmModel(std::move(spec), std::move(sv), std::move(coef), rho, std::move(diag));
    }

private:
    static double rbf(const double* a, const double* b, std::size_t d, double gamma) {
        double dist2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = a[j] - b[j];
            dist2 += diff * diff;
        }
        return std::exp(-gamma * dist2);
    }

    ModelSpec spec_;
    Matrix support_vectors_;
    std::vector<double> coefficients_;  // alpha_i * y_i
    double rho_;
    TrainingDiagnostics diag_;
};

}  // namespace adspeech
