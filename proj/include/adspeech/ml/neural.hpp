#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "adspeech/common/rng.hpp"
#include "adspeech/ml/model.hpp"

namespace adspeech {

// One hidden layer of rectified-linear units with a logistic output,
// trained with Adam on mini-batch binary cross-entropy plus an L2 weight
// penalty (biases unpenalized). Weights and biases initialize from
// uniform(+-sqrt(6/(fan_in+fan_out))) drawn from the seeded generator.
class NeuralNetModel final : public TrainedModel {
public:
    // Flat parameter layout: [W1 (d x h), b1 (h), W2 (h), b2 (1)].
    struct Workspace {
        std::vector<double> hidden;  // pre-activation, then activation
        std::vector<double> grad;
    };

    NeuralNetModel(ModelSpec spec, std::size_t width, std::vector<double> params, TrainingDiagnostics diag)
        : spec_(std::move(spec)), width_(width), params_(std::move(params)), diag_(std::move(diag)) {}

    static std::size_t param_count(std::size_t d, std::size_t h) { return d * h + h + h + 1; }

    static std::vector<double> init_params(std::size_t d, std::size_t h, std::uint64_t seed) {
        SplitMix64 rng(seed);
        std::vector<double> p(param_count(d, h));
        const double bound1 = std::sqrt(6.0 / static_cast<double>(d + h));
        const double bound2 = std::sqrt(6.0 / static_cast<double>(h + 1));
        std::size_t k = 0;
        for (std::size_t j = 0; j < d * h; ++j) p[k++] = rng.next_double(-bound1, bound1);
        for (std::size_t j = 0; j < h; ++j) p[k++] = rng.next_double(-bound1, bound1);
        for (std::size_t j = 0; j < h; ++j) p[k++] = rng.next_double(-bound2, bound2);
        p[k++] = rng.next_double(-bound2, bound2);
        return p;
    }

    // Forward pass for one row; returns the output probability.
    static double forward(const std::vector<double>& p, std::size_t d, std::size_t h, const double* row,
                          std::vector<double>* hidden_out = nullptr) {
        const double* w1 = p.data();
        const double* b1 = p.data() + d * h;
        const double* w2 = b1 + h;
        const double b2 = p[d * h + 2 * h];
        double z = b2;
        if (hidden_out) hidden_out->resize(h);
        for (std::size_t u = 0; u < h; ++u) {
            double a = b1[u];
            for (std::size_t j = 0; j < d; ++j) a += w1[j * h + u] * row[j];
            const double act = a > 0.0 ? a : 0.0;
            if (hidden_out) (*hidden_out)[u] = act;
            z += w2[u] * act;
        }
        return 1.0 / (1.0 + std::exp(-z));
    }

    // Mean binary cross-entropy over the given rows plus
    // 0.5 * alpha * ||W||^2 / n_rows; accumulates the analytic gradient
    // into grad (resized and zeroed here).
    static double loss_and_gradient(const std::vector<double>& p, std::size_t d, std::size_t h,
                                    const Matrix& x, const std::vector<int>& labels,
                                    const std::vector<std::size_t>& rows, double l2_alpha,
                                    std::vector<double>& grad) {
        grad.assign(p.size(), 0.0);
        const double* w2 = p.data() + d * h + h;
        double* g_w1 = grad.data();
        double* g_b1 = grad.data() + d * h;
        double* g_w2 = g_b1 + h;
        const std::size_t b2_at = d * h + 2 * h;

        const double n = static_cast<double>(rows.size());
        double loss = 0.0;
        std::vector<double> hidden(h);
        for (std::size_t r : rows) {
            const double* row = x.row(r);
            const double prob = forward(p, d, h, row, &hidden);
            const double y = labels[r] == 1 ? 1.0 : 0.0;
            const double eps = 1e-12;
            loss += -(y * std::log(std::max(prob, eps)) + (1.0 - y) * std::log(std::max(1.0 - prob, eps)));

            const double dz = (prob - y) / n;  // d(mean BCE)/dz
            grad[b2_at] += dz;
            for (std::size_t u = 0; u < h; ++u) {
                g_w2[u] += dz * hidden[u];
                if (hidden[u] > 0.0) {
                    const double da = dz * w2[u];
                    g_b1[u] += da;
                    for (std::size_t j = 0; j < d; ++j) g_w1[j * h + u] += da * row[j];
                }
            }
        }
        loss /= n;

        // L2 on weights only.
        double reg = 0.0;
        for (std::size_t j = 0; j < d * h; ++j) {
            reg += p[j] * p[j];
            g_w1[j] += l2_alpha * p[j] / n;
        }
        for (std::size_t u = 0; u < h; ++u) {
            const double w = w2[u];
            reg += w * w;
            g_w2[u] += l2_alpha * w / n;
        }
        loss += 0.5 * l2_alpha * reg / n;
        return loss;
    }

    static NeuralNetModel train(const ModelSpec& spec, const LabeledDataset& data) {
        spec.validate();
        require(data.size() >= 2, Errc::DegenerateInput, "training needs at least 2 rows");
        require(data.both_classes_present(), Errc::SingleClass, "neural net needs both classes present");
        const auto& hp = std::get<NeuralNetParams>(spec.params);
        const std::size_t n = data.size(), d = data.width();
        const auto h = static_cast<std::size_t>(hp.hidden_units);
        const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(hp.batch_cap), n);

        std::vector<double> params = init_params(d, h, spec.seed);
        std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0), grad;
        SplitMix64 shuffle_rng(mix_seed(spec.seed, 0x5u));

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);

        TrainingDiagnostics diag;
        double prev_loss = 1e300;
        long step = 0;
        int epoch = 0;
        for (; epoch < hp.max_epochs; ++epoch) {
            shuffle_inplace(order, shuffle_rng);
            double epoch_loss = 0.0;
            std::size_t n_batches = 0;
            for (std::size_t off = 0; off < n; off += batch) {
                const std::size_t hi = std::min(off + batch, n);
                std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(off),
                                              order.begin() + static_cast<std::ptrdiff_t>(hi));
                epoch_loss += loss_and_gradient(params, d, h, data.matrix, data.labels, rows,
                                                hp.l2_alpha, grad);
                ++n_batches;
                ++step;
                const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(step));
                const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(step));
                for (std::size_t k = 0; k < params.size(); ++k) {
                    m[k] = hp.beta1 * m[k] + (1.0 - hp.beta1) * grad[k];
                    v[k] = hp.beta2 * v[k] + (1.0 - hp.beta2) * grad[k] * grad[k];
                    params[k] -= hp.learning_rate * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + 1e-8);
                }
            }
            epoch_loss /= static_cast<double>(n_batches);
            diag.final_objective = epoch_loss;
            if (prev_loss - epoch_loss < hp.tol) {
                diag.converged = true;
                ++epoch;
                break;
            }
            prev_loss = epoch_loss;
        }
        diag.iterations = epoch;
        if (!diag.converged) diag.note = "epoch cap reached before loss improvement fell below tolerance";
        diag.note += diag.note.empty() ? "" : "; ";
        diag.note += "regime: adam batches of " + std::to_string(batch);

        return NeuralNetModel(spec, d, std::move(params), std::move(diag));
    }

    const ModelSpec& spec() const override { return spec_; }
    const TrainingDiagnostics& diagnostics() const override { return diag_; }
    std::size_t input_width() const override { return width_; }

    Prediction predict(const Matrix& rows) const override {
        check_width(rows);
        const auto& hp = std::get<NeuralNetParams>(spec_.params);
        const auto h = static_cast<std::size_t>(hp.hidden_units);
        Prediction out;
        out.labels.resize(rows.rows);
        out.scores.resize(rows.rows);
        for (std::size_t i = 0; i < rows.rows; ++i) {
            const double prob = forward(params_, width_, h, rows.row(i));
            out.scores[i] = prob;
            out.labels[i] = prob >= 0.5 ? 1 : 0;
        }
        return out;
    }

    nlohmann::json meta_json() const override {
        const auto& hp = std::get<NeuralNetParams>(spec_.params);
        return {{"width", width_}, {"hidden_units", hp.hidden_units}};
    }

    std::vector<double> param_blob() const override { return params_; }

    static NeuralNetModel from_blob(ModelSpec spec, TrainingDiagnostics diag, const nlohmann::json& meta,
                                    const std::vector<double>& blob) {
        const auto width = meta.at("width").get<std::size_t>();
        const auto h = static_cast<std::size_t>(meta.at("hidden_units").get<int>());
        require(blob.size() == param_count(width, h), Errc::SchemaViolation,
                "neural net blob length mismatch");
        return NeuralNetModel(std::move(spec), width, blob, std::move(diag));
    }

private:
    ModelSpec spec_;
    std::size_t width_;
    std::vector<double> params_;
    TrainingDiagnostics diag_;
};

// Central finite-difference check of the analytic gradient at the seeded
// initial parameters, over every parameter. Returns the maximum relative
// error; the denominator is floored at 1e-3 so vanishing components cannot
// inflate rounding noise into a failure.
inline double gradient_check(const ModelSpec& spec, const LabeledDataset& data) {
    require(std::holds_alternative<NeuralNetParams>(spec.params), Errc::InvalidArgument,
            "gradient check applies to the neural net family");
    require(data.size() <= 32 && data.width() <= 16, Errc::InvalidArgument,
            "gradient check expects a small dataset (n <= 32, d <= 16)");
    const auto& hp = std::get<NeuralNetParams>(spec.params);
    const std::size_t d = data.width();
    const auto h = static_cast<std::size_t>(hp.hidden_units);

    std::vector<double> params = NeuralNetModel::init_params(d, h, spec.seed);
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), 0);

    std::vector<double> analytic;
    NeuralNetModel::loss_and_gradient(params, d, h, data.matrix, data.labels, rows, hp.l2_alpha, analytic);

    const double step = 1e-5;
    double max_rel = 0.0;
    std::vector<double> scratch;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double saved = params[k];
        params[k] = saved + step;
        const double f_plus = NeuralNetModel::loss_and_gradient(params, d, h, data.matrix, data.labels,
                                                                rows, hp.l2_alpha, scratch);
        params[k] = saved - step;
        const double f_minus = NeuralNetModel::loss_and_gradient(params, d, h, data.matrix, data.labels,
                                                                 rows, hp.l2_alpha, scratch);
        params[k] = saved;
        const double fd = (f_plus - f_minus) / (2.0 * step);
        const double denom = std::max({std::abs(analytic[k]), std::abs(fd), 1e-3});
        max_rel = std::max(max_rel, std::abs(analytic[k] - fd) / denom);
    }
    return max_rel;
}

}  // namespace adspeech
