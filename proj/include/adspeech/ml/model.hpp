#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "adspeech/common/error.hpp"
#include "adspeech/common/matrix.hpp"
#include "adspeech/repr/dataset.hpp"

namespace adspeech {

enum class ModelFamily { LogisticRegression, SvmRbf, NeuralNet, DecisionTree };

inline const char* family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::LogisticRegression: return "logistic-regression";
        case ModelFamily::SvmRbf: return "svm-rbf";
        case ModelFamily::NeuralNet: return "neural-net";
        case ModelFamily::DecisionTree: return "decision-tree";
    }
    return "unknown";
}

inline ModelFamily family_from_name(const std::string& s) {
    if (s == "logistic-regression" || s == "logreg" || s == "lr") return ModelFamily::LogisticRegression;
    if (s == "svm-rbf" || s == "svm") return ModelFamily::SvmRbf;
    if (s == "neural-net" || s == "nn") return ModelFamily::NeuralNet;
    if (s == "decision-tree" || s == "dt" || s == "tree") return ModelFamily::DecisionTree;
    raise(Errc::ConfigInvalid, "unknown model family '" + s + "'");
}

// Hyperparameters are frozen to the values every experiment in this project
// uses; they live in the spec record so the model file is self-describing.
struct LogRegParams {
    double c = 1.0;  // inverse regularization strength (L2)
    double tol = 1e-4;
    int max_iter = 1000;
};

struct SvmParams {
    double gamma = 0.001;
    double c = 1.0;
    double kkt_tol = 1e-3;
};

struct NeuralNetParams {
    int hidden_units = 100;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int batch_cap = 200;  // batch = min(batch_cap, n)
    int max_epochs = 200;
    double tol = 1e-4;
    double l2_alpha = 1e-4;
};

struct TreeParams {
    int min_samples_split = 2;
    int min_samples_leaf = 1;
};

struct ModelSpec {
    ModelFamily family = ModelFamily::LogisticRegression;
    std::variant<LogRegParams, SvmParams, NeuralNetParams, TreeParams> params = LogRegParams{};
    std::uint64_t seed = 0;

    void validate() const {
        if (const auto* p = std::get_if<LogRegParams>(&params))
            require(p->c > 0.0 && p->tol > 0.0 && p->max_iter >= 1, Errc::InvalidArgument,
                    "logistic regression hyperparameters out of range");
        if (const auto* p = std::get_if<SvmParams>(&params))
            require(p->c > 0.0 && p->gamma > 0.0 && p->kkt_tol > 0.0, Errc::InvalidArgument,
                    "SVM hyperparameters out of range");
        if (const auto* p = std::get_if<NeuralNetParams>(&params))
            require(p->hidden_units >= 1 && p->learning_rate > 0.0 && p->max_epochs >= 1,
                    Errc::InvalidArgument, "neural net hyperparameters out of range");
        if (const auto* p = std::get_if<TreeParams>(&params))
            require(p->min_samples_split >= 2 && p->min_samples_leaf >= 1, Errc::InvalidArgument,
                    "decision tree hyperparameters out of range");
    }
};

inline ModelSpec default_spec(ModelFamily family, std::uint64_t seed) {
    ModelSpec s;
    s.family = family;
    s.seed = seed;
    switch (family) {
        case ModelFamily::LogisticRegression: s.params = LogRegParams{}; break;
        case ModelFamily::SvmRbf: s.params = SvmParams{}; break;
        case ModelFamily::NeuralNet: s.params = NeuralNetParams{}; break;
        case ModelFamily::DecisionTree: s.params = TreeParams{}; break;
    }
    return s;
}

inline nlohmann::json spec_to_json(const ModelSpec& s) {
    nlohmann::json p;
    if (const auto* lr = std::get_if<LogRegParams>(&s.params))
        p = {{"c", lr->c}, {"tol", lr->tol}, {"max_iter", lr->max_iter}};
    else if (const auto* svm = std::get_if<SvmParams>(&s.params))
        p = {{"gamma", svm->gamma}, {"c", svm->c}, {"kkt_tol", svm->kkt_tol}};
    else if (const auto* nn = std::get_if<NeuralNetParams>(&s.params))
        p = {{"hidden_units", nn->hidden_units}, {"learning_rate", nn->learning_rate},
             {"beta1", nn->beta1}, {"beta2", nn->beta2}, {"batch_cap", nn->batch_cap},
             {"max_epochs", nn->max_epochs}, {"tol", nn->tol}, {"l2_alpha", nn->l2_alpha}};
    else if (const auto* dt = std::get_if<TreeParams>(&s.params))
        p = {{"min_samples_split", dt->min_samples_split}, {"min_samples_leaf", dt->min_samples_leaf}};
    return {{"family", family_name(s.family)}, {"seed", s.seed}, {"params", p}};
}

inline ModelSpec spec_from_json(const nlohmann::json& j) {
    ModelSpec s;
    s.family = family_from_name(j.at("family").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("params");
    switch (s.family) {
        case ModelFamily::LogisticRegression:
            s.params = LogRegParams{p.at("c"), p.at("tol"), p.at("max_iter")};
            break;
        case ModelFamily::SvmRbf:
            s.params = SvmParams{p.at("gamma"), p.at("c"), p.at("kkt_tol")};
            break;
        case ModelFamily::NeuralNet:
            s.params = NeuralNetParams{p.at("hidden_units"), p.at("learning_rate"), p.at("beta1"),
                                       p.at("beta2"),        p.at("batch_cap"),     p.at("max_epochs"),
                                       p.at("tol"),          p.at("l2_alpha")};
            break;
        case ModelFamily::DecisionTree:
            s.params = TreeParams{p.at("min_samples_split"), p.at("min_samples_leaf")};
            break;
    }
    s.validate();
    return s;
}

struct TrainingDiagnostics {
    int iterations = 0;
    double final_objective = 0.0;
    bool converged = false;
    std::string note;

    nlohmann::json to_json() const {
        return {{"iterations", iterations},
                {"final_objective", final_objective},
                {"converged", converged},
                {"note", note}};
    }
    static TrainingDiagnostics from_json(const nlohmann::json& j) {
        TrainingDiagnostics d;
        d.iterations = j.at("iterations").get<int>();
        d.final_objective = j.at("final_objective").get<double>();
        d.converged = j.at("converged").get<bool>();
        d.note = j.at("note").get<std::string>();
        return d;
    }
};

struct Prediction {
    std::vector<int> labels;
    std::vector<double> scores;
};

// One train/predict contract for all four families. Prediction is
// deterministic given the model; parameters serialize to a float64 blob
// described by meta_json().
class TrainedModel {
public:
    virtual ~TrainedModel() = default;
    virtual const ModelSpec& spec() const = 0;
    virtual const TrainingDiagnostics& diagnostics() const = 0;
    virtual std::size_t input_width() const = 0;
    virtual Prediction predict(const Matrix& rows) const = 0;
    virtual nlohmann::json meta_json() const = 0;
    virtual std::vector<double> param_blob() const = 0;

protected:
    void check_width(const Matrix& rows) const {
        require(rows.cols == input_width(), Errc::DimensionMismatch,
                "prediction rows have width " + std::to_string(rows.cols) + ", model expects " +
                    std::to_string(input_width()));
    }
};

}  // namespace adspeech
