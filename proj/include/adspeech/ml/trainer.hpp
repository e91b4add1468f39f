#pragma once

#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "adspeech/common/csv.hpp"
#include "adspeech/ml/logreg.hpp"
#include "adspeech/ml/model.hpp"
#include "adspeech/ml/neural.hpp"
#include "adspeech/ml/svm.hpp"
#include "adspeech/ml/tree.hpp"

namespace adspeech {

inline std::unique_ptr<TrainedModel> train(const ModelSpec& spec, const LabeledDataset& data) {
    data.validate();
    switch (spec.family) {
        case ModelFamily::LogisticRegression:
            return std::make_unique<LogRegModel>(LogRegModel::train(spec, data));
        case ModelFamily::SvmRbf:
            return std::make_unique<SvmModel>(SvmModel::train(spec, data));
        case ModelFamily::NeuralNet:
            return std::make_unique<NeuralNetModel>(NeuralNetModel::train(spec, data));
        case ModelFamily::DecisionTree:
            return std::make_unique<TreeModel>(TreeModel::train(spec, data));
    }
    raise(Errc::Internal, "unreachable model family");
}

// Model file layout: magic "ADSPKMDL1", little-endian u64 JSON length, the
// JSON metadata block (spec, layout_id, column names, diagnostics, blob
// length), then the float64 little-endian parameter blob.
inline constexpr char kModelMagic[] = "ADSPKMDL1";
inline constexpr std::size_t kModelMagicLen = 9;

inline void save_model(const std::string& path, const TrainedModel& model, nlohmann::json extra_meta) {
    nlohmann::json meta = {
        {"spec", spec_to_json(model.spec())},
        {"diagnostics", model.diagnostics().to_json()},
        {"model_meta", model.meta_json()},
    };
    for (auto& [key, value] : extra_meta.items()) meta[key] = value;
    const std::vector<double> blob = model.param_blob();
    meta["blob_len"] = blob.size();

    const std::string meta_str = meta.dump();
    AtomicFileWriter w(path);
    auto& out = w.stream();
    out.write(kModelMagic, kModelMagicLen);
    std::uint64_t len = meta_str.size();
    char len_le[8];
    for (int i = 0; i < 8; ++i) len_le[i] = static_cast<char>((len >> (8 * i)) & 0xFF);
    out.write(len_le, 8);
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    static_assert(sizeof(double) == 8);
    // Little-endian hosts write doubles directly (every target we build on).
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(double)));
    w.commit();
}

struct LoadedModel {
    std::unique_ptr<TrainedModel> model;
    nlohmann::json meta;  // full metadata block, including extra fields
};

inline LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::FileMissing, "model file not found: " + path);

    char magic[kModelMagicLen];
    in.read(magic, kModelMagicLen);
    require(in.gcount() == static_cast<std::streamsize>(kModelMagicLen) &&
                std::memcmp(magic, kModelMagic, kModelMagicLen) == 0,
            Errc::SchemaViolation, "not a model file (bad magic): " + path);

    char len_le[8];
    in.read(len_le, 8);
    require(in.gcount() == 8, Errc::SchemaViolation, "truncated model file: " + path);
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i)
        len |= static_cast<std::uint64_t>(static_cast<unsigned char>(len_le[i])) << (8 * i);

    std::string meta_str(len, '\0');
    in.read(meta_str.data(), static_cast<std::streamsize>(len));
    require(in.gcount() == static_cast<std::streamsize>(len), Errc::SchemaViolation,
            "truncated model metadata: " + path);
    nlohmann::json meta = nlohmann::json::parse(meta_str, nullptr, false);
    require(!meta.is_discarded(), Errc::SchemaViolation, "model metadata is not valid JSON: " + path);

    const auto blob_len = meta.at("blob_len").get<std::size_t>();
    std::vector<double> blob(blob_len);
    in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob_len * sizeof(double)));
    require(in.gcount() == static_cast<std::streamsize>(blob_len * sizeof(double)), Errc::SchemaViolation,
            "truncated model parameter blob: " + path);

    ModelSpec spec = spec_from_json(meta.at("spec"));
    TrainingDiagnostics diag = TrainingDiagnostics::from_json(meta.at("diagnostics"));
    const auto& mm = meta.at("model_meta");

    LoadedModel loaded;
    loaded.meta = meta;
    switch (spec.family) {
        case ModelFamily::LogisticRegression:
            loaded.model = std::make_unique<LogRegModel>(LogRegModel::from_blob(spec, diag, mm, blob));
            break;
        case ModelFamily::SvmRbf:
            loaded.model = std::make_unique<SvmModel>(SvmModel::from_blob(spec, diag, mm, blob));
            break;
        case ModelFamily::NeuralNet:
            loaded.model = std::make_unique<NeuralNetModel>(NeuralNetModel::from_blob(spec, diag, mm, blob));
            break;
        case ModelFamily::DecisionTree:
            loaded.model = std::make_unique<TreeModel>(TreeModel::from_blob(spec, diag, mm, blob));
            break;
    }
    return loaded;
}

}  // namespace adspeech
