#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "adspeech/common/error.hpp"
#include "adspeech/common/hash.hpp"
#include "adspeech/eval/folds.hpp"
#include "adspeech/ml/model.hpp"

namespace adspeech {

enum class ReprMode { Feat, Embed, Combo };

inline const char* repr_mode_name(ReprMode m) {
    switch (m) {
        case ReprMode::Feat: return "feat";
        case ReprMode::Embed: return "embed";
        case ReprMode::Combo: return "combo";
    }
    return "unknown";
}

inline ReprMode repr_mode_from_name(const std::string& s) {
    if (s == "feat") return ReprMode::Feat;
    if (s == "embed") return ReprMode::Embed;
    if (s == "combo") return ReprMode::Combo;
    raise(Errc::ConfigInvalid, "mode must be feat, embed, or combo; got '" + s + "'");
}

// Experiment configuration, read from a JSON file. The selector defaults to
// on for the conventional-features mode only; embedding and fused modes use
// every column unless explicitly overridden.
struct ExperimentConfig {
    std::string corpus_manifest;
    std::string output_dir;
    ReprMode mode = ReprMode::Feat;
    ModelFamily model = ModelFamily::LogisticRegression;
    std::optional<bool> selector_enabled;  // unset -> mode == feat
    int selector_k = 10;
    bool standardize = false;
    FoldScheme cv_scheme = FoldScheme::Loso;
    int cv_k = 10;
    std::uint64_t seed = 0;
    std::string encoder;  // "stub:<name>" or a path to an ONNX encoder
    std::string precomputed_embeddings;
    std::string test_manifest;
    std::size_t workers = 1;

    bool selector_on() const { return selector_enabled.value_or(mode == ReprMode::Feat); }
    bool needs_embeddings() const { return mode != ReprMode::Feat; }
    bool encoder_is_stub() const { return encoder.rfind("stub:", 0) == 0; }

    nlohmann::json to_json() const {
        nlohmann::json j = {
            {"corpus_manifest", corpus_manifest},
            {"output_dir", output_dir},
            {"mode", repr_mode_name(mode)},
            {"model", family_name(model)},
            {"selector", {{"k", selector_k}}},
            {"standardize", standardize},
            {"cv",
             {{"scheme", cv_scheme == FoldScheme::Loso ? "loso" : "stratified-k"},
              {"k", cv_k},
              {"seed", seed}}},
            {"workers", workers},
        };
        if (selector_enabled.has_value()) j["selector"]["enabled"] = *selector_enabled;
        if (!encoder.empty()) j["encoder"] = encoder;
        if (!precomputed_embeddings.empty()) j["precomputed_embeddings"] = precomputed_embeddings;
        if (!test_manifest.empty()) j["test_manifest"] = test_manifest;
        return j;
    }

    // Fingerprint of everything that affects results, for artifact stamps.
    std::string config_hash() const { return hash_bytes_hex(to_json().dump()); }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& origin) {
    ExperimentConfig c;
    try {
        c.corpus_manifest = j.at("corpus_manifest").get<std::string>();
        c.output_dir = j.at("output_dir").get<std::string>();
        c.mode = repr_mode_from_name(j.at("mode").get<std::string>());
        c.model = family_from_name(j.at("model").get<std::string>());
        if (j.contains("selector")) {
            const auto& s = j.at("selector");
            if (s.contains("enabled")) c.selector_enabled = s.at("enabled").get<bool>();
            if (s.contains("k")) c.selector_k = s.at("k").get<int>();
        }
        if (j.contains("standardize")) c.standardize = j.at("standardize").get<bool>();
        if (j.contains("cv")) {
            const auto& cv = j.at("cv");
            if (cv.contains("scheme")) {
                const auto s = cv.at("scheme").get<std::string>();
                if (s == "loso") c.cv_scheme = FoldScheme::Loso;
                else if (s == "stratified-k" || s == "stratified10" || s == "kfold")
                    c.cv_scheme = FoldScheme::StratifiedK;
                else raise(Errc::ConfigInvalid, "cv.scheme must be 'loso' or 'stratified-k'");
            }
            if (cv.contains("k")) c.cv_k = cv.at("k").get<int>();
            if (cv.contains("seed")) c.seed = cv.at("seed").get<std::uint64_t>();
        }
        if (j.contains("encoder")) c.encoder = j.at("encoder").get<std::string>();
        if (j.contains("precomputed_embeddings"))
            c.precomputed_embeddings = j.at("precomputed_embeddings").get<std::string>();
        if (j.contains("test_manifest")) c.test_manifest = j.at("test_manifest").get<std::string>();
        if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::ConfigInvalid, "config " + origin + ": " + e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::FileMissing, "config file not found: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    require(!j.is_discarded(), Errc::ConfigInvalid, "config is not valid JSON: " + path);
    ExperimentConfig c = config_from_json(j, path);
    // Relative paths resolve against the config file's directory.
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && !std::filesystem::path(p).is_absolute())
            p = (base / p).string();
    };
    resolve(c.corpus_manifest);
    resolve(c.output_dir);
    resolve(c.test_manifest);
    resolve(c.precomputed_embeddings);
    if (!c.encoder.empty() && !c.encoder_is_stub()) resolve(c.encoder);
    return c;
}

// Structural validation; referenced paths must exist.
inline void validate_config(const ExperimentConfig& c) {
    require(!c.corpus_manifest.empty(), Errc::ConfigInvalid, "corpus_manifest is required");
    require(std::filesystem::exists(c.corpus_manifest), Errc::ConfigInvalid,
            "corpus_manifest does not exist: " + c.corpus_manifest);
    require(!c.output_dir.empty(), Errc::ConfigInvalid, "output_dir is required");
    require(c.selector_k >= 1, Errc::ConfigInvalid, "selector.k must be >= 1");
    require(c.workers >= 1, Errc::ConfigInvalid, "workers must be >= 1");
    require(c.cv_k >= 2, Errc::ConfigInvalid, "cv.k must be >= 2");
    if (c.needs_embeddings()) {
        require(!c.encoder.empty() || !c.precomputed_embeddings.empty(), Errc::ConfigInvalid,
                "mode '" + std::string(repr_mode_name(c.mode)) +
                    "' requires an encoder or precomputed_embeddings");
        if (!c.encoder.empty() && !c.encoder_is_stub())
            require(std::filesystem::exists(c.encoder), Errc::ConfigInvalid,
                    "encoder does not exist: " + c.encoder);
        if (!c.precomputed_embeddings.empty())
            require(std::filesystem::exists(c.precomputed_embeddings), Errc::ConfigInvalid,
                    "precomputed_embeddings does not exist: " + c.precomputed_embeddings);
    }
    if (!c.test_manifest.empty())
        require(std::filesystem::exists(c.test_manifest), Errc::ConfigInvalid,
                "test_manifest does not exist: " + c.test_manifest);
}

}  // namespace adspeech
