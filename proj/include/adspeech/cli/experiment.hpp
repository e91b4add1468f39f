#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "adspeech/audio/resample.hpp"
#include "adspeech/audio/wav.hpp"
#include "adspeech/cli/config.hpp"
#include "adspeech/cli/manifest.hpp"
#include "adspeech/common/hash.hpp"
#include "adspeech/common/parallel.hpp"
#include "adspeech/dsp/features.hpp"
#include "adspeech/embed/onnx.hpp"
#include "adspeech/embed/precomputed.hpp"
#include "adspeech/eval/cv.hpp"
#include "adspeech/repr/fuse.hpp"

namespace adspeech {

struct StageStatus {
    std::string name;
    std::string artifact;
    bool cached = false;
};

namespace experiment_detail {

inline std::unique_ptr<EncoderBackend> open_backend(const ExperimentConfig& cfg) {
    require(!cfg.encoder.empty(), Errc::ConfigInvalid, "no encoder configured");
    if (cfg.encoder_is_stub()) return make_stub_backend(cfg.encoder.substr(5));
    return std::make_unique<onnx::OnnxEncoderBackend>(cfg.encoder);
}

inline AudioClip load_clip(const CorpusManifest& manifest, const ManifestRow& row) {
    const std::string path = manifest.resolve_path(row);
    if (!std::filesystem::exists(path))
        raise(Errc::FileMissing, "audio file for clip '" + row.id + "' not found: " + path);
    AudioClip clip = load_wav(path);
    clip.subject_id = row.subject;
    clip.label_ad = row.label_ad;
    if (clip.sample_rate_hz != kCanonicalRateHz) clip = resample(clip, kCanonicalRateHz);
    return clip;
}

}  // namespace experiment_detail

// Orchestrates the experiment stages with content-hash caching: a stage is
// skipped when its inputs hash to the value recorded at the last run and
// its artifact still exists (encoder inference dominates runtime, so
// re-running unchanged configs must be cheap). All artifacts are written
// atomically and stamped with the config hash and feature layout id.
class ExperimentRunner {
public:
    explicit ExperimentRunner(ExperimentConfig cfg, std::size_t workers_override = 0)
        : cfg_(std::move(cfg)) {
        validate_config(cfg_);
        if (workers_override > 0) cfg_.workers = workers_override;
        std::filesystem::create_directories(cfg_.output_dir);
        manifest_ = load_manifest(cfg_.corpus_manifest, /*require_labels=*/true);
        require(!manifest_.rows.empty(), Errc::ConfigInvalid, "corpus manifest is empty");
        for (const auto& row : manifest_.rows) {
            const std::string p = manifest_.resolve_path(row);
            require(std::filesystem::exists(p), Errc::ConfigInvalid,
                    "audio file for clip '" + row.id + "' does not exist: " + p);
        }
        load_registry();
    }

    const ExperimentConfig& config() const { return cfg_; }
    std::string path(const std::string& name) const {
        return (std::filesystem::path(cfg_.output_dir) / name).string();
    }

    // Full lifecycle: representation stages, cross-validation, final train,
    // then test predictions and the gap report when a test manifest exists.
    std::vector<StageStatus> run_all() {
        std::vector<StageStatus> statuses;
        if (cfg_.mode != ReprMode::Embed) statuses.push_back(run_features());
        if (cfg_.needs_embeddings()) statuses.push_back(run_embeddings());
        if (cfg_.mode == ReprMode::Combo) statuses.push_back(run_fuse());
        statuses.push_back(run_cv_stage());
        statuses.push_back(run_train());
        if (!cfg_.test_manifest.empty()) {
            statuses.push_back(run_predict());
            CorpusManifest test = load_manifest(cfg_.test_manifest, /*require_labels=*/false);
            bool labeled = !test.rows.empty();
            for (const auto& r : test.rows) labeled &= r.label_ad.has_value();
            if (labeled) statuses.push_back(run_gaps());
        }
        save_registry();
        return statuses;
    }

    StageStatus run_features() {
        const std::string artifact = path("features.csv");
        const std::string key = corpus_hash() + "|" + kFeatureLayoutId + "|features-v1";
        if (stage_cached("features", key, artifact)) return {"features", artifact, true};

        std::vector<FeatureRow> rows(manifest_.rows.size());
        parallel_for(manifest_.rows.size(), cfg_.workers, [&](std::size_t i) {
            const auto& mrow = manifest_.rows[i];
            const AudioClip clip = experiment_detail::load_clip(manifest_, mrow);
            rows[i] = {mrow.id, label_string(mrow.label_ad), extract_features(clip)};
        });
        write_feature_table(artifact, rows, artifact_comments());
        record_stage("features", key, artifact);
        return {"features", artifact, false};
    }

    StageStatus run_embeddings() {
        const std::string artifact = path("embeddings.csv");
        const std::string key = corpus_hash() + "|" + encoder_identity() + "|embeddings-v1";
        if (stage_cached("embeddings", key, artifact)) return {"embeddings", artifact, true};

        EmbeddingTable table;
        table.rows.resize(manifest_.rows.size());
        if (!cfg_.precomputed_embeddings.empty()) {
            const EmbeddingTable pre = load_precomputed(cfg_.precomputed_embeddings);
            for (std::size_t i = 0; i < manifest_.rows.size(); ++i) {
                const auto* emb = pre.find(manifest_.rows[i].id);
                require(emb != nullptr, Errc::SchemaViolation,
                        "precomputed embeddings missing clip '" + manifest_.rows[i].id + "'");
                table.rows[i] = {manifest_.rows[i].id, *emb};
            }
        } else {
            // One backend instance per worker thread; a backend handle
            // admits one in-flight inference.
            const std::size_t workers = std::min<std::size_t>(cfg_.workers, manifest_.rows.size());
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w]() {
                    try {
                        auto backend = experiment_detail::open_backend(cfg_);
                        for (std::size_t i = w; i < manifest_.rows.size(); i += workers) {
                            const AudioClip clip = experiment_detail::load_clip(manifest_, manifest_.rows[i]);
                            table.rows[i] = {manifest_.rows[i].id, extract_embedding(clip, *backend)};
                        }
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& t : pool) t.join();
            for (const auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        save_embedding_table(artifact, table, artifact_comments());
        record_stage("embeddings", key, artifact);
        return {"embeddings", artifact, false};
    }

    StageStatus run_fuse() {
        run_features();
        run_embeddings();
        const std::string artifact = path("fused.csv");
        const std::string key =
            hash_file_hex(path("features.csv")) + "|" + hash_file_hex(path("embeddings.csv")) + "|fuse-v1";
        if (stage_cached("fuse", key, artifact)) return {"fuse", artifact, true};

        const auto features = load_feature_table(path("features.csv"));
        const EmbeddingTable embeddings = load_precomputed(path("embeddings.csv"));
        std::vector<FusedRow> rows;
        for (const auto& frow : features) {
            const auto* emb = embeddings.find(frow.id);
            require(emb != nullptr, Errc::SchemaViolation, "no embedding for clip '" + frow.id + "'");
            FusedRow r;
            r.id = frow.id;
            r.label = frow.label;
            r.values = fuse(frow.id, frow.features, frow.id, *emb);
            rows.push_back(std::move(r));
        }
        write_fused_table(artifact, rows, artifact_comments());
        record_stage("fuse", key, artifact);
        return {"fuse", artifact, false};
    }

    StageStatus run_cv_stage() {
        const std::string rep = representation_artifact();
        const std::string artifact = path("cv_report.json");
        const std::string key = hash_file_hex(rep) + "|" + pipeline().to_json().dump() + "|" +
                                fold_scheme_name(cfg_.cv_scheme) + "|" + std::to_string(cfg_.seed) + "|cv-v1";
        if (stage_cached("cv", key, artifact)) return {"cv", artifact, true};

        const LabeledDataset ds = load_dataset();
        const FoldPlan plan = cfg_.cv_scheme == FoldScheme::Loso
                                  ? make_loso_folds(ds)
                                  : make_stratified_kfold(ds, cfg_.cv_k, cfg_.seed);
        const CvResult res = run_cv(ds, pipeline(), plan, cfg_.workers);
        write_json(artifact, res.to_json(artifact_stamp()));
        record_stage("cv", key, artifact);
        return {"cv", artifact, false};
    }

    StageStatus run_train() {
        const std::string rep = representation_artifact();
        const std::string artifact = path("model.bin");
        const std::string key =
            hash_file_hex(rep) + "|" + pipeline().to_json().dump() + "|train-v1";
        if (stage_cached("train", key, artifact)) return {"train", artifact, true};

        LabeledDataset ds = load_dataset();
        const PipelineSpec pipe = pipeline();
        nlohmann::json extra = artifact_stamp();
        extra["mode"] = repr_mode_name(cfg_.mode);
        extra["standardize"] = pipe.standardize;
        extra["encoder"] = cfg_.encoder;

        if (pipe.selector.enabled) {
            const ColumnSelector sel = select_top_k(ds, pipe.selector.k, kFeatureLayoutId);
            write_json(path("selector.json"), selector_to_json(sel));
            extra["selector_indices"] = sel.chosen_indices;
            ds = apply_selector(sel, ds);
        }
        if (pipe.standardize) {
            const Standardizer st = fit_standardizer(ds);
            extra["standardizer"] = {{"means", st.means}, {"scales", st.scales}};
            ds = standardize(st, ds);
        }
        extra["column_names"] = ds.column_names;

        const auto model = train(pipe.model, ds);
        save_model(artifact, *model, extra);
        record_stage("train", key, artifact);
        return {"train", artifact, false};
    }

    StageStatus run_predict() {
        require(!cfg_.test_manifest.empty(), Errc::ConfigInvalid, "predict needs a test_manifest");
        run_train();
        const std::string artifact = path("predictions.csv");
        const std::string key = hash_file_hex(path("model.bin")) + "|" +
                                hash_file_hex(cfg_.test_manifest) + "|" + encoder_identity() +
                                "|predict-v1";
        if (stage_cached("predict", key, artifact)) return {"predict", artifact, true};

        predict_batch(path("model.bin"), cfg_.test_manifest, artifact, cfg_);

        // Score against truth when the test manifest is labeled.
        const CorpusManifest test = load_manifest(cfg_.test_manifest, /*require_labels=*/false);
        bool labeled = !test.rows.empty();
        for (const auto& r : test.rows) labeled &= r.label_ad.has_value();
        if (labeled) {
            const CsvTable preds = read_csv(artifact);
            std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
            for (std::size_t i = 0; i < preds.rows.size(); ++i) {
                const bool truth = *test.rows[i].label_ad;
                const bool guess = preds.rows[i][1] == "ad";
                if (truth && guess) ++tp;
                else if (!truth && guess) ++fp;
                else if (truth && !guess) ++fn;
                else ++tn;
            }
            nlohmann::json tm = compute_metrics(tp, fp, fn, tn).to_json();
            const nlohmann::json stamp = artifact_stamp();
            for (const auto& [k, v] : stamp.items()) tm[k] = v;
            write_json(path("test_metrics.json"), tm);
        }
        record_stage("predict", key, artifact);
        return {"predict", artifact, false};
    }

    StageStatus run_gaps() {
        const std::string artifact = path("gap_report.json");
        const std::string key =
            hash_file_hex(path("test_metrics.json")) + "|" + hash_file_hex(path("cv_report.json")) + "|gaps-v1";
        if (stage_cached("gaps", key, artifact)) return {"gaps", artifact, true};

        const nlohmann::json test_metrics = read_json(path("test_metrics.json"));
        const nlohmann::json cv_rep = read_json(path("cv_report.json"));
        check_stamp(test_metrics, path("test_metrics.json"));
        check_stamp(cv_rep, path("cv_report.json"));

        const EvalMetrics a = metrics_from_json(test_metrics);
        const EvalMetrics b = metrics_from_json(cv_rep.at("aggregate"));
        nlohmann::json j = artifact_stamp();
        j["model"] = std::string(family_name(cfg_.model)) + "-" + repr_mode_name(cfg_.mode);
        j["a"] = "test";
        j["b"] = std::string("cv-") + fold_scheme_name(cfg_.cv_scheme);
        j["a_aggregation"] = aggregation_name(a.aggregation);
        j["b_aggregation"] = aggregation_name(b.aggregation);
        j["gaps"] = gap_report(a, b).to_json();
        write_json(artifact, j);
        record_stage("gaps", key, artifact);
        return {"gaps", artifact, false};
    }

    // Batch prediction from a persisted model. The model file carries its
    // preprocessing (mode, selector, standardizer) and the feature layout
    // id it was trained with; a layout mismatch against this build is a
    // hard error so feature-layout drift cannot pass silently.
    static void predict_batch(const std::string& model_path, const std::string& manifest_path,
                              const std::string& out_csv, const ExperimentConfig& cfg) {
        const LoadedModel loaded = load_model(model_path);
        const std::string mode_str = loaded.meta.value("mode", "feat");
        const ReprMode mode = repr_mode_from_name(mode_str);
        if (mode != ReprMode::Embed) {
            const std::string trained_layout = loaded.meta.value("layout_id", "");
            require(trained_layout == kFeatureLayoutId, Errc::LayoutMismatch,
                    "model was trained with feature layout '" + trained_layout +
                        "' but this build produces '" + kFeatureLayoutId + "'");
        }

        const CorpusManifest manifest = load_manifest(manifest_path, /*require_labels=*/false);
        std::unique_ptr<EncoderBackend> backend;
        std::optional<EmbeddingTable> precomputed;
        if (mode != ReprMode::Feat) {
            if (!cfg.precomputed_embeddings.empty())
                precomputed = load_precomputed(cfg.precomputed_embeddings);
            else backend = experiment_detail::open_backend(cfg);
        }

        Matrix rows(manifest.rows.size(),
                    mode == ReprMode::Feat ? kFeatureDim
                                           : (mode == ReprMode::Embed ? kEmbeddingDim : kFusedDim));
        for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
            std::vector<double> rep;
            if (mode == ReprMode::Feat || mode == ReprMode::Combo) {
                const AudioClip clip = experiment_detail::load_clip(manifest, manifest.rows[i]);
                const FeatureVector fv = extract_features(clip);
                rep.assign(fv.values.begin(), fv.values.end());
            }
            if (mode != ReprMode::Feat) {
                EmbeddingVector emb;
                if (precomputed) {
                    const auto* e = precomputed->find(manifest.rows[i].id);
                    require(e != nullptr, Errc::SchemaViolation,
                            "precomputed embeddings missing clip '" + manifest.rows[i].id + "'");
                    emb = *e;
                } else {
                    const AudioClip clip = experiment_detail::load_clip(manifest, manifest.rows[i]);
                    emb = extract_embedding(clip, *backend);
                }
                rep.insert(rep.end(), emb.values.begin(), emb.values.end());
            }
            std::copy(rep.begin(), rep.end(), rows.row(i));
        }

        // Apply the persisted preprocessing.
        Matrix projected = rows;
        if (loaded.meta.contains("selector_indices")) {
            const auto idx = loaded.meta.at("selector_indices").get<std::vector<std::size_t>>();
            projected = rows.select_columns(idx);
        }
        if (loaded.meta.contains("standardizer")) {
            Standardizer st;
            st.means = loaded.meta.at("standardizer").at("means").get<std::vector<double>>();
            st.scales = loaded.meta.at("standardizer").at("scales").get<std::vector<double>>();
            st.apply(projected);
        }

        AtomicFileWriter w(out_csv);
        auto& out = w.stream();
        out << "id,predicted_label,score\n";
        if (!manifest.rows.empty()) {
            const Prediction pred = loaded.model->predict(projected);
            for (std::size_t i = 0; i < manifest.rows.size(); ++i)
                out << manifest.rows[i].id << ',' << (pred.labels[i] == 1 ? "ad" : "cn") << ','
                    << format_double(pred.scores[i]) << '\n';
        }
        w.commit();
    }

    PipelineSpec pipeline() const {
        PipelineSpec p;
        p.selector.enabled = cfg_.selector_on();
        p.selector.k = cfg_.selector_k;
        p.standardize = cfg_.standardize;
        p.model = default_spec(cfg_.model, cfg_.seed);
        return p;
    }

    LabeledDataset load_dataset() {
        LabeledDataset ds;
        std::vector<std::string> ids;
        if (cfg_.mode == ReprMode::Feat) {
            const auto rows = load_feature_table(path("features.csv"));
            ds.matrix = Matrix(rows.size(), kFeatureDim);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                std::copy(rows[i].features.values.begin(), rows[i].features.values.end(), ds.matrix.row(i));
                ds.labels.push_back(rows[i].label == "ad" ? 1 : 0);
                ids.push_back(rows[i].id);
            }
            for (int c = 0; c < kFeatureDim; ++c) ds.column_names.push_back(feature_column_name(c));
        } else if (cfg_.mode == ReprMode::Embed) {
            const EmbeddingTable table = load_precomputed(path("embeddings.csv"));
            ds.matrix = Matrix(table.rows.size(), kEmbeddingDim);
            for (std::size_t i = 0; i < table.rows.size(); ++i) {
                std::copy(table.rows[i].second.values.begin(), table.rows[i].second.values.end(),
                          ds.matrix.row(i));
                ids.push_back(table.rows[i].first);
                const auto* mrow = find_manifest_row(table.rows[i].first);
                require(mrow != nullptr && mrow->label_ad.has_value(), Errc::SchemaViolation,
                        "no label for clip '" + table.rows[i].first + "'");
                ds.labels.push_back(*mrow->label_ad ? 1 : 0);
            }
            for (int c = 0; c < kEmbeddingDim; ++c) ds.column_names.push_back(embedding_column_name(c));
        } else {
            const auto rows = load_fused_table(path("fused.csv"));
            ds.matrix = Matrix(rows.size(), kFusedDim);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                std::copy(rows[i].values.begin(), rows[i].values.end(), ds.matrix.row(i));
                ds.labels.push_back(rows[i].label == "ad" ? 1 : 0);
                ids.push_back(rows[i].id);
            }
            for (int c = 0; c < kFeatureDim; ++c) ds.column_names.push_back(feature_column_name(c));
            for (int c = 0; c < kEmbeddingDim; ++c) ds.column_names.push_back(embedding_column_name(c));
        }
        for (const auto& id : ids) {
            const auto* mrow = find_manifest_row(id);
            require(mrow != nullptr, Errc::SchemaViolation, "clip '" + id + "' missing from manifest");
            ds.subject_ids.push_back(mrow->subject);
        }
        ds.validate();
        return ds;
    }

private:
    std::string representation_artifact() {
        switch (cfg_.mode) {
            case ReprMode::Feat: run_features(); return path("features.csv");
            case ReprMode::Embed: run_embeddings(); return path("embeddings.csv");
            case ReprMode::Combo: run_fuse(); return path("fused.csv");
        }
        raise(Errc::Internal, "unreachable mode");
    }

    const ManifestRow* find_manifest_row(const std::string& id) const {
        for (const auto& r : manifest_.rows)
            if (r.id == id) return &r;
        return nullptr;
    }

    std::string corpus_hash() {
        if (corpus_hash_.empty()) {
            Fnv1a64 h;
            for (const auto& row : manifest_.rows) {
                h.update(row.id).update(label_string(row.label_ad)).update(row.subject);
                h.update(hash_file_hex(manifest_.resolve_path(row)));
            }
            corpus_hash_ = h.hex();
        }
        return corpus_hash_;
    }

    std::string encoder_identity() const {
        if (!cfg_.precomputed_embeddings.empty())
            return "precomputed:" + hash_file_hex(cfg_.precomputed_embeddings);
        if (cfg_.encoder.empty()) return "none";
        if (cfg_.encoder_is_stub()) return cfg_.encoder;
        return "onnx:" + hash_file_hex(cfg_.encoder);
    }

    std::vector<std::string> artifact_comments() const {
        return {"# config_hash=" + cfg_.config_hash() + " layout_id=" + kFeatureLayoutId};
    }

    nlohmann::json artifact_stamp() const {
        return {{"config_hash", cfg_.config_hash()}, {"layout_id", kFeatureLayoutId}};
    }

    void check_stamp(const nlohmann::json& j, const std::string& origin) const {
        require(j.value("config_hash", "") == cfg_.config_hash(), Errc::SchemaViolation,
                "artifact " + origin + " was produced under a different config; refusing to merge");
    }

    static EvalMetrics metrics_from_json(const nlohmann::json& j) {
        EvalMetrics m;
        m.tp = j.at("tp").get<std::int64_t>();
        m.fp = j.at("fp").get<std::int64_t>();
        m.fn = j.at("fn").get<std::int64_t>();
        m.tn = j.at("tn").get<std::int64_t>();
        m.accuracy = j.at("accuracy").get<double>();
        m.precision = j.at("precision").get<double>();
        m.recall = j.at("recall").get<double>();
        m.specificity = j.at("specificity").get<double>();
        m.f1 = j.at("f1").get<double>();
        m.aggregation =
            j.at("aggregation").get<std::string>() == "pooled" ? Aggregation::Pooled : Aggregation::MeanOfFolds;
        return m;
    }

    static void write_json(const std::string& p, const nlohmann::json& j) {
        AtomicFileWriter w(p);
        w.stream() << j.dump(2) << '\n';
        w.commit();
    }

    static nlohmann::json read_json(const std::string& p) {
        std::ifstream in(p);
        if (!in) raise(Errc::FileMissing, "cannot open JSON artifact: " + p);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        require(!j.is_discarded(), Errc::SchemaViolation, "artifact is not valid JSON: " + p);
        return j;
    }

    void load_registry() {
        const std::string p = path("stages.json");
        if (std::filesystem::exists(p)) registry_ = read_json(p);
        else registry_ = nlohmann::json::object();
    }

    void save_registry() { write_json(path("stages.json"), registry_); }

    bool stage_cached(const std::string& stage, const std::string& key, const std::string& artifact) {
        return registry_.contains(stage) && registry_[stage].value("key", "") == key &&
               std::filesystem::exists(artifact);
    }

    void record_stage(const std::string& stage, const std::string& key, const std::string& artifact) {
        registry_[stage] = {{"key", key}, {"artifact", artifact}, {"config_hash", cfg_.config_hash()}};
        save_registry();
    }

    ExperimentConfig cfg_;
    CorpusManifest manifest_;
    nlohmann::json registry_;
    std::string corpus_hash_;
};

}  // namespace adspeech
