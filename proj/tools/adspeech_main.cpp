// Command-line front end for the speech screening pipeline. Subcommands run
// single stages or the full experiment lifecycle from a JSON config.
//
// Exit codes: 0 success, 2 validation error, 3 runtime failure.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adspeech/adspeech.hpp"

namespace {

using namespace adspeech;

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::ConfigInvalid:
        case Errc::SchemaViolation:
        case Errc::InvalidArgument:
        case Errc::LayoutMismatch:
        case Errc::FileMissing:
            return 2;
        default:
            return 3;
    }
}

void print_error_json(const std::string& code, const std::string& message) {
    nlohmann::json j = {{"error", {{"code", code}, {"message", message}}}};
    std::cerr << j.dump() << std::endl;
}

void print_status(const StageStatus& s) {
    std::cout << (s.cached ? "[cached]  " : "[computed] ") << s.name << " -> " << s.artifact << '\n';
}

struct GlobalArgs {
    std::string config_path;
    std::size_t workers = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
};

ExperimentConfig load_effective_config(const GlobalArgs& g) {
    if (g.config_path.empty()) raise(Errc::ConfigInvalid, "--config is required for this subcommand");
    ExperimentConfig cfg = load_config(g.config_path);
    if (g.workers > 0) cfg.workers = g.workers;
    if (g.seed_set) cfg.seed = g.seed;
    if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
    return cfg;
}

EvalMetrics metrics_from_report(const nlohmann::json& j, const std::string& origin) {
    const nlohmann::json& m = j.contains("aggregate") ? j.at("aggregate") : j;
    EvalMetrics out;
    try {
        out.tp = m.value("tp", 0);
        out.fp = m.value("fp", 0);
        out.fn = m.value("fn", 0);
        out.tn = m.value("tn", 0);
        out.accuracy = m.at("accuracy").get<double>();
        out.precision = m.at("precision").get<double>();
        out.recall = m.at("recall").get<double>();
        out.specificity = m.value("specificity", 0.0);
        out.f1 = m.at("f1").get<double>();
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::SchemaViolation, "report " + origin + " lacks the metric suite: " + e.what());
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speech-based screening pipeline: acoustic features, encoder "
                 "embeddings, fusion, classifiers, and cross-validation"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs g;
    app.add_option("--config", g.config_path, "Experiment config JSON");
    app.add_option("--workers", g.workers, "Worker count override");
    auto* seed_opt = app.add_option("--seed", g.seed, "Seed override");
    app.add_option("--out", g.out_dir, "Output directory override");

    auto* cmd_run = app.add_subcommand("run", "Run the full experiment lifecycle");
    auto* cmd_features = app.add_subcommand("extract-features", "Write the 168-column feature table");
    auto* cmd_embed = app.add_subcommand("extract-embeddings", "Write the 768-column embedding table");
    auto* cmd_fuse = app.add_subcommand("fuse", "Concatenate features and embeddings (936 columns)");
    auto* cmd_cv = app.add_subcommand("cv", "Cross-validate the configured pipeline");
    auto* cmd_train = app.add_subcommand("train", "Train the final model on the complete train set");

    auto* cmd_predict = app.add_subcommand("predict", "Predict a manifest with a trained model");
    std::string predict_model, predict_manifest, predict_out;
    cmd_predict->add_option("--model", predict_model, "Model file (defaults to <out>/model.bin)");
    cmd_predict->add_option("--manifest", predict_manifest, "Manifest to predict (defaults to test_manifest)");
    cmd_predict->add_option("--predictions", predict_out, "Output CSV (defaults to <out>/predictions.csv)");

    auto* cmd_gaps = app.add_subcommand("report-gaps", "Per-metric percentage-point gaps between two reports");
    std::string gaps_a, gaps_b, gaps_out, gaps_label_a = "a", gaps_label_b = "b";
    cmd_gaps->add_option("--a", gaps_a, "First report JSON (test metrics or CV report)")->required();
    cmd_gaps->add_option("--b", gaps_b, "Second report JSON")->required();
    cmd_gaps->add_option("--gaps-out", gaps_out, "Output JSON (defaults to stdout)");
    cmd_gaps->add_option("--label-a", gaps_label_a, "Name for the first source");
    cmd_gaps->add_option("--label-b", gaps_label_b, "Name for the second source");

    auto* cmd_synth = app.add_subcommand("gen-synthetic", "Generate the bundled synthetic corpus");
    std::string synth_dir = "synthetic-corpus";
    int synth_clips = 20;
    cmd_synth->add_option("--dir", synth_dir, "Corpus directory");
    cmd_synth->add_option("--clips", synth_clips, "Number of clips");

    auto* cmd_rank = app.add_subcommand(
        "rank-models", "Order models by cross-validated accuracy (descending, ties by name)");
    std::vector<std::string> rank_entries, rank_reports;
    std::size_t rank_top = 5;
    std::string rank_override, rank_out;
    cmd_rank->add_option("--entry", rank_entries, "name=accuracy pair (repeatable)");
    cmd_rank->add_option("--report", rank_reports, "name=cv_report.json pair (repeatable)");
    cmd_rank->add_option("--top", rank_top, "How many models to keep");
    cmd_rank->add_option("--override", rank_override,
                         "Comma-separated names selected manually instead of by rank");
    cmd_rank->add_option("--rank-out", rank_out, "Output JSON (defaults to stdout)");

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        if (cmd_synth->parsed()) {
            SyntheticSpec spec;
            spec.n_clips = synth_clips;
            if (g.seed_set) spec.seed = g.seed;
            const std::string dir = g.out_dir.empty() ? synth_dir : g.out_dir;
            const CorpusManifest m = gen_synthetic_corpus(dir, spec);
            std::cout << "[computed] gen-synthetic -> " << dir << "/manifest.csv (" << m.rows.size()
                      << " clips)\n";
            return 0;
        }
        if (cmd_rank->parsed()) {
            std::vector<std::pair<std::string, double>> results;
            auto split_pair = [](const std::string& s) {
                const auto eq = s.find('=');
                require(eq != std::string::npos && eq > 0 && eq + 1 < s.size(), Errc::InvalidArgument,
                        "expected name=value, got '" + s + "'");
                return std::pair<std::string, std::string>(s.substr(0, eq), s.substr(eq + 1));
            };
            for (const auto& e : rank_entries) {
                const auto [name, value] = split_pair(e);
                results.emplace_back(name, parse_double(value, "--entry " + name));
            }
            for (const auto& r : rank_reports) {
                const auto [name, path] = split_pair(r);
                std::ifstream in(path);
                if (!in) raise(Errc::FileMissing, "cannot open report: " + path);
                nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
                require(!j.is_discarded(), Errc::SchemaViolation, "report is not valid JSON: " + path);
                results.emplace_back(name, metrics_from_report(j, path).accuracy);
            }
            require(!results.empty(), Errc::InvalidArgument, "rank-models needs --entry or --report pairs");

            nlohmann::json out;
            nlohmann::json rows = nlohmann::json::array();
            if (!rank_override.empty()) {
                // Explicit submission list; accuracies reported, rank rule bypassed.
                out["rule"] = "manual-override";
                std::stringstream ss(rank_override);
                std::string name;
                while (std::getline(ss, name, ',')) {
                    bool found = false;
                    for (const auto& [n, acc] : results)
                        if (n == name) {
                            rows.push_back({{"name", n}, {"accuracy", acc}});
                            found = true;
                        }
                    require(found, Errc::InvalidArgument, "override names unknown model '" + name + "'");
                }
            } else {
                out["rule"] = "accuracy-desc-ties-by-name";
                for (const auto& [n, acc] : rank_models(results, std::min(rank_top, results.size())))
                    rows.push_back({{"name", n}, {"accuracy", acc}});
            }
            out["ranked"] = rows;
            if (rank_out.empty()) {
                std::cout << out.dump(2) << '\n';
            } else {
                AtomicFileWriter w(rank_out);
                w.stream() << out.dump(2) << '\n';
                w.commit();
                std::cout << "[computed] rank-models -> " << rank_out << '\n';
            }
            return 0;
        }
        if (cmd_gaps->parsed()) {
            std::ifstream ina(gaps_a), inb(gaps_b);
            if (!ina) raise(Errc::FileMissing, "cannot open report: " + gaps_a);
            if (!inb) raise(Errc::FileMissing, "cannot open report: " + gaps_b);
            nlohmann::json ja = nlohmann::json::parse(ina, nullptr, false);
            nlohmann::json jb = nlohmann::json::parse(inb, nullptr, false);
            require(!ja.is_discarded() && !jb.is_discarded(), Errc::SchemaViolation,
                    "gap inputs must be valid JSON");
            const std::string ha = ja.value("config_hash", ""), hb = jb.value("config_hash", "");
            require(ha.empty() || hb.empty() || ha == hb, Errc::SchemaViolation,
                    "refusing to compare reports with different config hashes");
            const GapReport gr = gap_report(metrics_from_report(ja, gaps_a), metrics_from_report(jb, gaps_b));
            nlohmann::json out = {{"a", gaps_label_a}, {"b", gaps_label_b}, {"gaps", gr.to_json()}};
            // Aggregation modes are recorded so a pooled-vs-mean-of-folds
            // comparison is explicit, never silent.
            auto agg_of = [](const nlohmann::json& j) -> std::string {
                if (j.contains("aggregate")) return j.at("aggregate").value("aggregation", "unknown");
                return j.value("aggregation", "unknown");
            };
            out["a_aggregation"] = agg_of(ja);
            out["b_aggregation"] = agg_of(jb);
            if (!ha.empty()) out["config_hash"] = ha;
            if (gaps_out.empty()) {
                std::cout << out.dump(2) << '\n';
            } else {
                AtomicFileWriter w(gaps_out);
                w.stream() << out.dump(2) << '\n';
                w.commit();
                std::cout << "[computed] report-gaps -> " << gaps_out << '\n';
            }
            return 0;
        }

        ExperimentConfig cfg = load_effective_config(g);
        ExperimentRunner runner(std::move(cfg));

        if (cmd_run->parsed()) {
            for (const auto& s : runner.run_all()) print_status(s);
        } else if (cmd_features->parsed()) {
            print_status(runner.run_features());
        } else if (cmd_embed->parsed()) {
            print_status(runner.run_embeddings());
        } else if (cmd_fuse->parsed()) {
            print_status(runner.run_fuse());
        } else if (cmd_cv->parsed()) {
            print_status(runner.run_cv_stage());
        } else if (cmd_train->parsed()) {
            print_status(runner.run_train());
        } else if (cmd_predict->parsed()) {
            const std::string model = predict_model.empty() ? runner.path("model.bin") : predict_model;
            const std::string manifest =
                predict_manifest.empty() ? runner.config().test_manifest : predict_manifest;
            require(!manifest.empty(), Errc::ConfigInvalid,
                    "predict needs --manifest or test_manifest in the config");
            const std::string out = predict_out.empty() ? runner.path("predictions.csv") : predict_out;
            ExperimentRunner::predict_batch(model, manifest, out, runner.config());
            std::cout << "[computed] predict -> " << out << '\n';
        }
        return 0;
    } catch (const Error& e) {
        print_error_json(errc_name(e.code()), e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        print_error_json("internal", e.what());
        return 3;
    }
}
