// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Each criterion carries its runtime budget; tolerances are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "adspeech/adspeech.hpp"
#include "mfcc_reference.hpp"

using namespace adspeech;
namespace fs = std::filesystem;

namespace {

struct Failure {
    std::string detail;
};

void expect(bool cond, const std::string& detail) {
    if (!cond) throw Failure{detail};
}

struct Harness {
    int failures = 0;

    void criterion(int number, const std::string& name, double budget_s,
                   const std::function<void()>& body) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            body();
        } catch (const Failure& f) {
            ok = false;
            detail = f.detail;
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && budget_s > 0.0 && elapsed > budget_s) {
            ok = false;
            detail = "runtime " + std::to_string(elapsed) + " s exceeds budget " +
                     std::to_string(budget_s) + " s";
        }
        std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
                    elapsed, detail.empty() ? "" : " — ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

AudioClip clip16(std::vector<double> samples) {
    AudioClip c;
    c.samples = std::move(samples);
    c.sample_rate_hz = kCanonicalRateHz;
    return c;
}

std::vector<double> sine(double hz, double amp, double seconds) {
    std::vector<double> x(static_cast<std::size_t>(kCanonicalRateHz * seconds));
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kCanonicalRateHz);
    return x;
}

void check_metrics_row(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn, double acc,
                       double prec, double rec, double f1) {
    const EvalMetrics m = compute_metrics(tp, fp, fn, tn);
    expect(std::abs(m.accuracy - acc) < 5e-5, "accuracy " + format_double(m.accuracy));
    expect(std::abs(m.precision - prec) < 5e-5, "precision " + format_double(m.precision));
    expect(std::abs(m.recall - rec) < 5e-5, "recall " + format_double(m.recall));
    expect(std::abs(m.f1 - f1) < 5e-5, "f1 " + format_double(m.f1));
}

}  // namespace

int main() {
    Harness h;
    const fs::path work = fs::temp_directory_path() / "adspeech_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    // 1. Metric reconstruction of the published test-set rows.
    h.criterion(1, "metric reconstruction of published confusion matrices", 1.0, [&] {
        check_metrics_row(11, 1, 24, 35, 0.6479, 0.9167, 0.3143, 0.4681);
        check_metrics_row(28, 16, 7, 20, 0.6761, 0.6364, 0.8000, 0.7089);
    });

    // 2. Gap-table arithmetic.
    h.criterion(2, "gap tables and baseline delta", 1.0, [&] {
        auto acc_metrics = [](double a) {
            EvalMetrics m;
            m.accuracy = a;
            return m;
        };
        const double spots[4][3] = {
            {0.6479, 0.6265, 2.14},   // test vs 10-fold
            {0.6479, 0.6566, -0.87},  // test vs LOSO
            {0.6386, 0.6084, 3.02},   // LOSO vs 10-fold
            {0.5843, 0.5964, -1.21},  // LOSO vs 10-fold
        };
        for (const auto& s : spots) {
            const GapReport g = gap_report(acc_metrics(s[0]), acc_metrics(s[1]));
            expect(std::abs(g.accuracy_pp - s[2]) < 0.005,
                   "gap " + format_double(g.accuracy_pp) + " vs " + format_double(s[2]));
        }
        expect(std::abs(baseline_delta(0.6761, 0.6479) - 2.82) < 1e-9, "baseline delta");
    });

    // 3. DSP oracles.
    h.criterion(3, "DSP oracles: jitter/shimmer closed forms, MFCC reference, pitch", 10.0, [&] {
        PitchTrack alt_t;
        for (int i = 0; i < 1000; ++i) {
            alt_t.periods.push_back(i % 2 == 0 ? 0.0050 : 0.0051);
            alt_t.peak_amplitudes.push_back(i % 2 == 0 ? 1.0 : 1.1);
        }
        const JitterMeasures j = jitter_measures(alt_t);
        const double local_expect = 100.0 * 0.1 / 5.05;              // 1.9802%
        const double rap_expect = 100.0 * (0.1 * 2.0 / 3.0) / 5.05;  // 1.3201%
        expect(std::abs(j.local_pct - local_expect) <= 1e-6 * local_expect, "jitter local");
        expect(std::abs(j.rap_pct - rap_expect) <= 1e-6 * rap_expect, "jitter RAP");

        const ShimmerMeasures s = shimmer_measures(alt_t);
        const double shim_expect = 100.0 * 0.1 / 1.05;            // 9.5238%
        const double db_expect = 20.0 * std::log10(1.1);          // 0.8279 dB
        expect(std::abs(s.local_pct - shim_expect) <= 1e-6 * shim_expect, "shimmer local");
        expect(std::abs(s.db - db_expect) <= 1e-6 * db_expect, "shimmer dB");

        const FrameSeries frames = frame(clip16(sine(440.0, 0.5, 1.0)), 25.0, 10.0);
        const Matrix m = mfcc_matrix(frames);
        for (std::size_t i = 0; i < frames.count(); i += 7) {
            std::vector<double> fr(frames.frames.row(i), frames.frames.row(i) + frames.frame_len);
            const auto ref = mfcc_reference::frame_mfcc(fr, kCanonicalRateHz);
            for (std::size_t c = 0; c < 13; ++c)
                expect(std::abs(m.at(i, c) - ref[c]) <= 1e-3 * std::max(std::abs(ref[c]), 1e-4),
                       "mfcc frame " + std::to_string(i) + " coeff " + std::to_string(c));
        }

        const PitchTrack t = track_pitch(clip16(sine(200.0, 0.5, 2.0)));
        expect(!t.periods.empty(), "pitch cycles found");
        double mean_f0 = 0.0;
        for (double p : t.periods) mean_f0 += 1.0 / p;
        mean_f0 /= static_cast<double>(t.periods.size());
        expect(std::abs(mean_f0 - 200.0) <= 1.0, "pitch " + format_double(mean_f0));
    });

    // 4. Feature contract over the full fixture set.
    h.criterion(4, "feature contract: 168 finite, deterministic, pathology-safe", 30.0, [&] {
        const CorpusManifest corpus = gen_synthetic_corpus((work / "corpus4").string());
        std::vector<AudioClip> fixtures;
        for (const auto& row : corpus.rows) {
            AudioClip c = load_wav(corpus.resolve_path(row));
            fixtures.push_back(std::move(c));
        }
        fixtures.push_back(clip16(std::vector<double>(32000, 0.0)));  // silence
        std::vector<double> impulse(16000, 0.0);
        impulse[8000] = 1.0;
        fixtures.push_back(clip16(impulse));  // impulse
        std::vector<double> clipped(16000);
        for (std::size_t i = 0; i < clipped.size(); ++i) clipped[i] = ((i / 40) % 2) ? 1.0 : -1.0;
        fixtures.push_back(clip16(clipped));  // clipping

        for (const auto& c : fixtures) {
            const FeatureVector a = extract_features(c);
            const FeatureVector b = extract_features(c);
            expect(a.values.size() == 168, "feature count");
            for (std::size_t i = 0; i < a.values.size(); ++i) {
                expect(std::isfinite(a.values[i]), "finite feature " + std::to_string(i));
                expect(a.values[i] == b.values[i], "bit-identical feature " + std::to_string(i));
            }
        }
    });

    // 5. Embedding pooling and the chunker.
    h.criterion(5, "embedding pooling equals brute force; chunker split", 10.0, [&] {
        SplitMix64 rng(404);
        std::vector<double> x(700000);
        for (auto& v : x) v = rng.next_double(-1.0, 1.0);
        const auto chunks = chunk_waveform(x);
        expect(chunks.size() == 3 && chunks[0].size() == 320000 && chunks[1].size() == 320000 &&
                   chunks[2].size() == 60000,
               "chunk sizes");

        StubMixBackend backend;
        std::vector<double> aligned(x.begin(), x.begin() + 640000);  // two equal chunks
        const auto equal_chunks = chunk_waveform(aligned);
        const EmbeddingVector pooled = encode_chunks(equal_chunks, backend);
        const Matrix full = backend.encode(std::span<const double>(aligned));
        for (std::size_t d = 0; d < kEmbeddingDim; ++d) {
            double mean = 0.0;
            for (std::size_t t = 0; t < full.rows; ++t) mean += full.at(t, d);
            mean /= static_cast<double>(full.rows);
            expect(std::abs(pooled.values[d] - mean) <= 1e-12, "equal-chunk pooling dim " + std::to_string(d));
        }

        // Unequal chunks follow the unweighted chunk-mean formula.
        StubSampleMeanBackend mean_backend;
        const auto uneven = chunk_waveform(x);  // 320000/320000/60000
        const EmbeddingVector pooled_uneven = encode_chunks(uneven, mean_backend);
        double expected = 0.0;
        for (const auto& c : uneven) {
            double m = 0.0;
            for (double v : c) m += v;
            expected += m / static_cast<double>(c.size());
        }
        expected /= static_cast<double>(uneven.size());
        for (std::size_t d = 0; d < kEmbeddingDim; ++d)
            expect(std::abs(pooled_uneven.values[d] - expected) <= 1e-12,
                   "unweighted chunk mean dim " + std::to_string(d));
    });

    // 6. Classifier numerics.
    h.criterion(6, "classifier numerics: NN gradients, SVM KKT, LR convergence, DT purity", 60.0, [&] {
        SplitMix64 rng(31337);
        LabeledDataset tiny;
        tiny.matrix = Matrix(16, 8);
        for (std::size_t r = 0; r < 16; ++r) {
            tiny.labels.push_back(static_cast<int>(r % 2));
            tiny.subject_ids.push_back("s" + std::to_string(r));
            for (std::size_t c = 0; c < 8; ++c) tiny.matrix.at(r, c) = rng.next_gaussian();
        }
        for (std::size_t c = 0; c < 8; ++c) tiny.column_names.push_back("f" + std::to_string(c));
        const double max_rel = gradient_check(default_spec(ModelFamily::NeuralNet, 6), tiny);
        expect(max_rel < 1e-5, "gradient check " + format_double(max_rel));

        // RBF XOR with gamma 1, C 1.
        LabeledDataset xd;
        xd.matrix = Matrix(4, 2);
        const double xs[4][2] = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
        for (std::size_t r = 0; r < 4; ++r) {
            xd.matrix.at(r, 0) = xs[r][0];
            xd.matrix.at(r, 1) = xs[r][1];
            xd.labels.push_back(r < 2 ? 1 : 0);
            xd.subject_ids.push_back("x" + std::to_string(r));
        }
        xd.column_names = {"a", "b"};
        ModelSpec svm_spec = default_spec(ModelFamily::SvmRbf, 4);
        std::get<SvmParams>(svm_spec.params).gamma = 1.0;
        const auto svm = SvmModel::train(svm_spec, xd);
        const Prediction sp = svm.predict(xd.matrix);
        for (std::size_t r = 0; r < 4; ++r) expect(sp.labels[r] == xd.labels[r], "XOR accuracy");
        const std::vector<double> y = {1.0, 1.0, -1.0, -1.0};
        const auto dual = SvmModel::solve_dual(xd.matrix, y, 1.0, 1.0, 1e-3);
        double ay = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            expect(dual.alpha[i] >= -1e-12 && dual.alpha[i] <= 1.0 + 1e-12, "alpha bounds");
            ay += dual.alpha[i] * y[i];
        }
        expect(std::abs(ay) <= 1e-8, "sum alpha_i y_i = " + format_double(ay));

        // LR gradient infinity norm at convergence.
        SplitMix64 lr_rng(88);
        LabeledDataset blobs;
        blobs.matrix = Matrix(60, 3);
        for (std::size_t r = 0; r < 60; ++r) {
            const int label = r < 30 ? 0 : 1;
            blobs.labels.push_back(label);
            blobs.subject_ids.push_back("b" + std::to_string(r));
            for (std::size_t c = 0; c < 3; ++c)
                blobs.matrix.at(r, c) = lr_rng.next_gaussian() + 2.0 * label;
        }
        blobs.column_names = {"a", "b", "c"};
        const auto lr = LogRegModel::train(default_spec(ModelFamily::LogisticRegression, 5), blobs);
        expect(lr.diagnostics().converged, "LR convergence flag");
        const auto w = lr.param_blob();
        std::vector<double> grad(4, 0.0);
        for (std::size_t i = 0; i < 60; ++i) {
            const double yy = blobs.labels[i] == 1 ? 1.0 : -1.0;
            double z = w[3];
            for (std::size_t c = 0; c < 3; ++c) z += w[c] * blobs.matrix.at(i, c);
            const double coef = -yy / (1.0 + std::exp(yy * z));
            for (std::size_t c = 0; c < 3; ++c) grad[c] += coef * blobs.matrix.at(i, c);
            grad[3] += coef;
        }
        for (std::size_t c = 0; c < 3; ++c) grad[c] += w[c];
        for (double gval : grad) expect(std::abs(gval) < 1e-4, "LR gradient norm");

        // DT purity on distinct rows.
        SplitMix64 dt_rng(9);
        LabeledDataset distinct;
        distinct.matrix = Matrix(40, 3);
        for (std::size_t r = 0; r < 40; ++r) {
            distinct.labels.push_back(static_cast<int>(dt_rng.next_below(2)));
            distinct.subject_ids.push_back("d" + std::to_string(r));
            for (std::size_t c = 0; c < 3; ++c) distinct.matrix.at(r, c) = dt_rng.next_double(-9.0, 9.0);
        }
        distinct.column_names = {"a", "b", "c"};
        const auto dt = TreeModel::train(default_spec(ModelFamily::DecisionTree, 10), distinct);
        const Prediction dp = dt.predict(distinct.matrix);
        for (std::size_t r = 0; r < 40; ++r) expect(dp.labels[r] == distinct.labels[r], "DT purity");
    });

    // 7. CV harness.
    h.criterion(7, "CV harness: LOSO folds, stratification, fold-local selection", 30.0, [&] {
        LabeledDataset ds166;
        ds166.matrix = Matrix(166, 2);
        SplitMix64 rng(7);
        for (std::size_t i = 0; i < 166; ++i) {
            ds166.labels.push_back(i < 83 ? 0 : 1);
            ds166.subject_ids.push_back("subj" + std::to_string(i));
            ds166.matrix.at(i, 0) = rng.next_gaussian();
            ds166.matrix.at(i, 1) = rng.next_gaussian();
        }
        ds166.column_names = {"a", "b"};
        const FoldPlan loso = make_loso_folds(ds166);
        expect(loso.folds.size() == 166, "LOSO fold count");

        const FoldPlan strat = make_stratified_kfold(ds166, 10, 42);
        for (const auto& f : strat.folds) {
            expect(f.test_indices.size() == 16 || f.test_indices.size() == 17, "fold size");
            std::size_t pos = 0;
            for (std::size_t i : f.test_indices) pos += static_cast<std::size_t>(ds166.labels[i]);
            expect(pos == 8 || pos == 9, "fold positives");
        }

        // Fold-local selector fitting: outlier rows flip the top column.
        LabeledDataset crafted;
        crafted.matrix = Matrix(12, 2);
        for (std::size_t i = 0; i < 12; ++i) {
            const int y = static_cast<int>(i % 2);
            crafted.labels.push_back(y);
            crafted.subject_ids.push_back("s" + std::to_string(i));
            crafted.matrix.at(i, 0) = y;
            crafted.matrix.at(i, 1) = y;
        }
        crafted.matrix.at(0, 0) = 40.0;
        crafted.matrix.at(1, 1) = -40.0;
        crafted.matrix.at(2, 0) += 0.01;
        crafted.matrix.at(3, 1) += 0.01;
        crafted.column_names = {"a", "b"};
        PipelineSpec pipe;
        pipe.selector.enabled = true;
        pipe.selector.k = 1;
        pipe.model = default_spec(ModelFamily::DecisionTree, 4);
        const CvResult res = run_cv(crafted, pipe, make_loso_folds(crafted));
        bool differing = false;
        for (std::size_t i = 1; i < res.folds.size(); ++i)
            differing |= res.folds[i].chosen_columns != res.folds[0].chosen_columns;
        expect(differing, "fold-local selector variation");
    });

    // 8. End-to-end smoke through the command-line binary.
    h.criterion(8, "end-to-end: combo + stub encoder + SVM reaches LOSO accuracy 0.95", 60.0, [&] {
#ifndef ADSPEECH_CLI_PATH
        expect(false, "CLI path not configured");
#else
        const fs::path dir = work / "e2e";
        fs::create_directories(dir);
        const std::string cli = ADSPEECH_CLI_PATH;
        int rc = std::system((cli + " gen-synthetic --dir " + (dir / "corpus").string() +
                              " > /dev/null 2>&1").c_str());
        expect(WEXITSTATUS(rc) == 0, "gen-synthetic exit code");

        nlohmann::json cfg = {
            {"corpus_manifest", (dir / "corpus" / "manifest.csv").string()},
            {"output_dir", (dir / "out").string()},
            {"mode", "combo"},
            {"model", "svm"},
            {"standardize", true},
            {"cv", {{"scheme", "loso"}, {"seed", 42}}},
            {"encoder", "stub:mix"},
            {"workers", 4},
        };
        {
            std::ofstream out(dir / "config.json");
            out << cfg.dump(2);
        }
        rc = std::system((cli + " run --config " + (dir / "config.json").string() +
                          " > /dev/null 2>&1").c_str());
        expect(WEXITSTATUS(rc) == 0, "run exit code");

        // Pre-verify separation with the nearest-mean brute-force oracle on
        // the standardized fused representation.
        const auto fused = load_fused_table((dir / "out" / "fused.csv").string());
        expect(fused.size() == 20, "fused rows");
        LabeledDataset ds;
        ds.matrix = Matrix(fused.size(), kFusedDim);
        for (std::size_t i = 0; i < fused.size(); ++i) {
            std::copy(fused[i].values.begin(), fused[i].values.end(), ds.matrix.row(i));
            ds.labels.push_back(fused[i].label == "ad" ? 1 : 0);
            ds.subject_ids.push_back(fused[i].id);
        }
        for (int c = 0; c < kFusedDim; ++c) ds.column_names.push_back("c" + std::to_string(c));
        const Standardizer st = fit_standardizer(ds);
        const LabeledDataset z = standardize(st, ds);
        std::size_t oracle_correct = 0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            std::vector<double> m0(z.width(), 0.0), m1(z.width(), 0.0);
            double n0 = 0.0, n1 = 0.0;
            for (std::size_t r = 0; r < z.size(); ++r) {
                if (r == i) continue;
                auto& m = z.labels[r] == 1 ? m1 : m0;
                (z.labels[r] == 1 ? n1 : n0) += 1.0;
                for (std::size_t c = 0; c < z.width(); ++c) m[c] += z.matrix.at(r, c);
            }
            double d0 = 0.0, d1 = 0.0;
            for (std::size_t c = 0; c < z.width(); ++c) {
                d0 += std::pow(z.matrix.at(i, c) - m0[c] / n0, 2.0);
                d1 += std::pow(z.matrix.at(i, c) - m1[c] / n1, 2.0);
            }
            oracle_correct += (d1 < d0 ? 1 : 0) == z.labels[i];
        }
        const double oracle_acc = static_cast<double>(oracle_correct) / static_cast<double>(z.size());
        expect(oracle_acc >= 0.99, "nearest-mean oracle accuracy " + format_double(oracle_acc));

        std::ifstream in(dir / "out" / "cv_report.json");
        const nlohmann::json report = nlohmann::json::parse(in);
        expect(report.at("aggregation") == "pooled", "pooled aggregation");
        const double acc = report.at("aggregate").at("accuracy").get<double>();
        expect(acc >= 0.95, "LOSO accuracy " + format_double(acc));
#endif
    });

    fs::remove_all(work);
    if (h.failures > 0) {
        std::printf("%d criterion(s) failed\n", h.failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
