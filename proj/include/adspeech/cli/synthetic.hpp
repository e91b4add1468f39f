#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "adspeech/audio/wav.hpp"
#include "adspeech/cli/manifest.hpp"
#include "adspeech/common/rng.hpp"

namespace adspeech {

// Deterministic synthetic corpus standing in for the access-restricted
// clinical recordings: two classes of harmonic "voices" that differ in
// pitch contour and noise level. Class separation is wide by construction
// so end-to-end runs have a known-learnable target.
struct SyntheticSpec {
    int n_clips = 20;
    std::uint64_t seed = 20210617;
    int sample_rate_hz = kCanonicalRateHz;
};

inline std::vector<double> synth_voice(SplitMix64& rng, double f0_base, double contour_hz,
                                       double contour_depth, double noise_level, double duration_s,
                                       int rate) {
    const auto n = static_cast<std::size_t>(duration_s * rate);
    std::vector<double> x(n);
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double f0 = f0_base * (1.0 + contour_depth * std::sin(2.0 * std::numbers::pi * contour_hz * t));
        phase += 2.0 * std::numbers::pi * f0 / rate;
        // Three harmonics with 1/h rolloff plus a slow amplitude swell.
        const double env = 0.32 * (0.75 + 0.25 * std::sin(2.0 * std::numbers::pi * 0.7 * t));
        double v = 0.0;
        for (int h = 1; h <= 3; ++h) v += std::sin(phase * h) / h;
        x[i] = env * v / 1.8333 + noise_level * rng.next_double(-1.0, 1.0);
    }
    return x;
}

inline CorpusManifest gen_synthetic_corpus(const std::string& out_dir, const SyntheticSpec& spec = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    CorpusManifest manifest;
    manifest.base_dir = out_dir;
    SplitMix64 rng(spec.seed);
    for (int i = 0; i < spec.n_clips; ++i) {
        const bool ad = i % 2 == 1;
        char id[16];
        std::snprintf(id, sizeof(id), "syn%03d", i);

        // AD-class voices: lower, flatter pitch, markedly noisier.
        const double f0 = ad ? rng.next_double(105.0, 135.0) : rng.next_double(195.0, 240.0);
        const double contour_hz = ad ? 0.3 : 0.6;
        const double contour_depth = ad ? 0.03 : 0.10;
        const double noise = ad ? rng.next_double(0.035, 0.055) : rng.next_double(0.002, 0.006);
        const double duration = rng.next_double(2.0, 3.0);

        const auto samples = synth_voice(rng, f0, contour_hz, contour_depth, noise, duration,
                                         spec.sample_rate_hz);
        const std::string wav_name = std::string(id) + ".wav";
        save_wav16((fs::path(out_dir) / wav_name).string(), samples, spec.sample_rate_hz);

        ManifestRow row;
        row.id = id;
        row.path = wav_name;
        row.label_ad = ad;
        row.subject = std::string("subj-") + id;
        manifest.rows.push_back(std::move(row));
    }
    save_manifest((fs::path(out_dir) / "manifest.csv").string(), manifest);
    return manifest;
}

}  // namespace adspeech
