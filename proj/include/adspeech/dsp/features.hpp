#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "adspeech/audio/clip.hpp"
#include "adspeech/common/csv.hpp"
#include "adspeech/common/error.hpp"
#include "adspeech/dsp/mfcc.hpp"
#include "adspeech/dsp/moments.hpp"
#include "adspeech/dsp/perturbation.hpp"
#include "adspeech/dsp/pitch.hpp"
#include "adspeech/dsp/zcr.hpp"

namespace adspeech {

inline constexpr int kFeatureDim = 168;
inline constexpr double kFeatureWindowMs = 25.0;
inline constexpr double kFeatureHopMs = 10.0;

// Canonical layout, fixed for reproducibility. Indices 0-155: the 39 MFCC
// channels (13 static, 13 delta, 13 delta-delta), coefficient-major, four
// moments each (mean, sd, skewness, excess kurtosis). 156-159: jitter
// local%/absolute(s)/RAP%/PPQ5%. 160-163: shimmer local%/dB/APQ3%/APQ5%.
// 164-167: zero-crossing-rate moments. The id also pins the analysis
// parameters the perturbation measures depend on.
inline const std::string kFeatureLayoutId =
    "acoustic168-v1:mfcc13+d+dd.mom4;jitter4;shimmer4;zcr4;win25ms.hop10ms;"
    "pitch40ms.band75-500hz.peak0.45.rms0.01";

struct FeatureVector {
    std::array<double, kFeatureDim> values{};
    std::string layout_id = kFeatureLayoutId;
    // Perturbation slots that fell back to the insufficient-cycles sentinel.
    std::array<bool, 4> jitter_sentinel{false, false, false, false};
    std::array<bool, 4> shimmer_sentinel{false, false, false, false};
};

inline std::string feature_column_name(int i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "f%03d", i);
    return buf;
}

// The 168-dimensional conventional acoustic feature vector of one clip.
// Deterministic; every slot is finite for any finite input, including
// silence (perturbation sentinels cover pitchless clips).
inline FeatureVector extract_features(const AudioClip& clip) {
    require(clip.sample_rate_hz == kCanonicalRateHz, Errc::InvalidArgument,
            "feature extraction expects 16 kHz input");
    require(clip.samples.size() >= static_cast<std::size_t>(kCanonicalRateHz), Errc::DegenerateInput,
            "clip too short: need at least 1 s of audio");

    FeatureVector fv;
    const FrameSeries frames = frame(clip, kFeatureWindowMs, kFeatureHopMs);
    const Matrix mfcc = mfcc_matrix(frames);

    std::size_t idx = 0;
    for (int c = 0; c < kMfccColumns; ++c) {
        const auto column = mfcc.column(static_cast<std::size_t>(c));
        const MomentStats st = moment_stats(column);
        fv.values[idx++] = st.mean;
        fv.values[idx++] = st.sd;
        fv.values[idx++] = st.skewness;
        fv.values[idx++] = st.kurtosis_excess;
    }

    const PitchTrack track = track_pitch(clip);
    const JitterMeasures jm = jitter_measures(track);
    fv.values[idx++] = jm.local_pct;
    fv.values[idx++] = jm.absolute_s;
    fv.values[idx++] = jm.rap_pct;
    fv.values[idx++] = jm.ppq5_pct;
    fv.jitter_sentinel = jm.insufficient_cycles;

    const ShimmerMeasures sm = shimmer_measures(track);
    fv.values[idx++] = sm.local_pct;
    fv.values[idx++] = sm.db;
    fv.values[idx++] = sm.apq3_pct;
    fv.values[idx++] = sm.apq5_pct;
    fv.shimmer_sentinel = sm.insufficient_cycles;

    const auto zcr = zcr_per_frame(frames);
    const MomentStats zst = moment_stats(zcr);
    fv.values[idx++] = zst.mean;
    fv.values[idx++] = zst.sd;
    fv.values[idx++] = zst.skewness;
    fv.values[idx++] = zst.kurtosis_excess;

    require(idx == kFeatureDim, Errc::Internal, "feature layout drifted from 168 slots");
    for (double v : fv.values)
        require(std::isfinite(v), Errc::Internal, "non-finite feature value produced");
    return fv;
}

// Feature table I/O: header `id,label,f000..f167`, '.' decimal point, 17
// significant digits. Labels are "ad"/"cn", empty when unknown.
struct FeatureRow {
    std::string id;
    std::string label;  // "ad", "cn", or ""
    FeatureVector features;
};

inline void write_feature_table(const std::string& path, const std::vector<FeatureRow>& rows,
                                const std::vector<std::string>& comments = {}) {
    AtomicFileWriter w(path);
    auto& out = w.stream();
    for (const auto& c : comments) out << c << '\n';
    out << "id,label";
    for (int i = 0; i < kFeatureDim; ++i) out << ',' << feature_column_name(i);
    out << '\n';
    for (const auto& r : rows) {
        out << r.id << ',' << r.label;
        for (double v : r.features.values) out << ',' << format_double(v);
        out << '\n';
    }
    w.commit();
}

inline std::vector<FeatureRow> load_feature_table(const std::string& path) {
    const CsvTable t = read_csv(path);
    require(t.header.size() == static_cast<std::size_t>(kFeatureDim) + 2, Errc::SchemaViolation,
            "feature table must have id,label,f000..f167 columns: " + path);
    require(t.header[0] == "id" && t.header[1] == "label", Errc::SchemaViolation,
            "feature table header must start with id,label: " + path);
    std::vector<FeatureRow> rows;
    std::map<std::string, bool> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& cells = t.rows[i];
        const std::string where = path + " row " + std::to_string(i + 1);
        require(cells.size() == t.header.size(), Errc::SchemaViolation,
                "wrong column count in " + where);
        FeatureRow r;
        r.id = cells[0];
        r.label = cells[1];
        require(!seen.count(r.id), Errc::SchemaViolation, "duplicate id '" + r.id + "' in " + where);
        seen[r.id] = true;
        for (int c = 0; c < kFeatureDim; ++c)
            r.features.values[static_cast<std::size_t>(c)] =
                parse_double(cells[static_cast<std::size_t>(c) + 2], where);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace adspeech
