#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "adspeech/common/error.hpp"
#include "adspeech/common/matrix.hpp"

namespace adspeech {

// Every clip entering the pipeline is resampled to this rate on ingestion.
inline constexpr int kCanonicalRateHz = 16000;

// Mono PCM audio in [-1, 1]. Immutable by convention once built.
struct AudioClip {
    std::vector<double> samples;
    int sample_rate_hz = 0;
    std::string subject_id;
    std::optional<bool> label_ad;  // true = AD (positive class)

    double duration_s() const {
        return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
    }
};

// Short-time frames cut from one clip. frames[i] is the contiguous slice of
// the source starting at i*hop_len; the tail that does not fill a frame is
// dropped, not padded.
struct FrameSeries {
    Matrix frames;  // [n_frames x frame_len]
    std::size_t frame_len = 0;
    std::size_t hop_len = 0;
    int sample_rate_hz = 0;

    std::size_t count() const { return frames.rows; }
    double frame_duration_s() const { return static_cast<double>(frame_len) / sample_rate_hz; }
};

inline std::size_t frame_count(std::size_t n_samples, std::size_t frame_len, std::size_t hop_len) {
    if (n_samples < frame_len) return 0;
    return (n_samples - frame_len) / hop_len + 1;
}

inline FrameSeries frame(const AudioClip& clip, double window_ms, double hop_ms) {
    require(hop_ms > 0.0 && window_ms >= hop_ms, Errc::InvalidArgument,
            "framing requires window_ms >= hop_ms > 0");
    require(clip.sample_rate_hz > 0, Errc::InvalidArgument, "clip has no sample rate");
    const auto frame_len = static_cast<std::size_t>(std::llround(window_ms * clip.sample_rate_hz / 1000.0));
    const auto hop_len = static_cast<std::size_t>(std::llround(hop_ms * clip.sample_rate_hz / 1000.0));
    require(frame_len > 0 && hop_len > 0, Errc::InvalidArgument, "degenerate frame/hop length");
    if (clip.samples.size() < frame_len)
        raise(Errc::DegenerateInput, "clip shorter than one analysis window");

    FrameSeries fs;
    fs.frame_len = frame_len;
    fs.hop_len = hop_len;
    fs.sample_rate_hz = clip.sample_rate_hz;
    const std::size_t n = frame_count(clip.samples.size(), frame_len, hop_len);
    fs.frames = Matrix(n, frame_len);
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = clip.samples.data() + i * hop_len;
        std::copy(src, src + frame_len, fs.frames.row(i));
    }
    return fs;
}

}  // namespace adspeech
