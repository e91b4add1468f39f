#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "adspeech/audio/clip.hpp"
#include "adspeech/common/error.hpp"

namespace adspeech {

// F0 search band and voicing gates. Jitter/shimmer depend on these, so they
// are part of the published feature layout id.
inline constexpr double kPitchMinHz = 75.0;
inline constexpr double kPitchMaxHz = 500.0;
inline constexpr double kVoicingPeakThreshold = 0.45;
inline constexpr double kVoicingRmsThreshold = 0.01;
inline constexpr double kPitchWindowMs = 40.0;
inline constexpr double kPitchHopMs = 10.0;

// Per-cycle glottal period estimates from voiced regions, with the absolute
// peak amplitude of each cycle. Periods stay within the search band
// [1/500, 1/75] s; out-of-band cycle candidates are discarded.
struct PitchTrack {
    std::vector<double> periods;          // seconds
    std::vector<double> peak_amplitudes;  // unitless, aligned with periods
    double voiced_frame_fraction = 0.0;
};

namespace pitch_detail {

struct FrameEstimate {
    bool voiced = false;
    double period_samples = 0.0;
};

// Normalized autocorrelation peak in the lag band, parabolically refined.
inline FrameEstimate analyze_frame(const double* x, std::size_t n, std::size_t lag_min, std::size_t lag_max) {
    FrameEstimate est;
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) energy += x[i] * x[i];
    const double rms = std::sqrt(energy / static_cast<double>(n));
    if (rms <= kVoicingRmsThreshold) return est;

    const std::size_t hi = std::min(lag_max, n - 1);
    std::vector<double> r(hi + 2, 0.0);
    for (std::size_t lag = (lag_min > 0 ? lag_min - 1 : lag_min); lag <= std::min(hi + 1, n - 1); ++lag) {
        double num = 0.0, e0 = 0.0, e1 = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) {
            num += x[i] * x[i + lag];
            e0 += x[i] * x[i];
            e1 += x[i + lag] * x[i + lag];
        }
        const double denom = std::sqrt(e0 * e1);
        r[lag] = denom > 0.0 ? num / denom : 0.0;
    }

    // Tiny lag penalty breaks the tie between the true period and its
    // integer multiples, which have identical correlation on periodic
    // signals.
    std::size_t best = 0;
    double best_score = -2.0;
    for (std::size_t lag = lag_min; lag <= hi; ++lag) {
        const double score = r[lag] - 1e-6 * static_cast<double>(lag);
        if (score > best_score) {
            best_score = score;
            best = lag;
        }
    }
    if (best == 0 || r[best] <= kVoicingPeakThreshold) return est;

    double refined = static_cast<double>(best);
    if (best > lag_min && best < hi) {
        const double ym = r[best - 1], y0 = r[best], yp = r[best + 1];
        const double denom = ym - 2.0 * y0 + yp;
        if (std::abs(denom) > 1e-15) {
            const double shift = 0.5 * (ym - yp) / denom;
            if (std::abs(shift) < 1.0) refined += shift;
        }
    }
    est.voiced = true;
    est.period_samples = refined;
    return est;
}

// Sub-sample position and height of an absolute-value peak at index p.
inline void refine_peak(const std::vector<double>& x, std::size_t p, double& pos, double& height) {
    pos = static_cast<double>(p);
    height = std::abs(x[p]);
    if (p == 0 || p + 1 >= x.size()) return;
    const double ym = std::abs(x[p - 1]), y0 = std::abs(x[p]), yp = std::abs(x[p + 1]);
    const double denom = ym - 2.0 * y0 + yp;
    if (std::abs(denom) > 1e-15) {
        const double shift = 0.5 * (ym - yp) / denom;
        if (std::abs(shift) < 1.0) {
            pos += shift;
            height = y0 - 0.25 * (ym - yp) * shift;
        }
    }
}

inline std::size_t argmax_abs(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    std::size_t best = lo;
    double best_val = -1.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double v = std::abs(x[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    return best;
}

}  // namespace pitch_detail

// Frame-level voicing and F0 by normalized autocorrelation (40 ms window,
// 10 ms hop), then per-cycle periods by walking waveform peaks through each
// voiced run: successive absolute peaks roughly one period apart define the
// cycles; peak positions are refined to sub-sample precision.
inline PitchTrack track_pitch(const AudioClip& clip) {
    require(clip.sample_rate_hz == kCanonicalRateHz, Errc::InvalidArgument,
            "pitch tracking expects 16 kHz input");
    const auto rate = static_cast<double>(clip.sample_rate_hz);
    require(clip.samples.size() >= static_cast<std::size_t>(std::llround(kPitchWindowMs * rate / 1000.0)),
            Errc::DegenerateInput, "clip shorter than one pitch analysis window");

    const auto win = static_cast<std::size_t>(std::llround(kPitchWindowMs * rate / 1000.0));
    const auto hop = static_cast<std::size_t>(std::llround(kPitchHopMs * rate / 1000.0));
    const auto lag_min = static_cast<std::size_t>(std::ceil(rate / kPitchMaxHz));
    const auto lag_max = static_cast<std::size_t>(std::floor(rate / kPitchMinHz));

    const std::size_t n_frames = frame_count(clip.samples.size(), win, hop);
    std::vector<pitch_detail::FrameEstimate> est(n_frames);
    std::size_t n_voiced = 0;
    for (std::size_t i = 0; i < n_frames; ++i) {
        est[i] = pitch_detail::analyze_frame(clip.samples.data() + i * hop, win, lag_min, lag_max);
        if (est[i].voiced) ++n_voiced;
    }

    PitchTrack track;
    track.voiced_frame_fraction = n_frames > 0 ? static_cast<double>(n_voiced) / n_frames : 0.0;
    if (n_voiced == 0) return track;

    const double min_period = 1.0 / kPitchMaxHz;
    const double max_period = 1.0 / kPitchMinHz;
    const auto& x = clip.samples;

    std::size_t i = 0;
    while (i < n_frames) {
        if (!est[i].voiced) {
            ++i;
            continue;
        }
        std::size_t run_end = i;
        while (run_end + 1 < n_frames && est[run_end + 1].voiced) ++run_end;

        const std::size_t region_lo = i * hop;
        const std::size_t region_hi = std::min(x.size(), run_end * hop + win);

        // Local period for a sample position: estimate of the frame whose
        // window is centered nearest.
        auto period_at = [&](double pos) {
            const double centered = (pos - win * 0.5) / hop;
            auto fi = static_cast<long>(std::llround(centered));
            fi = std::clamp(fi, static_cast<long>(i), static_cast<long>(run_end));
            return est[static_cast<std::size_t>(fi)].period_samples;
        };

        double t0 = period_at(static_cast<double>(region_lo));
        std::size_t first_hi = std::min(region_hi, region_lo + static_cast<std::size_t>(std::llround(t0)) + 1);
        if (first_hi <= region_lo) {
            i = run_end + 1;
            continue;
        }
        std::size_t peak = pitch_detail::argmax_abs(x, region_lo, first_hi);
        double prev_pos, prev_height;
        pitch_detail::refine_peak(x, peak, prev_pos, prev_height);
        double prev_peak_height = prev_height;

        for (;;) {
            const double t = period_at(prev_pos);
            const auto search_lo = static_cast<std::size_t>(std::llround(prev_pos + 0.7 * t));
            const auto search_hi = static_cast<std::size_t>(std::llround(prev_pos + 1.3 * t)) + 1;
            if (search_hi > region_hi || search_lo >= search_hi) break;
            const std::size_t next = pitch_detail::argmax_abs(x, search_lo, std::min(search_hi, region_hi));
            double pos, height;
            pitch_detail::refine_peak(x, next, pos, height);
            const double period_s = (pos - prev_pos) / rate;
            if (period_s >= min_period && period_s <= max_period) {
                track.periods.push_back(period_s);
                track.peak_amplitudes.push_back(std::max(prev_peak_height, 1e-12));
            }
            prev_pos = pos;
            prev_peak_height = height;
        }
        i = run_end + 1;
    }
    return track;
}

}  // namespace adspeech
