#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "adspeech/audio/clip.hpp"
#include "adspeech/common/error.hpp"

namespace adspeech {

namespace resample_detail {

inline double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

// Blackman window on [-1, 1]; sidelobes low enough to keep resampling
// images well under -40 dB.
inline double blackman(double z) {
    if (std::abs(z) > 1.0) return 0.0;
    return 0.42 + 0.5 * std::cos(std::numbers::pi * z) + 0.08 * std::cos(2.0 * std::numbers::pi * z);
}

}  // namespace resample_detail

// Band-limited resampling with a Blackman-windowed sinc kernel. The cutoff
// sits at the lower of the two Nyquist rates; the kernel spans 16 zero
// crossings of the band-limited sinc. Per-sample kernel-sum normalization
// keeps unity passband gain near the edges.
inline AudioClip resample(const AudioClip& clip, int target_hz) {
    require(target_hz > 0, Errc::InvalidArgument, "target sample rate must be positive");
    require(clip.sample_rate_hz > 0, Errc::InvalidArgument, "clip has no sample rate");

    AudioClip out;
    out.sample_rate_hz = target_hz;
    out.subject_id = clip.subject_id;
    out.label_ad = clip.label_ad;
    if (target_hz == clip.sample_rate_hz) {
        out.samples = clip.samples;
        return out;
    }
    if (clip.samples.empty()) return out;

    const double ratio = static_cast<double>(target_hz) / clip.sample_rate_hz;
    const double fc = 0.5 * std::min(1.0, ratio);  // cycles per source sample
    const int zero_crossings = 16;
    const double half_width = zero_crossings / (2.0 * fc);

    const auto n_in = static_cast<long>(clip.samples.size());
    const auto n_out = static_cast<std::size_t>(std::llround(clip.samples.size() * ratio));
    out.samples.resize(n_out);

    for (std::size_t m = 0; m < n_out; ++m) {
        const double center = m / ratio;
        const long j_lo = static_cast<long>(std::ceil(center - half_width));
        const long j_hi = static_cast<long>(std::floor(center + half_width));
        double acc = 0.0;
        double ksum = 0.0;
        for (long j = j_lo; j <= j_hi; ++j) {
            const double u = center - j;
            const double k = 2.0 * fc * resample_detail::sinc(2.0 * fc * u) *
                             resample_detail::blackman(u / half_width);
            ksum += k;
            if (j >= 0 && j < n_in) acc += clip.samples[static_cast<std::size_t>(j)] * k;
        }
        out.samples[m] = ksum != 0.0 ? acc / ksum : 0.0;
    }
    return out;
}

}  // namespace adspeech
