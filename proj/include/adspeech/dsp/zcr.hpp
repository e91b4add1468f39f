#pragma once

#include <vector>

#include "adspeech/audio/clip.hpp"
#include "adspeech/common/error.hpp"

namespace adspeech {

// Zero-crossing rate per frame, in crossings per second. A crossing is a
// strict sign change between adjacent samples; zero counts as positive.
inline std::vector<double> zcr_per_frame(const FrameSeries& frames) {
    require(frames.count() > 0, Errc::DegenerateInput, "zero-crossing rate of an empty frame series");
    std::vector<double> rates(frames.count());
    const double dur = frames.frame_duration_s();
    for (std::size_t i = 0; i < frames.count(); ++i) {
        const double* f = frames.frames.row(i);
        std::size_t crossings = 0;
        for (std::size_t j = 1; j < frames.frame_len; ++j) {
            const bool prev_nonneg = f[j - 1] >= 0.0;
            const bool cur_nonneg = f[j] >= 0.0;
            if (prev_nonneg != cur_nonneg) ++crossings;
        }
        rates[i] = crossings / dur;
    }
    return rates;
}

}  // namespace adspeech
