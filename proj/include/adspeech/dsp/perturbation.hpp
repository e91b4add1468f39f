#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "adspeech/dsp/pitch.hpp"

namespace adspeech {

// Cycle-to-cycle period perturbation. Percent measures are percentages of
// the mean period. A measure whose window needs more cycles than the track
// has is 0 with its insufficient_cycles flag set, keeping design matrices
// dense.
struct JitterMeasures {
    double local_pct = 0.0;
    double absolute_s = 0.0;
    double rap_pct = 0.0;
    double ppq5_pct = 0.0;
    std::array<bool, 4> insufficient_cycles{false, false, false, false};
};

// Cycle-to-cycle amplitude perturbation, same sentinel convention. Zero
// amplitudes are excluded from the dB term.
struct ShimmerMeasures {
    double local_pct = 0.0;
    double db = 0.0;
    double apq3_pct = 0.0;
    double apq5_pct = 0.0;
    std::array<bool, 4> insufficient_cycles{false, false, false, false};
};

namespace perturbation_detail {

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Mean absolute deviation from the centered 3- or 5-point moving average,
// evaluated where the full window fits. Written as
// |(w-1)*v_i - neighbor_sum| / w with the neighbor sum paired so constant
// windows cancel to exactly zero in floating point.
inline double window_deviation(const std::vector<double>& v, std::size_t w) {
    const std::size_t half = w / 2;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = half; i + half < v.size(); ++i) {
        double neighbor_sum;
        if (w == 3) neighbor_sum = v[i - 1] + v[i + 1];
        else neighbor_sum = (v[i - 2] + v[i - 1]) + (v[i + 1] + v[i + 2]);
        acc += std::abs(static_cast<double>(w - 1) * v[i] - neighbor_sum) / static_cast<double>(w);
        ++count;
    }
    return count > 0 ? acc / static_cast<double>(count) : 0.0;
}

inline double mean_abs_successive_diff(const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) acc += std::abs(v[i] - v[i - 1]);
    return v.size() > 1 ? acc / static_cast<double>(v.size() - 1) : 0.0;
}

}  // namespace perturbation_detail

inline JitterMeasures jitter_measures(const PitchTrack& track) {
    using namespace perturbation_detail;
    JitterMeasures j;
    const auto& t = track.periods;
    const std::size_t n = t.size();
    const double t_bar = mean(t);

    if (n < 2 || t_bar <= 0.0) {
        j.insufficient_cycles = {true, true, true, true};
        return j;
    }
    const double mad = mean_abs_successive_diff(t);
    j.local_pct = 100.0 * mad / t_bar;
    j.absolute_s = mad;
    if (n >= 3) j.rap_pct = 100.0 * window_deviation(t, 3) / t_bar;
    else j.insufficient_cycles[2] = true;
    if (n >= 5) j.ppq5_pct = 100.0 * window_deviation(t, 5) / t_bar;
    else j.insufficient_cycles[3] = true;
    return j;
}

inline ShimmerMeasures shimmer_measures(const PitchTrack& track) {
    using namespace perturbation_detail;
    ShimmerMeasures s;
    const auto& a = track.peak_amplitudes;
    const std::size_t n = a.size();
    const double a_bar = mean(a);

    if (n < 2 || a_bar <= 0.0) {
        s.insufficient_cycles = {true, true, true, true};
        return s;
    }
    s.local_pct = 100.0 * mean_abs_successive_diff(a) / a_bar;

    double db_acc = 0.0;
    std::size_t db_count = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (a[i] > 0.0 && a[i - 1] > 0.0) {
            db_acc += std::abs(20.0 * std::log10(a[i] / a[i - 1]));
            ++db_count;
        }
    }
    if (db_count > 0) s.db = db_acc / static_cast<double>(db_count);
    else s.insufficient_cycles[1] = true;

    if (n >= 3) s.apq3_pct = 100.0 * window_deviation(a, 3) / a_bar;
    else s.insufficient_cycles[2] = true;
    if (n >= 5) s.apq5_pct = 100.0 * window_deviation(a, 5) / a_bar;
    else s.insufficient_cycles[3] = true;
    return s;
}

}  // namespace adspeech
