#pragma once

#include <cmath>
#include <span>

#include "adspeech/common/error.hpp"

namespace adspeech {

// Population moments. Skewness and excess kurtosis are defined as 0 for a
// (numerically) constant series.
struct MomentStats {
    double mean = 0.0;
    double sd = 0.0;
    double skewness = 0.0;
    double kurtosis_excess = 0.0;
};

inline MomentStats moment_stats(std::span<const double> series) {
    require(!series.empty(), Errc::DegenerateInput, "moment statistics of an empty series");
    const double n = static_cast<double>(series.size());

    double mean = 0.0;
    for (double x : series) mean += x;
    mean /= n;

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : series) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    MomentStats s;
    s.mean = mean;
    s.sd = std::sqrt(m2);
    if (m2 >= 1e-12) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.kurtosis_excess = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

}  // namespace adspeech
