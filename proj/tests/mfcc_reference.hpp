#pragma once

// Reference MFCC oracle, implemented independently of the library DSP path:
// naive O(n^2) DFT, on-the-fly mel filter evaluation, direct DCT sums. Kept
// test-only so it can never share code with the implementation it checks.

#include <cmath>
#include <complex>
#include <vector>

namespace mfcc_reference {

inline constexpr int kFilters = 26;
inline constexpr int kCepstra = 13;
inline constexpr double kFloor = 1e-10;
inline constexpr double kPi = 3.14159265358979323846;

inline double mel_of_hz(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double hz_of_mel(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

inline std::size_t pow2_at_least(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p *= 2;
    return p;
}

// Static coefficients c0..c12 for one frame.
inline std::vector<double> frame_mfcc(const std::vector<double>& frame, int rate) {
    const std::size_t n = frame.size();
    const std::size_t nfft = pow2_at_least(n);

    std::vector<double> windowed(nfft, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                                static_cast<double>(n - 1));
        windowed[i] = frame[i] * w;
    }

    const std::size_t n_bins = nfft / 2 + 1;
    std::vector<double> power(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t i = 0; i < nfft; ++i) {
            const double ang = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(i) /
                               static_cast<double>(nfft);
            acc += windowed[i] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        power[k] = std::norm(acc);
    }

    const double mel_lo = mel_of_hz(0.0), mel_hi = mel_of_hz(8000.0);
    std::vector<double> log_e(kFilters);
    for (int f = 0; f < kFilters; ++f) {
        const double lo = hz_of_mel(mel_lo + (mel_hi - mel_lo) * f / (kFilters + 1));
        const double mid = hz_of_mel(mel_lo + (mel_hi - mel_lo) * (f + 1) / (kFilters + 1));
        const double hi = hz_of_mel(mel_lo + (mel_hi - mel_lo) * (f + 2) / (kFilters + 1));
        double e = 0.0;
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double hz = static_cast<double>(k) * rate / static_cast<double>(nfft);
            double w = 0.0;
            if (hz > lo && hz < mid) w = (hz - lo) / (mid - lo);
            else if (hz >= mid && hz < hi) w = (hi - hz) / (hi - mid);
            e += w * power[k];
        }
        log_e[f] = std::log(e > kFloor ? e : kFloor);
    }

    std::vector<double> ceps(kCepstra);
    for (int c = 0; c < kCepstra; ++c) {
        double acc = 0.0;
        for (int f = 0; f < kFilters; ++f)
            acc += log_e[f] * std::cos(kPi * c * (2 * f + 1) / (2.0 * kFilters));
        ceps[c] = acc * std::sqrt((c == 0 ? 1.0 : 2.0) / kFilters);
    }
    return ceps;
}

// Regression delta with window w and edge replication, matching the
// documented definition.
inline std::vector<std::vector<double>> deltas(const std::vector<std::vector<double>>& series, int w) {
    const long n = static_cast<long>(series.size());
    double denom = 0.0;
    for (int k = 1; k <= w; ++k) denom += 2.0 * k * k;
    std::vector<std::vector<double>> out(series.size());
    for (long t = 0; t < n; ++t) {
        out[static_cast<std::size_t>(t)].resize(series[0].size());
        for (std::size_t c = 0; c < series[0].size(); ++c) {
            double num = 0.0;
            for (int k = 1; k <= w; ++k) {
                const long fwd = t + k < n ? t + k : n - 1;
                const long bwd = t - k > 0 ? t - k : 0;
                num += k * (series[static_cast<std::size_t>(fwd)][c] - series[static_cast<std::size_t>(bwd)][c]);
            }
            out[static_cast<std::size_t>(t)][c] = num / denom;
        }
    }
    return out;
}

}  // namespace mfcc_reference
