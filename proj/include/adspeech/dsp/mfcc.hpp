#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "adspeech/audio/clip.hpp"
#include "adspeech/common/error.hpp"
#include "adspeech/common/matrix.hpp"
#include "adspeech/dsp/fft.hpp"

namespace adspeech {

inline constexpr int kMelFilterCount = 26;
inline constexpr int kCepstralCount = 13;
inline constexpr double kMelBandLowHz = 0.0;
inline constexpr double kMelBandHighHz = 8000.0;
inline constexpr double kLogFloor = 1e-10;
inline constexpr int kDeltaWindow = 2;
inline constexpr int kMfccColumns = 3 * kCepstralCount;  // static + delta + delta-delta

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace mfcc_detail {

inline std::vector<double> hamming_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(n - 1));
    return w;
}

// Triangular mel filterbank over FFT bins; triangles are linear in Hz.
// Returned as dense [n_filters x (nfft/2+1)] weights.
inline Matrix mel_filterbank(std::size_t nfft, int sample_rate_hz) {
    const std::size_t n_bins = nfft / 2 + 1;
    Matrix bank(kMelFilterCount, n_bins);
    const double mel_lo = hz_to_mel(kMelBandLowHz);
    const double mel_hi = hz_to_mel(kMelBandHighHz);
    std::vector<double> edges(kMelFilterCount + 2);
    for (int i = 0; i < kMelFilterCount + 2; ++i)
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (kMelFilterCount + 1));
    for (int f = 0; f < kMelFilterCount; ++f) {
        const double lo = edges[f], mid = edges[f + 1], hi = edges[f + 2];
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double hz = static_cast<double>(k) * sample_rate_hz / static_cast<double>(nfft);
            double w = 0.0;
            if (hz > lo && hz < mid) w = (hz - lo) / (mid - lo);
            else if (hz >= mid && hz < hi) w = (hi - hz) / (hi - mid);
            bank.at(static_cast<std::size_t>(f), k) = w;
        }
    }
    return bank;
}

// Orthonormal DCT-II of the first n_out coefficients.
inline Matrix dct_matrix(int n_out, int n_in) {
    Matrix d(static_cast<std::size_t>(n_out), static_cast<std::size_t>(n_in));
    for (int k = 0; k < n_out; ++k) {
        const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_in);
        for (int i = 0; i < n_in; ++i)
            d.at(k, i) = scale * std::cos(std::numbers::pi * k * (2 * i + 1) / (2.0 * n_in));
    }
    return d;
}

// Regression delta with +-w frames, edge frames replicated.
inline void append_deltas(Matrix& m, std::size_t src_base, std::size_t dst_base, int w) {
    double denom = 0.0;
    for (int k = 1; k <= w; ++k) denom += 2.0 * k * k;
    const auto n = static_cast<long>(m.rows);
    for (long t = 0; t < n; ++t) {
        for (int c = 0; c < kCepstralCount; ++c) {
            double num = 0.0;
            for (int k = 1; k <= w; ++k) {
                const long t_fwd = std::min(n - 1, t + k);
                const long t_bwd = std::max(0L, t - k);
                num += k * (m.at(static_cast<std::size_t>(t_fwd), src_base + c) -
                            m.at(static_cast<std::size_t>(t_bwd), src_base + c));
            }
            m.at(static_cast<std::size_t>(t), dst_base + c) = num / denom;
        }
    }
}

}  // namespace mfcc_detail

// Per-frame MFCCs with first- and second-order deltas: [n_frames x 39].
// Pipeline per frame: Hamming window -> power spectrum (FFT size = next
// power of two >= frame length) -> 26 triangular mel filters on 0-8000 Hz
// (HTK mel scale) -> natural log floored at 1e-10 -> orthonormal DCT-II,
// coefficients c0..c12. Columns 13-25 and 26-38 are the +-2-frame
// regression deltas of the statics and of the deltas.
inline Matrix mfcc_matrix(const FrameSeries& frames, int n_coeff = kCepstralCount) {
    require(n_coeff == kCepstralCount, Errc::InvalidArgument, "coefficient count is pinned to 13");
    require(frames.sample_rate_hz == kCanonicalRateHz, Errc::InvalidArgument,
            "MFCC extraction expects 16 kHz frames");
    if (frames.count() < 2 * kDeltaWindow + 1)
        raise(Errc::DegenerateInput, "fewer than 5 frames: delta regression window undefined");

    const std::size_t nfft = next_pow2(frames.frame_len);
    const auto window = mfcc_detail::hamming_window(frames.frame_len);
    const Matrix bank = mfcc_detail::mel_filterbank(nfft, frames.sample_rate_hz);
    const Matrix dct = mfcc_detail::dct_matrix(kCepstralCount, kMelFilterCount);

    Matrix out(frames.count(), kMfccColumns);
    std::vector<double> windowed(frames.frame_len);
    for (std::size_t i = 0; i < frames.count(); ++i) {
        const double* f = frames.frames.row(i);
        for (std::size_t j = 0; j < frames.frame_len; ++j) windowed[j] = f[j] * window[j];
        const auto spec = power_spectrum(windowed, nfft);

        double log_energies[kMelFilterCount];
        for (int b = 0; b < kMelFilterCount; ++b) {
            double e = 0.0;
            const double* w = bank.row(static_cast<std::size_t>(b));
            for (std::size_t k = 0; k < spec.size(); ++k) e += w[k] * spec[k];
            log_energies[b] = std::log(std::max(e, kLogFloor));
        }
        for (int c = 0; c < kCepstralCount; ++c) {
            double acc = 0.0;
            const double* d = dct.row(static_cast<std::size_t>(c));
            for (int b = 0; b < kMelFilterCount; ++b) acc += d[b] * log_energies[b];
            out.at(i, static_cast<std::size_t>(c)) = acc;
        }
    }
    mfcc_detail::append_deltas(out, 0, kCepstralCount, kDeltaWindow);
    mfcc_detail::append_deltas(out, kCepstralCount, 2 * kCepstralCount, kDeltaWindow);
    return out;
}

}  // namespace adspeech
