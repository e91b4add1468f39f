#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "adspeech/common/error.hpp"

namespace adspeech {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place iterative radix-2 Cooley-Tukey. Size must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    require(n > 0 && (n & (n - 1)) == 0, Errc::InvalidArgument, "FFT size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// |X_k|^2 for k = 0..nfft/2 of the zero-padded input.
inline std::vector<double> power_spectrum(std::span<const double> x, std::size_t nfft) {
    std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
    const std::size_t n = std::min(x.size(), nfft);
    for (std::size_t i = 0; i < n; ++i) buf[i] = {x[i], 0.0};
    fft_inplace(buf);
    std::vector<double> p(nfft / 2 + 1);
    for (std::size_t k = 0; k <= nfft / 2; ++k) p[k] = std::norm(buf[k]);
    return p;
}

}  // namespace adspeech
