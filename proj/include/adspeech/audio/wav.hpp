#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "adspeech/audio/clip.hpp"
#include "adspeech/common/error.hpp"

namespace adspeech {

namespace wav_detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void append_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline void append_u16le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace wav_detail

// Decodes a RIFF/WAVE PCM file: 8/16/24/32-bit integer or 32-bit float,
// 1-2 channels. Integer samples are scaled by the format's full-scale value
// 2^(bits-1) (8-bit WAV is unsigned, offset by 128); stereo is averaged to
// mono sample-wise. Unknown chunks are skipped.
inline AudioClip decode_wav(const std::string& bytes, const std::string& origin) {
    using namespace wav_detail;
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();
    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        raise(Errc::MalformedWav, "not a RIFF/WAVE file: " + origin);

    std::uint16_t format_tag = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    bool have_fmt = false;
    std::size_t data_off = 0, data_len = 0;

    std::size_t off = 12;
    while (off + 8 <= n) {
        const char* id = reinterpret_cast<const char*>(p + off);
        std::uint32_t chunk_len = read_u32le(p + off + 4);
        std::size_t body = off + 8;
        if (body + chunk_len > n) {
            // Tolerate a short final data chunk only; anything else is corrupt.
            if (std::memcmp(id, "data", 4) == 0) chunk_len = static_cast<std::uint32_t>(n - body);
            else raise(Errc::MalformedWav, "chunk overruns file: " + origin);
        }
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_len < 16) raise(Errc::MalformedWav, "fmt chunk too short: " + origin);
            format_tag = read_u16le(p + body);
            channels = read_u16le(p + body + 2);
            sample_rate = read_u32le(p + body + 4);
            bits = read_u16le(p + body + 14);
            if (format_tag == 0xFFFE) {  // WAVE_FORMAT_EXTENSIBLE: real tag in SubFormat GUID
                if (chunk_len < 40) raise(Errc::MalformedWav, "extensible fmt chunk too short: " + origin);
                format_tag = read_u16le(p + body + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_off = body;
            data_len = chunk_len;
            break;  // fmt precedes data in every writer we accept
        }
        off = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }

    if (!have_fmt) raise(Errc::MalformedWav, "missing fmt chunk: " + origin);
    if (data_off == 0) raise(Errc::MalformedWav, "missing data chunk: " + origin);
    if (sample_rate == 0) raise(Errc::MalformedWav, "zero sample rate: " + origin);
    if (channels < 1 || channels > 2)
        raise(Errc::UnsupportedCodec, "unsupported channel count " + std::to_string(channels) + ": " + origin);

    const bool is_float = format_tag == 3;
    if (format_tag != 1 && !is_float)
        raise(Errc::UnsupportedCodec, "unsupported format tag " + std::to_string(format_tag) + ": " + origin);
    if (is_float && bits != 32)
        raise(Errc::UnsupportedCodec, "unsupported float width " + std::to_string(bits) + ": " + origin);
    if (!is_float && bits != 8 && bits != 16 && bits != 24 && bits != 32)
        raise(Errc::UnsupportedCodec, "unsupported PCM width " + std::to_string(bits) + ": " + origin);

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t stride = bytes_per_sample * channels;
    const std::size_t n_frames = stride > 0 ? data_len / stride : 0;

    AudioClip clip;
    clip.sample_rate_hz = static_cast<int>(sample_rate);
    clip.samples.resize(n_frames);

    const unsigned char* d = p + data_off;
    for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t ch = 0; ch < channels; ++ch) {
            const unsigned char* s = d + i * stride + ch * bytes_per_sample;
            double v = 0.0;
            if (is_float) {
                float f;
                std::memcpy(&f, s, 4);
                v = std::clamp(static_cast<double>(f), -1.0, 1.0);
            } else if (bits == 8) {
                v = (static_cast<int>(s[0]) - 128) / 128.0;
            } else if (bits == 16) {
                auto x = static_cast<std::int16_t>(s[0] | (s[1] << 8));
                v = x / 32768.0;
            } else if (bits == 24) {
                std::int32_t x = s[0] | (s[1] << 8) | (s[2] << 16);
                if (x & 0x800000) x |= ~0xFFFFFF;  // sign extend
                v = x / 8388608.0;
            } else {  // 32-bit int
                std::int32_t x;
                std::memcpy(&x, s, 4);
                v = x / 2147483648.0;
            }
            acc += v;
        }
        clip.samples[i] = acc / channels;
    }
    return clip;
}

inline AudioClip load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::FileMissing, "audio file not found: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_wav(bytes, path);
}

// Encodes 16-bit PCM. Interleaved input for stereo; mono for channels == 1.
inline std::string encode_wav16(const std::vector<double>& interleaved, int sample_rate_hz, int channels) {
    using namespace wav_detail;
    require(channels == 1 || channels == 2, Errc::InvalidArgument, "writer supports 1-2 channels");
    require(sample_rate_hz > 0, Errc::InvalidArgument, "sample rate must be positive");

    std::string out;
    const std::uint32_t data_len = static_cast<std::uint32_t>(interleaved.size() * 2);
    out.reserve(44 + data_len);
    out += "RIFF";
    append_u32le(out, 36 + data_len);
    out += "WAVE";
    out += "fmt ";
    append_u32le(out, 16);
    append_u16le(out, 1);  // PCM
    append_u16le(out, static_cast<std::uint16_t>(channels));
    append_u32le(out, static_cast<std::uint32_t>(sample_rate_hz));
    append_u32le(out, static_cast<std::uint32_t>(sample_rate_hz * channels * 2));
    append_u16le(out, static_cast<std::uint16_t>(channels * 2));
    append_u16le(out, 16);
    out += "data";
    append_u32le(out, data_len);
    for (double x : interleaved) {
        auto q = static_cast<long>(std::llround(x * 32768.0));
        q = std::clamp(q, -32768L, 32767L);
        append_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    return out;
}

inline void save_wav16(const std::string& path, const std::vector<double>& interleaved, int sample_rate_hz,
                       int channels = 1) {
    std::string bytes = encode_wav16(interleaved, sample_rate_hz, channels);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::FileMissing, "cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), Errc::Internal, "write failed: " + path);
}

}  // namespace adspeech
