#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adspeech/audio/clip.hpp"
#include "adspeech/common/error.hpp"
#include "adspeech/common/log.hpp"
#include "adspeech/common/matrix.hpp"
#include "adspeech/common/rng.hpp"

namespace adspeech {

inline constexpr int kEmbeddingDim = 768;
inline constexpr std::size_t kMaxChunkLen = 320000;

enum class EmbeddingSource { EncoderInference, PrecomputedFile };

struct EmbeddingVector {
    std::vector<double> values;  // exactly kEmbeddingDim entries
    EmbeddingSource source = EmbeddingSource::EncoderInference;
};

// A frozen sequence encoder. encode() maps one waveform chunk (mono floats
// at 16 kHz) to hidden states [n_time_steps x 768]; inference must be
// deterministic. One in-flight call per instance.
class EncoderBackend {
public:
    virtual ~EncoderBackend() = default;
    virtual std::string name() const = 0;
    virtual Matrix encode(std::span<const double> chunk) = 0;
};

// Greedy left-to-right split into chunks of max_len samples; only the last
// chunk may be shorter. Concatenating the returned views reproduces the
// input exactly.
inline std::vector<std::span<const double>> chunk_waveform(std::span<const double> samples,
                                                           std::size_t max_len = kMaxChunkLen) {
    require(!samples.empty(), Errc::DegenerateInput, "cannot chunk an empty waveform");
    require(max_len > 0, Errc::InvalidArgument, "chunk length must be positive");
    std::vector<std::span<const double>> chunks;
    for (std::size_t off = 0; off < samples.size(); off += max_len)
        chunks.push_back(samples.subspan(off, std::min(max_len, samples.size() - off)));
    return chunks;
}

// Pools encoder hidden states into one fixed vector: unweighted mean over
// the time axis per chunk, then unweighted element-wise mean over chunk
// vectors. The chunk mean is unweighted even when the tail chunk is
// shorter; that case is surfaced as a diagnostic, never silently altered.
inline EmbeddingVector encode_chunks(const std::vector<std::span<const double>>& chunks,
                                     EncoderBackend& backend) {
    require(!chunks.empty(), Errc::DegenerateInput, "no chunks to encode");

    EmbeddingVector emb;
    emb.values.assign(kEmbeddingDim, 0.0);
    emb.source = EmbeddingSource::EncoderInference;

    bool unequal = false;
    for (const auto& chunk : chunks) {
        if (chunk.size() != chunks.front().size()) unequal = true;
        const Matrix h = backend.encode(chunk);
        if (h.cols != kEmbeddingDim || h.rows == 0)
            raise(Errc::DimensionMismatch,
                  "backend '" + backend.name() + "' produced hidden size " + std::to_string(h.cols) +
                      " x " + std::to_string(h.rows) + ", expected [n_t x 768]");
        for (std::size_t d = 0; d < kEmbeddingDim; ++d) {
            double acc = 0.0;
            for (std::size_t t = 0; t < h.rows; ++t) acc += h.at(t, d);
            emb.values[d] += acc / static_cast<double>(h.rows);
        }
    }
    const double inv = 1.0 / static_cast<double>(chunks.size());
    for (double& v : emb.values) v *= inv;
    for (double v : emb.values)
        require(std::isfinite(v), Errc::InferenceFailure, "backend produced non-finite hidden state");

    if (unequal)
        log_diag("pooling note: unequal chunk lengths pooled with the unweighted chunk mean "
                 "(not duration-weighted)");
    return emb;
}

inline EmbeddingVector extract_embedding(const AudioClip& clip, EncoderBackend& backend) {
    require(clip.sample_rate_hz == kCanonicalRateHz, Errc::InvalidArgument,
            "embedding extraction expects 16 kHz input");
    const auto chunks = chunk_waveform(clip.samples);
    return encode_chunks(chunks, backend);
}

// ---------------------------------------------------------------------------
// Deterministic test doubles. "mix" is the bundled stand-in for the real
// encoder: each hidden dimension is a fixed random mixture of local window
// statistics, so embeddings respond to signal content and the chunked and
// full-sequence pooling paths agree on window-aligned splits.

inline constexpr std::size_t kStubWindow = 320;  // samples per hidden time step

class StubConstantBackend final : public EncoderBackend {
public:
    explicit StubConstantBackend(std::vector<double> value) : value_(std::move(value)) {
        require(value_.size() == kEmbeddingDim, Errc::InvalidArgument, "stub value must be 768-dim");
    }
    std::string name() const override { return "stub:constant"; }
    Matrix encode(std::span<const double> chunk) override {
        const std::size_t n_t = std::max<std::size_t>(1, chunk.size() / kStubWindow);
        Matrix h(n_t, kEmbeddingDim);
        for (std::size_t t = 0; t < n_t; ++t)
            std::copy(value_.begin(), value_.end(), h.row(t));
        return h;
    }

private:
    std::vector<double> value_;
};

class StubSampleMeanBackend final : public EncoderBackend {
public:
    std::string name() const override { return "stub:sample-mean"; }
    Matrix encode(std::span<const double> chunk) override {
        double mean = 0.0;
        for (double x : chunk) mean += x;
        mean /= static_cast<double>(chunk.size());
        const std::size_t n_t = std::max<std::size_t>(1, chunk.size() / kStubWindow);
        Matrix h(n_t, kEmbeddingDim);
        for (double& v : h.data) v = mean;
        return h;
    }
};

class StubMixBackend final : public EncoderBackend {
public:
    explicit StubMixBackend(std::uint64_t seed = 7) {
        SplitMix64 rng(seed);
        for (auto& c : coeff_)
            for (double& v : c) v = rng.next_double(-1.0, 1.0);
    }
    std::string name() const override { return "stub:mix"; }
    Matrix encode(std::span<const double> chunk) override {
        require(!chunk.empty(), Errc::InferenceFailure, "empty chunk");
        const std::size_t n_t = std::max<std::size_t>(1, chunk.size() / kStubWindow);
        Matrix h(n_t, kEmbeddingDim);
        for (std::size_t t = 0; t < n_t; ++t) {
            const std::size_t lo = t * kStubWindow;
            const std::size_t hi = (n_t == 1) ? chunk.size() : lo + kStubWindow;
            double mean = 0.0, rms = 0.0, rough = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                mean += chunk[i];
                rms += chunk[i] * chunk[i];
                if (i > lo) rough += std::abs(chunk[i] - chunk[i - 1]);
            }
            const double n = static_cast<double>(hi - lo);
            mean /= n;
            rms = std::sqrt(rms / n);
            rough /= n;
            double* row = h.row(t);
            for (std::size_t d = 0; d < kEmbeddingDim; ++d)
                row[d] = coeff_[0][d] * mean + coeff_[1][d] * rms + coeff_[2][d] * rough;
        }
        return h;
    }

private:
    std::array<std::array<double, kEmbeddingDim>, 3> coeff_{};
};

// Factory for the "stub:<name>" encoder URIs accepted by configs.
inline std::unique_ptr<EncoderBackend> make_stub_backend(const std::string& name) {
    if (name == "mix") return std::make_unique<StubMixBackend>();
    if (name == "sample-mean") return std::make_unique<StubSampleMeanBackend>();
    if (name == "constant")
        return std::make_unique<StubConstantBackend>(std::vector<double>(kEmbeddingDim, 1.0));
    raise(Errc::ConfigInvalid, "unknown stub backend '" + name + "'");
}

}  // namespace adspeech
