#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace adspeech {

// Error categories. Each failure path raises one of these so callers can
// distinguish defects without parsing message text.
enum class Errc {
    FileMissing,
    MalformedWav,
    UnsupportedCodec,
    InvalidArgument,
    SchemaViolation,
    DimensionMismatch,
    LayoutMismatch,
    UnsupportedOperator,
    InferenceFailure,
    SingleClass,
    DegenerateInput,
    ConfigInvalid,
    Internal,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::FileMissing: return "file-missing";
        case Errc::MalformedWav: return "malformed-wav";
        case Errc::UnsupportedCodec: return "unsupported-codec";
        case Errc::InvalidArgument: return "invalid-argument";
        case Errc::SchemaViolation: return "schema-violation";
        case Errc::DimensionMismatch: return "dimension-mismatch";
        case Errc::LayoutMismatch: return "layout-mismatch";
        case Errc::UnsupportedOperator: return "unsupported-operator";
        case Errc::InferenceFailure: return "inference-failure";
        case Errc::SingleClass: return "single-class";
        case Errc::DegenerateInput: return "degenerate-input";
        case Errc::ConfigInvalid: return "config-invalid";
        case Errc::Internal: return "internal";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, Errc code, const std::string& msg) {
    if (!cond) raise(code, msg);
}

}  // namespace adspeech
