#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "adspeech/common/error.hpp"

namespace adspeech {

// FNV-1a, 64 bit. Used for stage caching keys and artifact fingerprints;
// collision resistance requirements are modest and speed matters.
class Fnv1a64 {
public:
    Fnv1a64& update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001B3ULL;
        }
        return *this;
    }

    Fnv1a64& update(const std::string& s) { return update(s.data(), s.size()); }

    std::uint64_t value() const { return h_; }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

private:
    std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

inline std::string hash_bytes_hex(const std::string& bytes) {
    return Fnv1a64().update(bytes).hex();
}

inline std::string hash_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::FileMissing, "cannot open file for hashing: " + path);
    Fnv1a64 h;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h.update(buf, static_cast<std::size_t>(in.gcount()));
    return h.hex();
}

}  // namespace adspeech
