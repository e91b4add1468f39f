#pragma once

#include <iostream>
#include <string>

namespace adspeech {

// Diagnostics channel. Notes that must be surfaced but never alter results
// (e.g. the unweighted-chunk-mean pooling note) go through here.
inline void log_diag(const std::string& msg) { std::clog << "[adspeech] " << msg << '\n'; }

}  // namespace adspeech
