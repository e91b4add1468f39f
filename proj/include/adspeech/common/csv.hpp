#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "adspeech/common/error.hpp"

namespace adspeech {

// Full-precision decimal rendering: 17 significant digits round-trip any
// IEEE-754 double through strtod.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& context) {
    if (s.empty()) raise(Errc::SchemaViolation, "empty numeric cell in " + context);
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        raise(Errc::SchemaViolation, "non-numeric cell '" + s + "' in " + context);
    return v;
}

inline long parse_long(const std::string& s, const std::string& context) {
    if (s.empty()) raise(Errc::SchemaViolation, "empty integer cell in " + context);
    errno = 0;
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        raise(Errc::SchemaViolation, "non-integer cell '" + s + "' in " + context);
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

struct CsvTable {
    std::vector<std::string> comments;  // leading '#' lines, kept verbatim
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads a comma-separated table. Leading lines starting with '#' are
// collected as comments (artifact metadata lives there); the first
// non-comment line is the header. No quoting: cell values here are ids,
// labels, paths without commas, and numbers.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::FileMissing, "cannot open CSV file: " + path);
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header) {
            if (!line.empty() && line[0] == '#') {
                t.comments.push_back(line);
                continue;
            }
            t.header = split_csv_line(line);
            have_header = true;
            continue;
        }
        if (line.empty()) continue;
        t.rows.push_back(split_csv_line(line));
    }
    if (!have_header) raise(Errc::SchemaViolation, "CSV file has no header: " + path);
    return t;
}

// Atomic write: stream into <path>.tmp then rename over the target.
class AtomicFileWriter {
public:
    explicit AtomicFileWriter(std::string path) : path_(std::move(path)), tmp_(path_ + ".tmp") {
        out_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!out_) raise(Errc::FileMissing, "cannot open for writing: " + tmp_);
    }

    std::ofstream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) raise(Errc::Internal, "write failed: " + tmp_);
        out_.close();
        std::filesystem::rename(tmp_, path_);
        committed_ = true;
    }

    ~AtomicFileWriter() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }

private:
    std::string path_;
    std::string tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

}  // namespace adspeech
