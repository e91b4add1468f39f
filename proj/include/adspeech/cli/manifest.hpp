#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adspeech/common/csv.hpp"
#include "adspeech/common/error.hpp"

namespace adspeech {

// Corpus manifest: one row per clip, header `id,path,label,subject`.
// Labels are "ad"/"cn", or empty/"unknown" for unlabeled test manifests.
struct ManifestRow {
    std::string id;
    std::string path;
    std::optional<bool> label_ad;
    std::string subject;
};

struct CorpusManifest {
    std::vector<ManifestRow> rows;
    std::string base_dir;  // relative clip paths resolve against this

    std::string resolve_path(const ManifestRow& row) const {
        std::filesystem::path p(row.path);
        if (p.is_absolute() || base_dir.empty()) return row.path;
        return (std::filesystem::path(base_dir) / p).string();
    }
};

inline std::optional<bool> parse_label(const std::string& s, const std::string& where) {
    if (s == "ad") return true;
    if (s == "cn") return false;
    if (s.empty() || s == "unknown") return std::nullopt;
    raise(Errc::SchemaViolation, "label must be 'ad', 'cn', or 'unknown' in " + where);
}

inline std::string label_string(const std::optional<bool>& label) {
    if (!label.has_value()) return "";
    return *label ? "ad" : "cn";
}

inline CorpusManifest load_manifest(const std::string& path, bool require_labels) {
    const CsvTable t = read_csv(path);
    require(t.header == std::vector<std::string>({"id", "path", "label", "subject"}), Errc::SchemaViolation,
            "manifest header must be id,path,label,subject: " + path);
    CorpusManifest m;
    m.base_dir = std::filesystem::path(path).parent_path().string();
    std::map<std::string, bool> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& cells = t.rows[i];
        const std::string where = path + " row " + std::to_string(i + 1);
        require(cells.size() == 4, Errc::SchemaViolation, "manifest rows need 4 cells: " + where);
        ManifestRow r;
        r.id = cells[0];
        r.path = cells[1];
        r.label_ad = parse_label(cells[2], where);
        r.subject = cells[3];
        require(!r.id.empty(), Errc::SchemaViolation, "empty id in " + where);
        require(!seen.count(r.id), Errc::SchemaViolation, "duplicate id '" + r.id + "' in " + where);
        seen[r.id] = true;
        if (require_labels)
            require(r.label_ad.has_value(), Errc::SchemaViolation,
                    "training manifest requires a label for clip '" + r.id + "'");
        if (r.subject.empty()) r.subject = r.id;
        m.rows.push_back(std::move(r));
    }
    return m;
}

inline void save_manifest(const std::string& path, const CorpusManifest& m) {
    AtomicFileWriter w(path);
    auto& out = w.stream();
    out << "id,path,label,subject\n";
    for (const auto& r : m.rows)
        out << r.id << ',' << r.path << ',' << label_string(r.label_ad) << ',' << r.subject << '\n';
    w.commit();
}

}  // namespace adspeech
