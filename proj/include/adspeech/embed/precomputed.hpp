#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "adspeech/common/csv.hpp"
#include "adspeech/common/error.hpp"
#include "adspeech/embed/backend.hpp"

namespace adspeech {

inline std::string embedding_column_name(int i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "e%03d", i);
    return buf;
}

// Embedding table: header `id,e000..e767`, one embedding per row. The
// precomputed path makes the pipeline runnable without any encoder
// artifact.
struct EmbeddingTable {
    std::vector<std::pair<std::string, EmbeddingVector>> rows;  // insertion order

    const EmbeddingVector* find(const std::string& id) const {
        for (const auto& [rid, emb] : rows)
            if (rid == id) return &emb;
        return nullptr;
    }
};

inline EmbeddingTable load_precomputed(const std::string& path) {
    const CsvTable t = read_csv(path);
    require(t.header.size() == static_cast<std::size_t>(kEmbeddingDim) + 1, Errc::SchemaViolation,
            "embedding table must have id,e000..e767 columns: " + path);
    require(t.header[0] == "id", Errc::SchemaViolation, "embedding table header must start with id: " + path);

    EmbeddingTable table;
    std::map<std::string, bool> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& cells = t.rows[i];
        const std::string where = path + " row " + std::to_string(i + 1);
        require(cells.size() == t.header.size(), Errc::SchemaViolation,
                "wrong column count (" + std::to_string(cells.size() - 1) + " values) in " + where);
        const std::string& id = cells[0];
        require(!seen.count(id), Errc::SchemaViolation, "duplicate id '" + id + "' in " + where);
        seen[id] = true;
        EmbeddingVector emb;
        emb.source = EmbeddingSource::PrecomputedFile;
        emb.values.resize(kEmbeddingDim);
        for (int d = 0; d < kEmbeddingDim; ++d)
            emb.values[static_cast<std::size_t>(d)] = parse_double(cells[static_cast<std::size_t>(d) + 1], where);
        table.rows.emplace_back(id, std::move(emb));
    }
    return table;
}

inline void save_embedding_table(const std::string& path, const EmbeddingTable& table,
                                 const std::vector<std::string>& comments = {}) {
    AtomicFileWriter w(path);
    auto& out = w.stream();
    for (const auto& c : comments) out << c << '\n';
    out << "id";
    for (int d = 0; d < kEmbeddingDim; ++d) out << ',' << embedding_column_name(d);
    out << '\n';
    for (const auto& [id, emb] : table.rows) {
        out << id;
        for (double v : emb.values) out << ',' << format_double(v);
        out << '\n';
    }
    w.commit();
}

}  // namespace adspeech
