#pragma once

#include <array>
#include <string>
#include <vector>

#include "adspeech/common/error.hpp"
#include "adspeech/dsp/features.hpp"
#include "adspeech/embed/backend.hpp"
#include "adspeech/embed/precomputed.hpp"

namespace adspeech {

inline constexpr int kFusedDim = kFeatureDim + kEmbeddingDim;  // 936

// Concatenation at sample level: features at 0-167, embedding at 168-935.
inline std::vector<double> fuse(const std::string& feature_id, const FeatureVector& features,
                                const std::string& embedding_id, const EmbeddingVector& embedding) {
    require(feature_id == embedding_id, Errc::InvalidArgument,
            "fusing mismatched clips: '" + feature_id + "' vs '" + embedding_id + "'");
    require(embedding.values.size() == kEmbeddingDim, Errc::DimensionMismatch,
            "embedding must be 768-dimensional");
    std::vector<double> out(kFusedDim);
    std::copy(features.values.begin(), features.values.end(), out.begin());
    std::copy(embedding.values.begin(), embedding.values.end(), out.begin() + kFeatureDim);
    return out;
}

// Fused table: header `id,label,f000..f167,e000..e767`.
struct FusedRow {
    std::string id;
    std::string label;
    std::vector<double> values;  // kFusedDim
};

inline void write_fused_table(const std::string& path, const std::vector<FusedRow>& rows,
                              const std::vector<std::string>& comments = {}) {
    AtomicFileWriter w(path);
    auto& out = w.stream();
    for (const auto& c : comments) out << c << '\n';
    out << "id,label";
    for (int i = 0; i < kFeatureDim; ++i) out << ',' << feature_column_name(i);
    for (int i = 0; i < kEmbeddingDim; ++i) out << ',' << embedding_column_name(i);
    out << '\n';
    for (const auto& r : rows) {
        out << r.id << ',' << r.label;
        for (double v : r.values) out << ',' << format_double(v);
        out << '\n';
    }
    w.commit();
}

inline std::vector<FusedRow> load_fused_table(const std::string& path) {
    const CsvTable t = read_csv(path);
    require(t.header.size() == static_cast<std::size_t>(kFusedDim) + 2, Errc::SchemaViolation,
            "fused table must have id,label,f000..f167,e000..e767 columns: " + path);
    std::vector<FusedRow> rows;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& cells = t.rows[i];
        const std::string where = path + " row " + std::to_string(i + 1);
        require(cells.size() == t.header.size(), Errc::SchemaViolation, "wrong column count in " + where);
        FusedRow r;
        r.id = cells[0];
        r.label = cells[1];
        r.values.resize(kFusedDim);
        for (int c = 0; c < kFusedDim; ++c)
            r.values[static_cast<std::size_t>(c)] = parse_double(cells[static_cast<std::size_t>(c) + 2], where);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace adspeech
