#include "griffin/enrich.hpp"

#include <cmath>

#include "griffin/common.hpp"

namespace griffin {

ColumnEncoders ColumnEncoders::fit(const std::vector<TableFrame>& frames, int n_quantiles) {
    ColumnEncoders enc;
    for (const TableFrame& frame : frames) {
        for (std::size_t c = 0; c < frame.spec.columns.size(); ++c) {
            const ColumnSpec& col = frame.spec.columns[c];
            if (col.semantic_kind != SemanticKind::numerical &&
                col.semantic_kind != SemanticKind::timestamp) {
                continue;
            }
            std::vector<double> values;
            values.reserve(frame.row_count);
            for (std::int64_t r = 0; r < frame.row_count; ++r) {
                if (frame.is_null(r, static_cast<int>(c))) continue;
                values.push_back(col.semantic_kind == SemanticKind::numerical
                                     ? frame.columns[c].f64[r]
                                     : static_cast<double>(frame.columns[c].i64[r]));
            }
            const std::string k = key(frame.spec.name, col.name);
            try {
                enc.normalizers_.emplace(k, QuantileNormalizer::fit(values, n_quantiles));
            } catch (const InsufficientData&) {
                Standardizer fb;
                if (!values.empty()) fb.mean = values[0];
                enc.fallbacks_.emplace(k, fb);
            }
        }
    }
    return enc;
}

bool ColumnEncoders::has(const std::string& table, const std::string& column) const {
    const std::string k = key(table, column);
    return normalizers_.count(k) > 0 || fallbacks_.count(k) > 0;
}

double ColumnEncoders::transform(const std::string& table, const std::string& column,
                                 double raw) const {
    const std::string k = key(table, column);
    const auto it = normalizers_.find(k);
    if (it != normalizers_.end()) return it->second.transform(raw);
    const auto fb = fallbacks_.find(k);
    if (fb == fallbacks_.end()) {
        throw NotFitted("no fitted normalizer for column " + k);
    }
    return (raw - fb->second.mean) / fb->second.scale;
}

Vec encode_cell(const TableFrame& frame, std::int64_t row, int column,
                const EmbeddingProvider& provider, const FloatCodec& codec,
                const ColumnEncoders& encoders) {
    const ColumnSpec& col = frame.spec.columns[column];
    switch (col.semantic_kind) {
        case SemanticKind::numerical:
            return codec.encode(
                encoders.transform(frame.spec.name, col.name, frame.columns[column].f64[row]));
        case SemanticKind::categorical:
            return encode_categorical(provider, col.name, frame.columns[column].str[row]);
        case SemanticKind::text:
            return provider.embed(frame.columns[column].str[row]);
        case SemanticKind::timestamp: {
            const std::int64_t epoch = frame.columns[column].i64[row];
            Vec v = provider.embed(timestamp_description(epoch));
            const Vec num = codec.encode(
                encoders.transform(frame.spec.name, col.name, static_cast<double>(epoch)));
            axpy(1.0, num, v);
            return v;
        }
        case SemanticKind::primary_key:
        case SemanticKind::foreign_key:
            throw ConsistencyError("key column " + frame.spec.name + "." + col.name +
                                   " is not encodable");
    }
    throw ConsistencyError("unreachable");
}

EnrichedSubgraph enrich(const RootedSubgraph& sg, const std::vector<TableFrame>& frames,
                        const RdbManifest& manifest, const HeteroGraph& graph,
                        const EmbeddingProvider& provider, const FloatCodec& codec,
                        const ColumnEncoders& encoders) {
    EnrichedSubgraph eg;
    eg.base = sg;
    eg.dimension = provider.dimension();
    eg.nodes.resize(sg.nodes.size());

    for (std::size_t n = 0; n < sg.nodes.size(); ++n) {
        const SubgraphNode& node = sg.nodes[n];
        const TableFrame& frame = frames[node.type];
        EnrichedNode& out = eg.nodes[n];

        std::vector<Vec> xs, ms;
        for (std::size_t c = 0; c < frame.spec.columns.size(); ++c) {
            const ColumnSpec& col = frame.spec.columns[c];
            if (is_key_kind(col.semantic_kind)) continue;
            if (frame.is_null(node.row, static_cast<int>(c))) continue;
            if (n == 0 && static_cast<int>(c) == sg.root.column) continue;  // masked target
            try {
                xs.push_back(encode_cell(frame, node.row, static_cast<int>(c), provider, codec,
                                         encoders));
            } catch (const Error& e) {
                throw Error(e.category(), std::string(e.what()) + " (cell " + frame.spec.name +
                                              "." + col.name + " row " +
                                              std::to_string(node.row) + ")");
            }
            ms.push_back(provider.embed(frame.spec.name + "." + col.name));
            out.cell_columns.push_back(static_cast<int>(c));
        }
        out.x = Mat(static_cast<int>(xs.size()), eg.dimension);
        out.m = Mat(static_cast<int>(ms.size()), eg.dimension);
        for (std::size_t r = 0; r < xs.size(); ++r) {
            std::copy(xs[r].begin(), xs[r].end(), out.x.row(static_cast<int>(r)));
            std::copy(ms[r].begin(), ms[r].end(), out.m.row(static_cast<int>(r)));
        }
    }

    for (const auto& groups : sg.children) {
        for (const ChildGroup& group : groups) {
            if (eg.relation_embeddings.count(group.relation)) continue;
            eg.relation_embeddings.emplace(
                group.relation,
                provider.embed(relation_metadata_text(graph.relations[group.relation], manifest)));
        }
    }

    eg.target_column_name = frames[sg.root.type].spec.columns[sg.root.column].name;
    eg.task_embedding = provider.embed(eg.target_column_name);
    return eg;
}

}  // namespace griffin
