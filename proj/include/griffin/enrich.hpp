// Turns a sampled subgraph into tensors: per-node cell features x_i and
// column-name metadata m_i, per-relation metadata e_r, and the task embedding.
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "griffin/embedding.hpp"
#include "griffin/float_codec.hpp"
#include "griffin/graph.hpp"
#include "griffin/nn.hpp"
#include "griffin/quantile.hpp"
#include "griffin/sampler.hpp"

namespace griffin {

// Fitted per-column quantile normalizers for numerical and timestamp columns.
// Columns that cannot be fitted (under 2 finite values) fall back to an
// identity-with-standardization scaler.
class ColumnEncoders {
public:
    static std::string key(const std::string& table, const std::string& column) {
        return table + "." + column;
    }

    // Fits every numerical/timestamp column over the given frames.
    static ColumnEncoders fit(const std::vector<TableFrame>& frames, int n_quantiles = 1000);

    bool has(const std::string& table, const std::string& column) const;
    // Normalized value of a raw cell.
    double transform(const std::string& table, const std::string& column, double raw) const;

    const std::unordered_map<std::string, QuantileNormalizer>& normalizers() const {
        return normalizers_;
    }
    std::unordered_map<std::string, QuantileNormalizer>& normalizers() { return normalizers_; }

private:
    struct Standardizer {
        double mean = 0.0;
        double scale = 1.0;
    };
    std::unordered_map<std::string, QuantileNormalizer> normalizers_;
    std::unordered_map<std::string, Standardizer> fallbacks_;
};

struct EnrichedNode {
    Mat x;  // L_i x d cell features
    Mat m;  // L_i x d column-name embeddings
    std::vector<int> cell_columns;  // source column index per cell row
};

struct EnrichedSubgraph {
    RootedSubgraph base;
    int dimension = 0;
    std::vector<EnrichedNode> nodes;                  // aligned with base.nodes
    std::unordered_map<int, Vec> relation_embeddings;  // relation id -> e_r
    Vec task_embedding;
    std::string target_column_name;

    int cell_count(int node) const { return nodes[node].x.rows; }
};

// Encodes one cell of a frame to a d-vector by its declared kind. Used by
// enrichment and as the completion-pretraining target embedding.
Vec encode_cell(const TableFrame& frame, std::int64_t row, int column,
                const EmbeddingProvider& provider, const FloatCodec& codec,
                const ColumnEncoders& encoders);

// Builds x_i / m_i / e_r / t for a sampled subgraph. Key columns, null cells
// and (at the root) the target column are excluded. Cell row order carries no
// meaning; the model must be permutation-invariant over it.
// Encoder failures are rethrown with the cell location attached.
EnrichedSubgraph enrich(const RootedSubgraph& sg, const std::vector<TableFrame>& frames,
                        const RdbManifest& manifest, const HeteroGraph& graph,
                        const EmbeddingProvider& provider, const FloatCodec& codec,
                        const ColumnEncoders& encoders);

}  // namespace griffin
