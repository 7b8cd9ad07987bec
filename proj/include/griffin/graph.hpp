// Heterogeneous temporal graph built from a loaded RDB: one node per row,
// one forward + one reversed relation per PK-FK pair, CSR adjacency.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "griffin/manifest.hpp"
#include "griffin/table.hpp"

namespace griffin {

enum class RelationDirection { forward, reversed };

struct RelationAdj {
    std::string name;
    int src_type = 0;
    int dst_type = 0;
    RelationDirection direction = RelationDirection::forward;
    int manifest_relation = 0;  // index into RdbManifest::relations
    std::vector<std::int64_t> csr_offsets;  // length src node count + 1, nondecreasing
    std::vector<std::int64_t> csr_targets;  // neighbors, ascending within each source row

    std::int64_t edge_count() const { return csr_offsets.empty() ? 0 : csr_offsets.back(); }
};

struct HeteroGraph {
    std::vector<std::string> node_type_names;   // table names
    std::vector<std::int64_t> node_counts;      // rows per table
    std::vector<RelationAdj> relations;         // forward relations first, then reverses
    std::vector<std::vector<std::int64_t>> node_times;  // per type, kNoTimestamp if untimed

    int num_types() const { return static_cast<int>(node_type_names.size()); }
    int type_index(const std::string& table) const;
    std::int64_t node_time(int type, std::int64_t node) const { return node_times[type][node]; }
};

// Row-to-node construction. One forward edge per non-null FK cell; every
// forward relation gets a reversed counterpart with swapped endpoints. Key
// columns stay out of node features (they live in the edge structure).
// Throws ConsistencyError when frames and manifest disagree.
HeteroGraph build_graph(const std::vector<TableFrame>& frames, const RdbManifest& manifest);

// Deterministic human-readable relation description used as e_r text, e.g.
// "edge from purchases via user_id to users"; reverses prepend "reverse of ".
std::string relation_metadata_text(const RelationAdj& rel, const RdbManifest& manifest);

// Binary snapshot (versioned header + little-endian arrays) for fast reload.
void save_graph_snapshot(const HeteroGraph& graph, const std::string& path);
HeteroGraph load_graph_snapshot(const std::string& path);

}  // namespace griffin
