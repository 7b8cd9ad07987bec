// Temporally constrained rooted-subgraph sampling with per-relation fanout
// and uniform neighbor selection.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "griffin/common.hpp"
#include "griffin/graph.hpp"

namespace griffin {

struct SampleConfig {
    int hops = 2;        // sampling depth
    int fanout = 20;     // max neighbors per (parent, relation) per hop
    std::uint64_t seed = 0;
};

struct CellRef {
    int type = 0;
    std::int64_t row = 0;
    int column = 0;  // target column index within the table
};

// One materialized occurrence of a graph node inside the computation tree.
// Nodes reachable along several paths appear once per occurrence.
struct SubgraphNode {
    int hop = 0;
    int type = 0;
    std::int64_t row = 0;
    std::int64_t time = kNoTimestamp;
    int parent = -1;    // index into RootedSubgraph::nodes, -1 for the root
    int relation = -1;  // relation (graph.relations index) of the parent edge
};

// Children of one node grouped by the relation they were sampled through.
struct ChildGroup {
    int relation = 0;
    std::vector<int> children;  // indexes into RootedSubgraph::nodes
};

struct RootedSubgraph {
    CellRef root;
    std::int64_t cutoff = 0;
    std::vector<SubgraphNode> nodes;          // nodes[0] is the root, layered by hop
    std::vector<std::vector<ChildGroup>> children;  // aligned with nodes

    std::vector<int> layer(int hop) const;  // node indexes at the given hop
};

// Exact set {v adjacent to node via relation : t_v < cutoff}, ascending id.
std::vector<std::int64_t> eligible_neighbors(const HeteroGraph& graph, int type, std::int64_t node,
                                             const RelationAdj& relation, std::int64_t cutoff);

// Samples the layered subgraph around (root, cutoff). Per (parent, relation),
// up to cfg.fanout eligible neighbors are drawn uniformly without replacement.
// Deterministic given (graph, root, cutoff, cfg): the RNG stream is derived
// from hash(cfg.seed, root), so batch order and thread count cannot matter.
// The root's target column is recorded so enrichment can mask it.
RootedSubgraph sample_subgraph(const HeteroGraph& graph, const CellRef& root, std::int64_t cutoff,
                               const SampleConfig& cfg);

// Readable text tree of a sampled subgraph (sample-debug CLI).
std::string format_subgraph_tree(const RootedSubgraph& sg, const HeteroGraph& graph);

}  // namespace griffin
