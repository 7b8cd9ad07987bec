#include "griffin/sampler.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace griffin {

std::vector<int> RootedSubgraph::layer(int hop) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].hop == hop) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<std::int64_t> eligible_neighbors(const HeteroGraph& graph, int type, std::int64_t node,
                                             const RelationAdj& relation, std::int64_t cutoff) {
    std::vector<std::int64_t> out;
    if (relation.src_type != type) return out;
    const std::int64_t begin = relation.csr_offsets[node];
    const std::int64_t end = relation.csr_offsets[node + 1];
    const auto& times = graph.node_times[relation.dst_type];
    for (std::int64_t e = begin; e < end; ++e) {
        const std::int64_t v = relation.csr_targets[e];
        if (times[v] < cutoff) out.push_back(v);
    }
    // csr_targets are sorted per source row, so `out` is already ascending
    return out;
}

RootedSubgraph sample_subgraph(const HeteroGraph& graph, const CellRef& root, std::int64_t cutoff,
                               const SampleConfig& cfg) {
    if (root.type < 0 || root.type >= graph.num_types() || root.row < 0 ||
        root.row >= graph.node_counts[root.type]) {
        throw RootNotFound("root node (type " + std::to_string(root.type) + ", row " +
                           std::to_string(root.row) + ") does not exist");
    }

    RootedSubgraph sg;
    sg.root = root;
    sg.cutoff = cutoff;
    sg.nodes.push_back(SubgraphNode{0, root.type, root.row, graph.node_time(root.type, root.row),
                                    -1, -1});
    sg.children.emplace_back();

    // Per-example stream: batches stay order-independent and thread counts
    // cannot change the draw sequence.
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(root.type),
                                 static_cast<std::uint64_t>(root.row)));

    std::vector<int> frontier{0};
    std::vector<std::int64_t> picked;
    for (int hop = 0; hop < cfg.hops; ++hop) {
        std::vector<int> next_frontier;
        for (const int parent_idx : frontier) {
            const SubgraphNode parent = sg.nodes[parent_idx];
            for (std::size_t r = 0; r < graph.relations.size(); ++r) {
                const RelationAdj& rel = graph.relations[r];
                if (rel.src_type != parent.type) continue;
                std::vector<std::int64_t> eligible =
                    eligible_neighbors(graph, parent.type, parent.row, rel, cutoff);
                if (eligible.empty()) continue;

                picked.clear();
                if (static_cast<int>(eligible.size()) <= cfg.fanout) {
                    picked = eligible;
                } else {
                    // partial Fisher-Yates: first `fanout` slots are a uniform
                    // draw without replacement
                    for (int k = 0; k < cfg.fanout; ++k) {
                        std::uniform_int_distribution<std::size_t> pick(k, eligible.size() - 1);
                        std::swap(eligible[k], eligible[pick(rng)]);
                    }
                    picked.assign(eligible.begin(), eligible.begin() + cfg.fanout);
                    std::sort(picked.begin(), picked.end());
                }

                ChildGroup group;
                group.relation = static_cast<int>(r);
                for (const std::int64_t child_row : picked) {
                    const int child_idx = static_cast<int>(sg.nodes.size());
                    sg.nodes.push_back(SubgraphNode{hop + 1, rel.dst_type, child_row,
                                                    graph.node_time(rel.dst_type, child_row),
                                                    parent_idx, static_cast<int>(r)});
                    sg.children.emplace_back();
                    group.children.push_back(child_idx);
                    next_frontier.push_back(child_idx);
                }
                sg.children[parent_idx].push_back(std::move(group));
            }
        }
        frontier = std::move(next_frontier);
    }
    return sg;
}

std::string format_subgraph_tree(const RootedSubgraph& sg, const HeteroGraph& graph) {
    std::ostringstream out;
    out << "root " << graph.node_type_names[sg.root.type] << "[" << sg.root.row << "]"
        << " target_column=" << sg.root.column << " cutoff=" << sg.cutoff << "\n";

    // recursive print in sample order
    auto print_node = [&](auto&& self, int idx, int depth) -> void {
        const SubgraphNode& node = sg.nodes[idx];
        if (idx != 0) {
            for (int i = 0; i < depth; ++i) out << "  ";
            out << graph.node_type_names[node.type] << "[" << node.row << "]";
            if (node.time == kNoTimestamp) {
                out << " t=-inf";
            } else {
                out << " t=" << node.time;
            }
            out << " via " << graph.relations[node.relation].name;
            if (node.time != kNoTimestamp && node.time >= sg.cutoff) {
                out << "  ** CAUSALITY VIOLATION (t >= cutoff) **";
            }
            out << "\n";
        }
        for (const ChildGroup& group : sg.children[idx]) {
            for (const int child : group.children) self(self, child, depth + 1);
        }
    };
    print_node(print_node, 0, 0);

    std::vector<std::size_t> per_hop;
    for (const SubgraphNode& node : sg.nodes) {
        if (per_hop.size() <= static_cast<std::size_t>(node.hop)) per_hop.resize(node.hop + 1, 0);
        per_hop[node.hop] += 1;
    }
    out << "layers:";
    for (std::size_t h = 0; h < per_hop.size(); ++h) out << " L" << h << "=" << per_hop[h];
    out << "\n";
    return out.str();
}

}  // namespace griffin
