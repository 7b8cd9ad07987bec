#include "griffin/graph.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "griffin/binio.hpp"
#include "griffin/common.hpp"

namespace griffin {

int HeteroGraph::type_index(const std::string& table) const {
    for (std::size_t i = 0; i < node_type_names.size(); ++i) {
        if (node_type_names[i] == table) return static_cast<int>(i);
    }
    return -1;
}

namespace {

RelationAdj csr_from_edges(std::vector<std::pair<std::int64_t, std::int64_t>>& edges,
                           std::int64_t src_count) {
    std::sort(edges.begin(), edges.end());
    RelationAdj adj;
    adj.csr_offsets.assign(src_count + 1, 0);
    adj.csr_targets.reserve(edges.size());
    for (const auto& [src, dst] : edges) {
        adj.csr_offsets[src + 1] += 1;
        adj.csr_targets.push_back(dst);
    }
    for (std::int64_t i = 0; i < src_count; ++i) {
        adj.csr_offsets[i + 1] += adj.csr_offsets[i];
    }
    return adj;
}

}  // namespace

HeteroGraph build_graph(const std::vector<TableFrame>& frames, const RdbManifest& manifest) {
    if (frames.size() != manifest.tables.size()) {
        throw ConsistencyError("frame count does not match manifest table count");
    }
    for (std::size_t t = 0; t < frames.size(); ++t) {
        if (frames[t].spec.name != manifest.tables[t].name) {
            throw ConsistencyError("frame order disagrees with manifest at table " +
                                   manifest.tables[t].name);
        }
        if (frames[t].spec.columns.size() != manifest.tables[t].columns.size()) {
            throw ConsistencyError("frame columns disagree with manifest for table " +
                                   manifest.tables[t].name);
        }
    }

    HeteroGraph graph;
    for (const TableFrame& frame : frames) {
        graph.node_type_names.push_back(frame.spec.name);
        graph.node_counts.push_back(frame.row_count);
        std::vector<std::int64_t> times(frame.row_count, kNoTimestamp);
        if (frame.spec.time_column) {
            for (std::int64_t r = 0; r < frame.row_count; ++r) times[r] = frame.row_time(r);
        }
        graph.node_times.push_back(std::move(times));
    }

    std::vector<RelationAdj> reversed;
    for (std::size_t ri = 0; ri < manifest.relations.size(); ++ri) {
        const Relation& rel = manifest.relations[ri];
        const int fk_tab = manifest.table_index(rel.fk_table);
        const int pk_tab = manifest.table_index(rel.pk_table);
        const int fk_col = manifest.tables[fk_tab].column_index(rel.fk_column);
        const int pk_col = manifest.tables[pk_tab].column_index(rel.pk_column);

        const TableFrame& target = frames[pk_tab];
        std::unordered_map<std::int64_t, std::int64_t> pk_to_row;
        pk_to_row.reserve(target.row_count);
        for (std::int64_t r = 0; r < target.row_count; ++r) {
            if (!target.is_null(r, pk_col)) pk_to_row.emplace(target.columns[pk_col].i64[r], r);
        }

        const TableFrame& source = frames[fk_tab];
        std::vector<std::pair<std::int64_t, std::int64_t>> fwd_edges;
        fwd_edges.reserve(source.row_count);
        for (std::int64_t r = 0; r < source.row_count; ++r) {
            if (source.is_null(r, fk_col)) continue;
            const auto it = pk_to_row.find(source.columns[fk_col].i64[r]);
            if (it == pk_to_row.end()) {
                throw ConsistencyError("unresolved FK cell reached build_graph at " + rel.fk_table +
                                       "." + rel.fk_column + " row " + std::to_string(r) +
                                       " (run load_tables validation first)");
            }
            fwd_edges.emplace_back(r, it->second);
        }

        std::vector<std::pair<std::int64_t, std::int64_t>> rev_edges;
        rev_edges.reserve(fwd_edges.size());
        for (const auto& [s, d] : fwd_edges) rev_edges.emplace_back(d, s);

        RelationAdj fwd = csr_from_edges(fwd_edges, source.row_count);
        fwd.name = rel.fk_table + "." + rel.fk_column + "->" + rel.pk_table;
        fwd.src_type = fk_tab;
        fwd.dst_type = pk_tab;
        fwd.direction = RelationDirection::forward;
        fwd.manifest_relation = static_cast<int>(ri);
        graph.relations.push_back(std::move(fwd));

        RelationAdj rev = csr_from_edges(rev_edges, target.row_count);
        rev.name = rel.pk_table + "<-" + rel.fk_table + "." + rel.fk_column;
        rev.src_type = pk_tab;
        rev.dst_type = fk_tab;
        rev.direction = RelationDirection::reversed;
        rev.manifest_relation = static_cast<int>(ri);
        reversed.push_back(std::move(rev));
    }
    for (RelationAdj& rel : reversed) graph.relations.push_back(std::move(rel));
    return graph;
}

std::string relation_metadata_text(const RelationAdj& rel, const RdbManifest& manifest) {
    const Relation& r = manifest.relations[rel.manifest_relation];
    std::string text = "edge from " + r.fk_table + " via " + r.fk_column + " to " + r.pk_table;
    if (rel.direction == RelationDirection::reversed) {
        text = "reverse of " + text;
    }
    return text;
}

// ---------------------------------------------------------------------------
// Snapshot format: magic "GRGS", u32 version, then length-prefixed strings and
// little-endian i64 arrays. Layout is documented in the README.

namespace {

constexpr char kSnapshotMagic[4] = {'G', 'R', 'G', 'S'};
constexpr std::uint32_t kSnapshotVersion = 1;

using namespace binio;

}  // namespace

void save_graph_snapshot(const HeteroGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write graph snapshot: " + path);
    out.write(kSnapshotMagic, 4);
    put_u32(out, kSnapshotVersion);
    put_u32(out, static_cast<std::uint32_t>(graph.num_types()));
    for (int t = 0; t < graph.num_types(); ++t) {
        put_string(out, graph.node_type_names[t]);
        put_i64(out, graph.node_counts[t]);
        put_i64_array(out, graph.node_times[t]);
    }
    put_u32(out, static_cast<std::uint32_t>(graph.relations.size()));
    for (const RelationAdj& rel : graph.relations) {
        put_string(out, rel.name);
        put_u32(out, static_cast<std::uint32_t>(rel.src_type));
        put_u32(out, static_cast<std::uint32_t>(rel.dst_type));
        put_u32(out, rel.direction == RelationDirection::forward ? 0u : 1u);
        put_u32(out, static_cast<std::uint32_t>(rel.manifest_relation));
        put_i64_array(out, rel.csr_offsets);
        put_i64_array(out, rel.csr_targets);
    }
    if (!out) throw IoError("write failed: " + path);
}

HeteroGraph load_graph_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open graph snapshot: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kSnapshotMagic, 4) != 0) {
        throw ParseError("not a graph snapshot: " + path);
    }
    const std::uint32_t version = get_u32(in);
    if (version != kSnapshotVersion) {
        throw ParseError("unsupported graph snapshot version " + std::to_string(version));
    }
    HeteroGraph graph;
    const std::uint32_t num_types = get_u32(in);
    for (std::uint32_t t = 0; t < num_types; ++t) {
        graph.node_type_names.push_back(get_string(in));
        graph.node_counts.push_back(get_i64(in));
        graph.node_times.push_back(get_i64_array(in));
    }
    const std::uint32_t num_rels = get_u32(in);
    for (std::uint32_t r = 0; r < num_rels; ++r) {
        RelationAdj rel;
        rel.name = get_string(in);
        rel.src_type = static_cast<int>(get_u32(in));
        rel.dst_type = static_cast<int>(get_u32(in));
        rel.direction = get_u32(in) == 0 ? RelationDirection::forward : RelationDirection::reversed;
        rel.manifest_relation = static_cast<int>(get_u32(in));
        rel.csr_offsets = get_i64_array(in);
        rel.csr_targets = get_i64_array(in);
        graph.relations.push_back(std::move(rel));
    }
    if (!in) throw ParseError("truncated graph snapshot: " + path);
    return graph;
}

}  // namespace griffin
