// Shared fixtures: small hand-built RDBs, temp directories, and test oracles.
#pragma once

#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "griffin/common.hpp"
#include "griffin/graph.hpp"
#include "griffin/manifest.hpp"
#include "griffin/table.hpp"

namespace testutil {

// Scoped temp directory under the system temp root.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = (std::filesystem::temp_directory_path() /
                 ("griffin_" + tag + "_" + std::to_string(std::random_device{}())))
                    .string();
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const { return path_ + "/" + name; }

private:
    std::string path_;
};

inline griffin::ColumnSpec col(const std::string& name, griffin::SemanticKind kind) {
    griffin::ColumnSpec c;
    c.name = name;
    c.semantic_kind = kind;
    return c;
}

inline griffin::ColumnSpec fk_col(const std::string& name, const std::string& table,
                                  const std::string& column) {
    griffin::ColumnSpec c;
    c.name = name;
    c.semantic_kind = griffin::SemanticKind::foreign_key;
    c.fk_target = griffin::FkTarget{table, column};
    return c;
}

// users(3 rows) <- purchases(5 rows): the hand-checked fixture from the module
// examples. Purchase user_id values: [0, 0, 1, 2, 2].
struct UsersPurchases {
    griffin::RdbManifest manifest;
    std::vector<griffin::TableFrame> frames;
};

UsersPurchases make_users_purchases();

// Writes one CSV per table of `frames` into dir.
inline void write_frames(const std::vector<griffin::TableFrame>& frames, const std::string& dir) {
    for (const auto& frame : frames) {
        griffin::write_table_csv(frame, dir + "/" + frame.spec.name + ".csv");
    }
}

// Brute-force layered BFS with the t < cutoff filter and no fanout cap.
// Returns per-hop sets of (type, row) pairs reachable from the root.
std::vector<std::set<std::pair<int, std::int64_t>>> bfs_time_filtered_layers(
    const griffin::HeteroGraph& graph, int root_type, std::int64_t root_row, std::int64_t cutoff,
    int hops);

// Random heterogeneous temporal graph for sampler property tests.
griffin::HeteroGraph random_graph(std::mt19937_64& rng, int max_types = 4,
                                  std::int64_t max_nodes_per_type = 40);

}  // namespace testutil

#include "griffin/enrich.hpp"

namespace testutil {

// Hand-built 7-node computation tree with mixed cell counts (one node has
// zero cells) and three relations; feature tensors drawn at random.
griffin::EnrichedSubgraph seven_node_fixture(std::mt19937_64& rng, int d);

// Random tree-shaped enriched subgraph for property tests.
griffin::EnrichedSubgraph random_enriched_subgraph(std::mt19937_64& rng, int d,
                                                   int max_children = 3, int max_cells = 5);

// Naive reference ops, independent of the library implementation.
griffin::Vec naive_linear(const griffin::Mat& w, const griffin::Vec& b, const griffin::Vec& x);
griffin::Vec naive_mlp(const griffin::Linear& fc1, const griffin::Linear& fc2,
                       const griffin::Vec& x);
griffin::Vec naive_softmax(const griffin::Vec& logits);

void set_identity(griffin::Linear& lin);
void randomize_params(std::vector<griffin::Param*> params, std::mt19937_64& rng, double scale);

}  // namespace testutil
