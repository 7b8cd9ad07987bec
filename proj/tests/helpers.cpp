#include "helpers.hpp"

#include <algorithm>
#include <cmath>

namespace testutil {

using namespace griffin;

namespace {

Vec random_unit(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Vec v(d);
    double norm2 = 0.0;
    for (double& x : v) {
        x = dist(rng);
        norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
}

Mat random_cells(std::mt19937_64& rng, int rows, int d) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Mat out(rows, d);
    for (double& x : out.data) x = dist(rng) / std::sqrt(static_cast<double>(d));
    return out;
}

// Appends a node (with `cells` feature rows) as a child of `parent` through
// `relation`; returns its index.
int add_node(EnrichedSubgraph& eg, std::mt19937_64& rng, int parent, int relation, int cells) {
    const int idx = static_cast<int>(eg.base.nodes.size());
    SubgraphNode node;
    node.hop = parent < 0 ? 0 : eg.base.nodes[parent].hop + 1;
    node.type = 0;
    node.row = idx;
    node.parent = parent;
    node.relation = relation;
    eg.base.nodes.push_back(node);
    eg.base.children.emplace_back();

    EnrichedNode en;
    en.x = random_cells(rng, cells, eg.dimension);
    en.m = random_cells(rng, cells, eg.dimension);
    eg.nodes.push_back(std::move(en));

    if (parent >= 0) {
        auto& groups = eg.base.children[parent];
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const ChildGroup& g) { return g.relation == relation; });
        if (it == groups.end()) {
            groups.push_back(ChildGroup{relation, {idx}});
        } else {
            it->children.push_back(idx);
        }
        if (!eg.relation_embeddings.count(relation)) {
            eg.relation_embeddings.emplace(relation, random_unit(rng, eg.dimension));
        }
    }
    return idx;
}

}  // namespace

UsersPurchases make_users_purchases() {
    UsersPurchases fx;
    fx.manifest.name = "shop";

    TableSpec users;
    users.name = "users";
    users.columns = {col("user_id", SemanticKind::primary_key),
                     col("segment", SemanticKind::categorical),
                     col("age", SemanticKind::numerical)};
    fx.manifest.tables.push_back(users);

    TableSpec purchases;
    purchases.name = "purchases";
    purchases.time_column = "ts";
    purchases.columns = {col("purchase_id", SemanticKind::primary_key),
                         fk_col("user_id", "users", "user_id"),
                         col("amount", SemanticKind::numerical),
                         col("ts", SemanticKind::timestamp)};
    fx.manifest.tables.push_back(purchases);

    fx.manifest.relations.push_back({"purchases", "user_id", "users", "user_id"});
    validate_manifest(fx.manifest);

    TableFrame users_frame;
    users_frame.spec = users;
    users_frame.row_count = 3;
    users_frame.columns.resize(3);
    users_frame.columns[0].i64 = {0, 1, 2};
    users_frame.columns[1].str = {"basic", "plus", "basic"};
    users_frame.columns[2].f64 = {31.0, 44.0, 27.0};
    users_frame.null_mask.assign(3, std::vector<std::uint8_t>(3, 0));

    TableFrame purchases_frame;
    purchases_frame.spec = purchases;
    purchases_frame.row_count = 5;
    purchases_frame.columns.resize(4);
    purchases_frame.columns[0].i64 = {0, 1, 2, 3, 4};
    purchases_frame.columns[1].i64 = {0, 0, 1, 2, 2};
    purchases_frame.columns[2].f64 = {12.5, 3.0, 99.0, 5.5, 42.0};
    purchases_frame.columns[3].i64 = {100, 200, 300, 400, 500};
    purchases_frame.null_mask.assign(4, std::vector<std::uint8_t>(5, 0));

    fx.frames = {users_frame, purchases_frame};
    return fx;
}

std::vector<std::set<std::pair<int, std::int64_t>>> bfs_time_filtered_layers(
    const HeteroGraph& graph, int root_type, std::int64_t root_row, std::int64_t cutoff,
    int hops) {
    std::vector<std::set<std::pair<int, std::int64_t>>> layers(hops + 1);
    layers[0].insert({root_type, root_row});
    for (int h = 0; h < hops; ++h) {
        for (const auto& [type, row] : layers[h]) {
            for (const RelationAdj& rel : graph.relations) {
                if (rel.src_type != type) continue;
                for (std::int64_t e = rel.csr_offsets[row]; e < rel.csr_offsets[row + 1]; ++e) {
                    const std::int64_t v = rel.csr_targets[e];
                    if (graph.node_times[rel.dst_type][v] < cutoff) {
                        layers[h + 1].insert({rel.dst_type, v});
                    }
                }
            }
        }
    }
    return layers;
}

EnrichedSubgraph seven_node_fixture(std::mt19937_64& rng, int d) {
    EnrichedSubgraph eg;
    eg.dimension = d;
    eg.task_embedding = random_unit(rng, d);
    eg.target_column_name = "target";

    const int root = add_node(eg, rng, -1, -1, 3);
    const int n1 = add_node(eg, rng, root, 0, 2);
    add_node(eg, rng, root, 0, 0);  // n2: zero-cell node
    const int n3 = add_node(eg, rng, root, 1, 4);
    add_node(eg, rng, n1, 2, 1);
    add_node(eg, rng, n1, 2, 2);
    add_node(eg, rng, n3, 0, 3);
    eg.base.root = CellRef{0, 0, 0};
    return eg;
}

EnrichedSubgraph random_enriched_subgraph(std::mt19937_64& rng, int d, int max_children,
                                          int max_cells) {
    EnrichedSubgraph eg;
    eg.dimension = d;
    eg.task_embedding = random_unit(rng, d);
    eg.target_column_name = "target";

    auto cells = [&] { return static_cast<int>(rng() % (max_cells + 1)); };
    const int root = add_node(eg, rng, -1, -1, 1 + cells());
    std::vector<int> frontier{root};
    for (int hop = 0; hop < 2; ++hop) {
        std::vector<int> next;
        for (int parent : frontier) {
            const int n_groups = static_cast<int>(rng() % 3);
            for (int g = 0; g < n_groups; ++g) {
                const int relation = static_cast<int>(rng() % 4);
                const int n_children = 1 + static_cast<int>(rng() % max_children);
                for (int c = 0; c < n_children; ++c) {
                    next.push_back(add_node(eg, rng, parent, relation, cells()));
                }
            }
        }
        frontier = std::move(next);
    }
    eg.base.root = CellRef{0, 0, 0};
    return eg;
}

Vec naive_linear(const Mat& w, const Vec& b, const Vec& x) {
    Vec y(w.rows, 0.0);
    for (int o = 0; o < w.rows; ++o) {
        y[o] = b[o];
        for (int i = 0; i < w.cols; ++i) y[o] += w.at(o, i) * x[i];
    }
    return y;
}

Vec naive_mlp(const Linear& fc1, const Linear& fc2, const Vec& x) {
    Vec h = naive_linear(fc1.weight.value, fc1.bias.value.data, x);
    for (double& v : h) v = v / (1.0 + std::exp(-v));
    return naive_linear(fc2.weight.value, fc2.bias.value.data, h);
}

Vec naive_softmax(const Vec& logits) {
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    Vec p(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

void set_identity(Linear& lin) {
    std::fill(lin.weight.value.data.begin(), lin.weight.value.data.end(), 0.0);
    for (int i = 0; i < std::min(lin.in_dim(), lin.out_dim()); ++i) lin.weight.value.at(i, i) = 1.0;
    std::fill(lin.bias.value.data.begin(), lin.bias.value.data.end(), 0.0);
}

void randomize_params(std::vector<Param*> params, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> dist(0.0, scale);
    for (Param* p : params) {
        for (double& v : p->value.data) v = dist(rng);
    }
}

HeteroGraph random_graph(std::mt19937_64& rng, int max_types, std::int64_t max_nodes_per_type) {
    const int num_types = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_types - 1));
    HeteroGraph graph;
    for (int t = 0; t < num_types; ++t) {
        graph.node_type_names.push_back("t" + std::to_string(t));
        const std::int64_t n = 1 + static_cast<std::int64_t>(
                                       rng() % static_cast<std::uint64_t>(max_nodes_per_type));
        graph.node_counts.push_back(n);
        std::vector<std::int64_t> times(n);
        const bool timed = (rng() % 4) != 0;  // a quarter of the types are dimension-like
        for (std::int64_t i = 0; i < n; ++i) {
            times[i] = timed ? static_cast<std::int64_t>(rng() % 1000) : kNoTimestamp;
        }
        graph.node_times.push_back(std::move(times));
    }

    const int num_rel = 1 + static_cast<int>(rng() % 4);
    for (int r = 0; r < num_rel; ++r) {
        const int src = static_cast<int>(rng() % static_cast<std::uint64_t>(num_types));
        const int dst = static_cast<int>(rng() % static_cast<std::uint64_t>(num_types));
        std::vector<std::pair<std::int64_t, std::int64_t>> edges;
        const std::int64_t n_edges =
            static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(
                                          4 * std::max<std::int64_t>(graph.node_counts[src], 1)));
        for (std::int64_t e = 0; e < n_edges; ++e) {
            edges.emplace_back(static_cast<std::int64_t>(
                                   rng() % static_cast<std::uint64_t>(graph.node_counts[src])),
                               static_cast<std::int64_t>(
                                   rng() % static_cast<std::uint64_t>(graph.node_counts[dst])));
        }
        std::sort(edges.begin(), edges.end());

        RelationAdj fwd;
        fwd.name = "r" + std::to_string(r);
        fwd.src_type = src;
        fwd.dst_type = dst;
        fwd.direction = RelationDirection::forward;
        fwd.manifest_relation = r;
        fwd.csr_offsets.assign(graph.node_counts[src] + 1, 0);
        for (const auto& [s, d] : edges) {
            fwd.csr_offsets[s + 1] += 1;
            fwd.csr_targets.push_back(d);
        }
        for (std::int64_t i = 0; i < graph.node_counts[src]; ++i) {
            fwd.csr_offsets[i + 1] += fwd.csr_offsets[i];
        }
        graph.relations.push_back(std::move(fwd));

        RelationAdj rev;
        rev.name = "r" + std::to_string(r) + "_rev";
        rev.src_type = dst;
        rev.dst_type = src;
        rev.direction = RelationDirection::reversed;
        rev.manifest_relation = r;
        std::vector<std::pair<std::int64_t, std::int64_t>> redges;
        for (const auto& [s, d] : edges) redges.emplace_back(d, s);
        std::sort(redges.begin(), redges.end());
        rev.csr_offsets.assign(graph.node_counts[dst] + 1, 0);
        for (const auto& [s, d] : redges) {
            rev.csr_offsets[s + 1] += 1;
            rev.csr_targets.push_back(d);
        }
        for (std::int64_t i = 0; i < graph.node_counts[dst]; ++i) {
            rev.csr_offsets[i + 1] += rev.csr_offsets[i];
        }
        graph.relations.push_back(std::move(rev));
    }
    return graph;
}

}  // namespace testutil
