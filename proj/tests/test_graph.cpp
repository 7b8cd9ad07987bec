#include <doctest.h>

#include <algorithm>

#include "griffin/common.hpp"
#include "griffin/graph.hpp"
#include "helpers.hpp"

using namespace griffin;

TEST_CASE("users/purchases graph: 5 forward edges, reverse degrees match") {
    auto fx = testutil::make_users_purchases();
    const HeteroGraph g = build_graph(fx.frames, fx.manifest);

    REQUIRE(g.num_types() == 2);
    CHECK(g.node_counts[0] == 3);
    CHECK(g.node_counts[1] == 5);
    REQUIRE(g.relations.size() == 2);

    const RelationAdj& fwd = g.relations[0];
    CHECK(fwd.direction == RelationDirection::forward);
    CHECK(fwd.edge_count() == 5);
    // purchase 0,1 -> user 0; purchase 2 -> user 1; purchase 3,4 -> user 2
    CHECK(fwd.csr_targets == std::vector<std::int64_t>{0, 0, 1, 2, 2});

    const RelationAdj& rev = g.relations[1];
    CHECK(rev.direction == RelationDirection::reversed);
    CHECK(rev.edge_count() == 5);
    // user 0 has out-degree 2 in the reversed relation
    CHECK(rev.csr_offsets[1] - rev.csr_offsets[0] == 2);

    // reverse symmetry: (u,v) forward <=> (v,u) reversed
    std::vector<std::pair<std::int64_t, std::int64_t>> fwd_edges, rev_edges;
    for (std::int64_t s = 0; s < 5; ++s) {
        for (std::int64_t e = fwd.csr_offsets[s]; e < fwd.csr_offsets[s + 1]; ++e) {
            fwd_edges.emplace_back(s, fwd.csr_targets[e]);
        }
    }
    for (std::int64_t s = 0; s < 3; ++s) {
        for (std::int64_t e = rev.csr_offsets[s]; e < rev.csr_offsets[s + 1]; ++e) {
            rev_edges.emplace_back(rev.csr_targets[e], s);
        }
    }
    std::sort(fwd_edges.begin(), fwd_edges.end());
    std::sort(rev_edges.begin(), rev_edges.end());
    CHECK(fwd_edges == rev_edges);

    // node times: purchases timed, users get the -inf sentinel
    CHECK(g.node_times[0] == std::vector<std::int64_t>(3, kNoTimestamp));
    CHECK(g.node_times[1] == std::vector<std::int64_t>{100, 200, 300, 400, 500});
}

TEST_CASE("all-null FK column produces an empty but valid relation") {
    auto fx = testutil::make_users_purchases();
    std::fill(fx.frames[1].null_mask[1].begin(), fx.frames[1].null_mask[1].end(), 1);
    const HeteroGraph g = build_graph(fx.frames, fx.manifest);
    CHECK(g.relations[0].edge_count() == 0);
    CHECK(g.relations[1].edge_count() == 0);
    CHECK(g.relations[0].csr_offsets.size() == 6);
}

TEST_CASE("edge count equals non-null FK cells") {
    auto fx = testutil::make_users_purchases();
    fx.frames[1].null_mask[1][2] = 1;  // null one FK cell
    const HeteroGraph g = build_graph(fx.frames, fx.manifest);
    CHECK(g.relations[0].edge_count() == 4);
}

TEST_CASE("graph construction is deterministic") {
    auto fx = testutil::make_users_purchases();
    const HeteroGraph a = build_graph(fx.frames, fx.manifest);
    const HeteroGraph b = build_graph(fx.frames, fx.manifest);
    for (std::size_t r = 0; r < a.relations.size(); ++r) {
        CHECK(a.relations[r].csr_offsets == b.relations[r].csr_offsets);
        CHECK(a.relations[r].csr_targets == b.relations[r].csr_targets);
    }
}

TEST_CASE("frames/manifest disagreement raises ConsistencyError") {
    auto fx = testutil::make_users_purchases();
    fx.frames.pop_back();
    CHECK_THROWS_AS(build_graph(fx.frames, fx.manifest), ConsistencyError);
}

TEST_CASE("relation metadata text matches the documented template") {
    auto fx = testutil::make_users_purchases();
    const HeteroGraph g = build_graph(fx.frames, fx.manifest);
    CHECK(relation_metadata_text(g.relations[0], fx.manifest) ==
          "edge from purchases via user_id to users");
    CHECK(relation_metadata_text(g.relations[1], fx.manifest) ==
          "reverse of edge from purchases via user_id to users");
}

TEST_CASE("self-referencing FK builds a valid relation and metadata text") {
    RdbManifest m;
    m.name = "org";
    TableSpec employees;
    employees.name = "employees";
    employees.columns = {testutil::col("emp_id", SemanticKind::primary_key),
                         testutil::fk_col("manager_id", "employees", "emp_id")};
    m.tables.push_back(employees);
    m.relations.push_back({"employees", "manager_id", "employees", "emp_id"});
    validate_manifest(m);

    TableFrame frame;
    frame.spec = employees;
    frame.row_count = 3;
    frame.columns.resize(2);
    frame.columns[0].i64 = {0, 1, 2};
    frame.columns[1].i64 = {0, 0, 1};  // 0 manages itself
    frame.null_mask.assign(2, std::vector<std::uint8_t>(3, 0));

    const HeteroGraph g = build_graph({frame}, m);
    CHECK(g.relations[0].edge_count() == 3);
    CHECK(g.relations[0].src_type == g.relations[0].dst_type);
    CHECK(relation_metadata_text(g.relations[0], m) ==
          "edge from employees via manager_id to employees");
}

TEST_CASE("rel-f1-shaped manifest yields 9 node types and 16 relations") {
    // 9 tables, 8 FKs: after adding reverses the graph carries 16 relations.
    RdbManifest m;
    m.name = "shape";
    TableSpec hub;
    hub.name = "hub";
    hub.columns = {testutil::col("id", SemanticKind::primary_key)};
    m.tables.push_back(hub);
    std::vector<TableFrame> frames;
    TableFrame hub_frame;
    hub_frame.spec = hub;
    hub_frame.row_count = 2;
    hub_frame.columns.resize(1);
    hub_frame.columns[0].i64 = {0, 1};
    hub_frame.null_mask.assign(1, std::vector<std::uint8_t>(2, 0));
    frames.push_back(hub_frame);

    for (int t = 1; t <= 8; ++t) {
        TableSpec spoke;
        spoke.name = "s" + std::to_string(t);
        spoke.columns = {testutil::col("id", SemanticKind::primary_key),
                         testutil::fk_col("hub_id", "hub", "id")};
        m.tables.push_back(spoke);
        m.relations.push_back({spoke.name, "hub_id", "hub", "id"});
        TableFrame f;
        f.spec = spoke;
        f.row_count = 1;
        f.columns.resize(2);
        f.columns[0].i64 = {0};
        f.columns[1].i64 = {1};
        f.null_mask.assign(2, std::vector<std::uint8_t>(1, 0));
        frames.push_back(f);
    }
    validate_manifest(m);
    const HeteroGraph g = build_graph(frames, m);
    CHECK(g.num_types() == 9);
    CHECK(g.relations.size() == 16);
    int forward = 0, reversed = 0;
    for (const auto& rel : g.relations) {
        (rel.direction == RelationDirection::forward ? forward : reversed) += 1;
    }
    CHECK(forward == 8);
    CHECK(reversed == 8);
}

TEST_CASE("graph snapshot round trips") {
    auto fx = testutil::make_users_purchases();
    const HeteroGraph g = build_graph(fx.frames, fx.manifest);
    testutil::TempDir dir("snapshot");
    save_graph_snapshot(g, dir.file("g.bin"));
    const HeteroGraph loaded = load_graph_snapshot(dir.file("g.bin"));
    CHECK(loaded.node_type_names == g.node_type_names);
    CHECK(loaded.node_counts == g.node_counts);
    CHECK(loaded.node_times == g.node_times);
    REQUIRE(loaded.relations.size() == g.relations.size());
    for (std::size_t r = 0; r < g.relations.size(); ++r) {
        CHECK(loaded.relations[r].name == g.relations[r].name);
        CHECK(loaded.relations[r].csr_offsets == g.relations[r].csr_offsets);
        CHECK(loaded.relations[r].csr_targets == g.relations[r].csr_targets);
        CHECK(loaded.relations[r].direction == g.relations[r].direction);
    }
}
