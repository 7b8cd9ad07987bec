#include <doctest.h>

#include <random>

#include "griffin/common.hpp"
#include "griffin/enrich.hpp"
#include "griffin/float_codec.hpp"
#include "griffin/sampler.hpp"
#include "helpers.hpp"

using namespace griffin;

namespace {

// One small pretrained codec for all enrichment tests.
const FloatCodec& tiny_codec() {
    static FloatCodec codec = [] {
        CodecPretrainConfig cfg;
        cfg.d = 16;
        cfg.hidden = 32;
        cfg.steps = 1200;
        cfg.batch_size = 64;
        cfg.tolerance = 0.2;  // fidelity does not matter here
        cfg.seed = 2;
        return pretrain_float_codec(cfg);
    }();
    return codec;
}

struct Fixture {
    testutil::UsersPurchases fx = testutil::make_users_purchases();
    HeteroGraph graph = build_graph(fx.frames, fx.manifest);
    ColumnEncoders encoders = ColumnEncoders::fit(fx.frames);
    std::shared_ptr<EmbeddingProvider> provider = EmbeddingProvider::stub(16);

    EnrichedSubgraph enrich_root(int root_type, std::int64_t row, int column,
                                 std::int64_t cutoff) {
        SampleConfig cfg;
        cfg.hops = 2;
        cfg.fanout = 10;
        cfg.seed = 7;
        const RootedSubgraph sg =
            sample_subgraph(graph, CellRef{root_type, row, column}, cutoff, cfg);
        return enrich(sg, fx.frames, fx.manifest, graph, *provider, tiny_codec(), encoders);
    }
};

}  // namespace

TEST_CASE("root excludes its target column; keys are never features") {
    Fixture f;
    // users: user_id(PK), segment, age. Target = segment (col 1) -> root keeps age only.
    const EnrichedSubgraph eg = f.enrich_root(0, 0, 1, 1000);
    CHECK(eg.cell_count(0) == 1);
    CHECK(eg.nodes[0].cell_columns == std::vector<int>{2});
    CHECK(eg.target_column_name == "segment");
    CHECK(eg.task_embedding == f.provider->embed("segment"));

    // purchase nodes keep amount + ts (keys excluded)
    for (std::size_t n = 1; n < eg.base.nodes.size(); ++n) {
        if (eg.base.nodes[n].type == 1) CHECK(eg.cell_count(static_cast<int>(n)) == 2);
    }
}

TEST_CASE("null cells are dropped from the feature tensor") {
    Fixture f;
    f.fx.frames[0].null_mask[2][0] = 1;  // null user 0's age
    const EnrichedSubgraph eg = f.enrich_root(0, 0, 1, 1000);
    CHECK(eg.cell_count(0) == 0);  // target excluded + age null -> no cells left
}

TEST_CASE("relation embeddings use the relation metadata text") {
    Fixture f;
    const EnrichedSubgraph eg = f.enrich_root(0, 0, 1, 1000);
    REQUIRE(!eg.relation_embeddings.empty());
    for (const auto& [rel, e] : eg.relation_embeddings) {
        CHECK(e == f.provider->embed(relation_metadata_text(f.graph.relations[rel], f.fx.manifest)));
    }
}

TEST_CASE("x and m rows stay aligned and sized d") {
    Fixture f;
    const EnrichedSubgraph eg = f.enrich_root(0, 0, 1, 1000);
    for (const EnrichedNode& node : eg.nodes) {
        CHECK(node.x.rows == node.m.rows);
        if (node.x.rows > 0) {
            CHECK(node.x.cols == 16);
            CHECK(node.m.cols == 16);
        }
        for (double v : node.x.data) CHECK(std::isfinite(v));
        for (double v : node.m.data) CHECK(std::isfinite(v));
    }
}

TEST_CASE("same subgraph with a different target column differs only in t") {
    Fixture f;
    // target segment vs target age on the same root row
    const EnrichedSubgraph a = f.enrich_root(0, 0, 1, 1000);
    const EnrichedSubgraph b = f.enrich_root(0, 0, 2, 1000);

    CHECK(a.task_embedding != b.task_embedding);
    // relation metadata and non-root features agree byte for byte
    for (std::size_t n = 1; n < a.nodes.size(); ++n) {
        CHECK(a.nodes[n].x.data == b.nodes[n].x.data);
        CHECK(a.nodes[n].m.data == b.nodes[n].m.data);
    }
    for (const auto& [rel, e] : a.relation_embeddings) {
        CHECK(b.relation_embeddings.at(rel) == e);
    }
}

TEST_CASE("enrichment is deterministic given fitted state") {
    Fixture f;
    const EnrichedSubgraph a = f.enrich_root(0, 0, 1, 1000);
    const EnrichedSubgraph b = f.enrich_root(0, 0, 1, 1000);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t n = 0; n < a.nodes.size(); ++n) {
        CHECK(a.nodes[n].x.data == b.nodes[n].x.data);
        CHECK(a.nodes[n].m.data == b.nodes[n].m.data);
    }
    CHECK(a.task_embedding == b.task_embedding);
}

TEST_CASE("cell encoding dispatches by declared kind") {
    Fixture f;
    const TableFrame& users = f.fx.frames[0];
    // categorical: template text
    CHECK(encode_cell(users, 1, 1, *f.provider, tiny_codec(), f.encoders) ==
          f.provider->embed("segment is plus"));
    // numerical: ENC of the normalized value
    const Vec num = encode_cell(users, 1, 2, *f.provider, tiny_codec(), f.encoders);
    CHECK(num == tiny_codec().encode(f.encoders.transform("users", "age", 44.0)));
    // keys refuse to encode
    CHECK_THROWS_AS(encode_cell(users, 1, 0, *f.provider, tiny_codec(), f.encoders),
                    ConsistencyError);
}

TEST_CASE("columns with too few values fall back to standardization") {
    auto fx = testutil::make_users_purchases();
    // make age single-valued: only row 0 non-null
    fx.frames[0].null_mask[2][1] = 1;
    fx.frames[0].null_mask[2][2] = 1;
    const ColumnEncoders enc = ColumnEncoders::fit(fx.frames);
    CHECK(enc.has("users", "age"));
    CHECK(std::isfinite(enc.transform("users", "age", 31.0)));
    CHECK(enc.transform("users", "age", 31.0) == 0.0);  // centered on the lone value
}
