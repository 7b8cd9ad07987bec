#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "griffin/common.hpp"
#include "griffin/model.hpp"
#include "helpers.hpp"

using namespace griffin;
using testutil::naive_linear;
using testutil::naive_mlp;
using testutil::naive_softmax;
using testutil::set_identity;

namespace {

GriffinConfig small_config(int d = 8, int layers = 2, int heads = 2) {
    GriffinConfig cfg;
    cfg.d = d;
    cfg.layers = layers;
    cfg.heads = heads;
    cfg.dropout = 0.0;
    return cfg;
}

double max_abs_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("cross attention with one cell has weight exactly 1") {
    GriffinModel model = GriffinModel::init(small_config(8, 2, 2), 42);
    std::mt19937_64 rng(9);
    testutil::randomize_params(model.parameters(), rng, 0.4);

    std::normal_distribution<double> dist(0.0, 1.0);
    Mat m(1, 8), x(1, 8);
    for (double& v : m.data) v = dist(rng);
    for (double& v : x.data) v = dist(rng);
    Vec u(8), t(8);
    for (double& v : u) v = dist(rng);
    for (double& v : t) v = dist(rng);

    const Vec got = cross_attention(model, 1, u, t, m, x);

    // softmax over a single key is 1, so v = output(value(x_0)) regardless of q
    const CrossAttentionParams& p = model.layers[1].attn;
    const Vec value = naive_linear(p.value.weight.value, p.value.bias.value.data,
                                   Vec(x.row(0), x.row(0) + 8));
    const Vec expected = naive_linear(p.output.weight.value, p.output.bias.value.data, value);
    CHECK(max_abs_diff(got, expected) <= 1e-12);
}

TEST_CASE("cross attention with two cells matches the brute-force softmax") {
    // identity projections, single head: v = w0*x0 + w1*x1 with
    // w = softmax(q . m_j / sqrt(d))
    GriffinConfig cfg = small_config(4, 2, 1);
    GriffinModel model = GriffinModel::init(cfg, 1);
    CrossAttentionParams& p = model.layers[1].attn;
    set_identity(p.key);
    set_identity(p.value);
    set_identity(p.output);
    // qmlp: fc1 zero weights with chosen bias, fc2 identity -> q = silu(bias)
    std::fill(p.qmlp.fc1.weight.value.data.begin(), p.qmlp.fc1.weight.value.data.end(), 0.0);
    const Vec bias = {0.3, -1.2, 2.0, 0.0};
    p.qmlp.fc1.bias.value.data = bias;
    set_identity(p.qmlp.fc2);

    Mat m(2, 4), x(2, 4);
    const Vec m0 = {1.0, 0.0, -1.0, 0.5}, m1 = {0.2, 0.8, 0.4, -0.3};
    const Vec x0 = {2.0, -1.0, 0.0, 1.0}, x1 = {-0.5, 0.5, 1.5, -2.0};
    std::copy(m0.begin(), m0.end(), m.row(0));
    std::copy(m1.begin(), m1.end(), m.row(1));
    std::copy(x0.begin(), x0.end(), x.row(0));
    std::copy(x1.begin(), x1.end(), x.row(1));

    const Vec u(4, 0.0), t(4, 0.0);
    const Vec got = cross_attention(model, 1, u, t, m, x);

    Vec q(4);
    for (int i = 0; i < 4; ++i) q[i] = bias[i] / (1.0 + std::exp(-bias[i]));
    double l0 = 0.0, l1 = 0.0;
    for (int i = 0; i < 4; ++i) {
        l0 += q[i] * m0[i];
        l1 += q[i] * m1[i];
    }
    const Vec w = naive_softmax({l0 / 2.0, l1 / 2.0});  // sqrt(d)=2
    for (int i = 0; i < 4; ++i) {
        CHECK(got[i] == doctest::Approx(w[0] * x0[i] + w[1] * x1[i]).epsilon(1e-12));
    }
}

TEST_CASE("cross attention is invariant to cell permutation") {
    GriffinModel model = GriffinModel::init(small_config(8, 2, 2), 3);
    std::mt19937_64 rng(4);
    testutil::randomize_params(model.parameters(), rng, 0.4);
    std::normal_distribution<double> dist(0.0, 1.0);

    Mat m(2, 8), x(2, 8);
    for (double& v : m.data) v = dist(rng);
    for (double& v : x.data) v = dist(rng);
    Vec u(8), t(8);
    for (double& v : u) v = dist(rng);
    for (double& v : t) v = dist(rng);

    const Vec a = cross_attention(model, 1, u, t, m, x);
    Mat m2(2, 8), x2(2, 8);
    for (int c = 0; c < 8; ++c) {
        m2.at(0, c) = m.at(1, c);
        m2.at(1, c) = m.at(0, c);
        x2.at(0, c) = x.at(1, c);
        x2.at(1, c) = x.at(0, c);
    }
    const Vec b = cross_attention(model, 1, u, t, m2, x2);
    CHECK(max_abs_diff(a, b) <= 1e-6);
}

TEST_CASE("self attention single cell reduces to the value projection") {
    GriffinConfig cfg = small_config(4, 2, 1);
    GriffinModel model = GriffinModel::init(cfg, 7);
    set_identity(model.first_self.query);
    set_identity(model.first_self.key);
    set_identity(model.first_self.value);
    set_identity(model.first_self.output);

    Mat m(1, 4), x(1, 4);
    const Vec x0 = {0.5, -1.0, 2.0, 0.25};
    const Vec m0 = {1.0, 1.0, 0.0, -1.0};
    std::copy(x0.begin(), x0.end(), x.row(0));
    std::copy(m0.begin(), m0.end(), m.row(0));

    const Vec got = self_attention_first_layer(model, m, x);
    CHECK(max_abs_diff(got, x0) <= 1e-12);
}

TEST_CASE("self attention with zero cells returns the zero vector") {
    GriffinModel model = GriffinModel::init(small_config(8, 2, 2), 7);
    const Vec got = self_attention_first_layer(model, Mat(0, 0), Mat(0, 0));
    CHECK(got == Vec(8, 0.0));
}

TEST_CASE("self attention with three cells matches a brute-force 3x3 softmax + mean") {
    GriffinConfig cfg = small_config(4, 2, 1);
    GriffinModel model = GriffinModel::init(cfg, 11);
    set_identity(model.first_self.query);
    set_identity(model.first_self.key);
    set_identity(model.first_self.value);
    set_identity(model.first_self.output);

    std::mt19937_64 rng(12);
    std::normal_distribution<double> dist(0.0, 1.0);
    Mat m(3, 4), x(3, 4);
    for (double& v : m.data) v = dist(rng);
    for (double& v : x.data) v = dist(rng);

    const Vec got = self_attention_first_layer(model, m, x);

    // oracle: s = m + x; w_ab = softmax_b(s_a . s_b / 2); out_a = sum_b w_ab x_b
    Mat s(3, 4);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) s.at(r, c) = m.at(r, c) + x.at(r, c);
    }
    Vec expected(4, 0.0);
    for (int a = 0; a < 3; ++a) {
        Vec logits(3, 0.0);
        for (int b = 0; b < 3; ++b) {
            for (int c = 0; c < 4; ++c) logits[b] += s.at(a, c) * s.at(b, c);
            logits[b] /= 2.0;  // sqrt(4)
        }
        const Vec w = naive_softmax(logits);
        for (int b = 0; b < 3; ++b) {
            for (int c = 0; c < 4; ++c) expected[c] += w[b] * x.at(b, c) / 3.0;
        }
    }
    CHECK(max_abs_diff(got, expected) <= 1e-12);
}

TEST_CASE("aggregate_relation: mean of transformed neighbors, empty set is zero") {
    GriffinModel model = GriffinModel::init(small_config(8, 2, 2), 21);
    std::mt19937_64 rng(22);
    testutil::randomize_params(model.parameters(), rng, 0.5);

    CHECK(aggregate_relation(model, 0, {}) == Vec(8, 0.0));

    std::normal_distribution<double> dist(0.0, 1.0);
    Vec u1(8), u2(8), u3(8);
    for (double& v : u1) v = dist(rng);
    for (double& v : u2) v = dist(rng);
    for (double& v : u3) v = dist(rng);

    const Mlp& amlp = model.layers[0].amlp;
    const Vec single = aggregate_relation(model, 0, {u1});
    CHECK(max_abs_diff(single, naive_mlp(amlp.fc1, amlp.fc2, u1)) <= 1e-12);

    const Vec mean3 = aggregate_relation(model, 0, {u1, u2, u3});
    const Vec o1 = naive_mlp(amlp.fc1, amlp.fc2, u1);
    const Vec o2 = naive_mlp(amlp.fc1, amlp.fc2, u2);
    const Vec o3 = naive_mlp(amlp.fc1, amlp.fc2, u3);
    for (int c = 0; c < 8; ++c) {
        CHECK(mean3[c] == doctest::Approx((o1[c] + o2[c] + o3[c]) / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("aggregate_across_relations: gated max, degenerate cases") {
    const Vec h1 = {1.0, -2.0, 0.5}, e1 = {0.5, 1.0, -1.0};
    const Vec h2 = {0.2, 3.0, 1.0}, e2 = {1.0, -1.0, 0.25};

    CHECK(aggregate_across_relations({}, {}, false, 3) == Vec(3, 0.0));

    const Vec single = aggregate_across_relations({h1}, {e1}, false, 3);
    CHECK(single == Vec{0.5, -2.0, -0.5});  // exactly h1*e1, no clipping at zero

    const Vec both = aggregate_across_relations({h1, h2}, {e1, e2}, false, 3);
    // coordinatewise max of (0.5,-2.0,-0.5) and (0.2,-3.0,0.25)
    CHECK(both == Vec{0.5, -2.0, 0.25});

    const Vec mean = aggregate_across_relations({h1, h2}, {e1, e2}, true, 3);
    CHECK(mean == Vec{(0.5 + 0.2) / 2, (-2.0 + -3.0) / 2, (-0.5 + 0.25) / 2});
}

TEST_CASE("forward on an isolated all-masked root returns z = 0") {
    std::mt19937_64 rng(31);
    EnrichedSubgraph eg;
    eg.dimension = 8;
    eg.task_embedding = Vec(8, 0.1);
    SubgraphNode root;
    eg.base.nodes.push_back(root);
    eg.base.children.emplace_back();
    EnrichedNode en;
    en.x = Mat(0, 0);
    en.m = Mat(0, 0);
    eg.nodes.push_back(en);

    GriffinModel model = GriffinModel::init(small_config(8, 3, 2), 5);
    testutil::randomize_params(model.parameters(), rng, 0.5);
    const ForwardTrace trace = forward(model, eg, RunMode::eval);
    CHECK(trace.z == Vec(8, 0.0));
}

TEST_CASE("forward matches an independent naive recomputation on a 2-node chain") {
    const int d = 4;
    GriffinConfig cfg = small_config(d, 1, 1);
    cfg.first_layer_self_attention = true;
    GriffinModel model = GriffinModel::init(cfg, 17);
    std::mt19937_64 rng(18);
    testutil::randomize_params(model.parameters(), rng, 0.6);

    std::mt19937_64 data_rng(19);
    EnrichedSubgraph eg = testutil::seven_node_fixture(data_rng, d);
    // reduce to root + first child only
    eg.base.nodes.resize(2);
    eg.base.children.resize(2);
    eg.base.children[0] = {ChildGroup{0, {1}}};
    eg.base.children[1] = {};
    eg.nodes.resize(2);

    const ForwardTrace trace = forward(model, eg, RunMode::eval);

    // naive recomputation: self-attention layer, then one message hop
    auto self_attn = [&](const Mat& m, const Mat& x) {
        const int L = x.rows;
        Mat s(L, d);
        for (int r = 0; r < L; ++r) {
            for (int c = 0; c < d; ++c) s.at(r, c) = m.at(r, c) + x.at(r, c);
        }
        std::vector<Vec> q, k, v;
        for (int r = 0; r < L; ++r) {
            const Vec srow(s.row(r), s.row(r) + d);
            const Vec xrow(x.row(r), x.row(r) + d);
            q.push_back(naive_linear(model.first_self.query.weight.value,
                                     model.first_self.query.bias.value.data, srow));
            k.push_back(naive_linear(model.first_self.key.weight.value,
                                     model.first_self.key.bias.value.data, srow));
            v.push_back(naive_linear(model.first_self.value.weight.value,
                                     model.first_self.value.bias.value.data, xrow));
        }
        Vec pooled(d, 0.0);
        for (int a = 0; a < L; ++a) {
            Vec logits(L, 0.0);
            for (int b = 0; b < L; ++b) {
                for (int c = 0; c < d; ++c) logits[b] += q[a][c] * k[b][c];
                logits[b] /= std::sqrt(static_cast<double>(d));
            }
            const Vec w = naive_softmax(logits);
            for (int b = 0; b < L; ++b) {
                for (int c = 0; c < d; ++c) pooled[c] += w[b] * v[b][c] / L;
            }
        }
        return naive_linear(model.first_self.output.weight.value,
                            model.first_self.output.bias.value.data, pooled);
    };

    const Vec u_root = self_attn(eg.nodes[0].m, eg.nodes[0].x);
    const Vec u_child = self_attn(eg.nodes[1].m, eg.nodes[1].x);
    const Vec amlp_child = naive_mlp(model.layers[0].amlp.fc1, model.layers[0].amlp.fc2, u_child);
    const Vec& e_r = eg.relation_embeddings.at(0);
    Vec expected = u_root;
    for (int c = 0; c < d; ++c) expected[c] += amlp_child[c] * e_r[c];

    CHECK(max_abs_diff(trace.z, expected) <= 1e-12);
}

TEST_CASE("eval forward is bitwise deterministic") {
    std::mt19937_64 rng(41);
    EnrichedSubgraph eg = testutil::seven_node_fixture(rng, 8);
    GriffinConfig cfg = small_config(8, 2, 2);
    cfg.dropout = 0.1;  // dropout configured but inactive in eval
    GriffinModel model = GriffinModel::init(cfg, 6);
    testutil::randomize_params(model.parameters(), rng, 0.5);

    const ForwardTrace a = forward(model, eg, RunMode::eval);
    const ForwardTrace b = forward(model, eg, RunMode::eval);
    CHECK(a.z == b.z);
}

TEST_CASE("z is invariant to cell permutation within a node") {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 20; ++trial) {
        EnrichedSubgraph eg = testutil::random_enriched_subgraph(rng, 8);
        GriffinConfig cfg = small_config(8, 3, 2);
        cfg.first_layer_self_attention = (trial % 2 == 0);
        GriffinModel model = GriffinModel::init(cfg, 100 + trial);
        testutil::randomize_params(model.parameters(), rng, 0.5);

        const Vec z0 = forward(model, eg, RunMode::eval).z;

        // permute the cell rows of every node with >= 2 cells
        EnrichedSubgraph permuted = eg;
        for (auto& node : permuted.nodes) {
            const int L = node.x.rows;
            if (L < 2) continue;
            std::vector<int> perm(L);
            for (int i = 0; i < L; ++i) perm[i] = i;
            std::shuffle(perm.begin(), perm.end(), rng);
            Mat nx(L, 8), nm(L, 8);
            for (int r = 0; r < L; ++r) {
                std::copy(node.x.row(perm[r]), node.x.row(perm[r]) + 8, nx.row(r));
                std::copy(node.m.row(perm[r]), node.m.row(perm[r]) + 8, nm.row(r));
            }
            node.x = nx;
            node.m = nm;
        }
        const Vec z1 = forward(model, permuted, RunMode::eval).z;
        CHECK(max_abs_diff(z0, z1) < 1e-6);
    }
}

TEST_CASE("h_i is exactly invariant to relation iteration order") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        EnrichedSubgraph eg = testutil::random_enriched_subgraph(rng, 8);
        GriffinModel model = GriffinModel::init(small_config(8, 2, 2), 200 + trial);
        testutil::randomize_params(model.parameters(), rng, 0.5);

        const Vec z0 = forward(model, eg, RunMode::eval).z;

        EnrichedSubgraph shuffled = eg;
        for (auto& groups : shuffled.base.children) {
            std::shuffle(groups.begin(), groups.end(), rng);
        }
        const Vec z1 = forward(model, shuffled, RunMode::eval).z;
        CHECK(z0 == z1);  // elementwise max commutes, bitwise equal
    }
}

TEST_CASE("different task embeddings change z from layer 2 onward") {
    std::mt19937_64 rng(71);
    EnrichedSubgraph eg = testutil::seven_node_fixture(rng, 8);
    GriffinModel model = GriffinModel::init(small_config(8, 2, 2), 9);
    testutil::randomize_params(model.parameters(), rng, 0.5);

    const Vec z0 = forward(model, eg, RunMode::eval).z;
    EnrichedSubgraph other = eg;
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : other.task_embedding) v = dist(rng);
    const Vec z1 = forward(model, other, RunMode::eval).z;
    CHECK(max_abs_diff(z0, z1) > 1e-8);
}

TEST_CASE("fresh model with first-layer cross attention attends uniformly") {
    std::mt19937_64 rng(81);
    EnrichedSubgraph eg = testutil::seven_node_fixture(rng, 8);

    GriffinConfig cfg = small_config(8, 2, 2);
    cfg.first_layer_self_attention = false;  // degraded configuration
    const GriffinModel model = GriffinModel::init(cfg, 10);
    const ForwardTrace trace = forward(model, eg, RunMode::eval);

    for (int node = 0; node < trace.num_nodes; ++node) {
        const Mat* probs = trace.cross_attention_weights(0, node);
        if (probs == nullptr) continue;  // zero-cell node
        const double uniform = 1.0 / probs->cols;
        for (double w : probs->data) {
            CHECK(std::abs(w - uniform) <= 1e-9);
        }
    }

    // self-attention variant: weights differ across distinct cells
    GriffinConfig cfg2 = small_config(8, 2, 2);
    const GriffinModel model2 = GriffinModel::init(cfg2, 10);
    const ForwardTrace trace2 = forward(model2, eg, RunMode::eval);
    double max_dev = 0.0;
    for (int node = 0; node < trace2.num_nodes; ++node) {
        const auto& st = trace2.layers[0].self[node];
        for (const Mat& probs : st.probs) {
            const double uniform = 1.0 / probs.cols;
            for (double w : probs.data) max_dev = std::max(max_dev, std::abs(w - uniform));
        }
    }
    CHECK(max_dev > 1e-4);
}

TEST_CASE("backward refuses eval traces and mismatched shapes") {
    std::mt19937_64 rng(91);
    EnrichedSubgraph eg = testutil::seven_node_fixture(rng, 8);
    GriffinModel model = GriffinModel::init(small_config(8, 2, 2), 12);
    const ForwardTrace eval_trace = forward(model, eg, RunMode::eval);
    CHECK_THROWS_AS(backward(model, eg, eval_trace, Vec(8, 1.0)), StaleTrace);

    const ForwardTrace trace = forward(model, eg, RunMode::train, &rng);
    CHECK_THROWS_AS(backward(model, eg, trace, Vec(4, 1.0)), DimensionMismatch);
}

// Central-difference gradient check over every active parameter.
namespace {

void run_gradcheck(GriffinConfig cfg, std::uint64_t seed, bool with_dropout) {
    std::mt19937_64 rng(seed);
    EnrichedSubgraph eg = testutil::seven_node_fixture(rng, cfg.d);
    GriffinModel model = GriffinModel::init(cfg, seed + 1);
    testutil::randomize_params(model.parameters(), rng, 0.4);

    Vec c(cfg.d);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : c) v = dist(rng);

    const std::uint64_t forward_seed = 555;
    auto loss = [&]() {
        std::mt19937_64 frng(forward_seed);
        const ForwardTrace t = forward(model, eg, RunMode::train, &frng);
        return dot(c, t.z);
    };

    std::mt19937_64 frng(forward_seed);
    const ForwardTrace trace = forward(model, eg, RunMode::train, &frng);
    for (Param* p : model.parameters()) p->zero_grad();
    backward(model, eg, trace, c);

    const double h = 1e-5;
    double worst = 0.0;
    for (auto& [name, p] : model.named_parameters()) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value.data[i];
            p->value.data[i] = saved + h;
            const double lp = loss();
            p->value.data[i] = saved - h;
            const double lm = loss();
            p->value.data[i] = saved;
            const double fd = (lp - lm) / (2 * h);
            const double analytic = p->grad.data[i];
            const double rel =
                std::abs(analytic - fd) / std::max(std::abs(analytic) + std::abs(fd), 1e-6);
            worst = std::max(worst, rel);
            if (rel >= 1e-4) {
                CAPTURE(name);
                CAPTURE(i);
                CAPTURE(analytic);
                CAPTURE(fd);
            }
            REQUIRE(rel < 1e-4);
        }
    }
    CHECK(worst < 1e-4);
    (void)with_dropout;
}

}  // namespace

TEST_CASE("gradients match finite differences (self-attention first layer)") {
    run_gradcheck(small_config(8, 2, 2), 1001, false);
}

TEST_CASE("gradients match finite differences (cross attention everywhere)") {
    GriffinConfig cfg = small_config(8, 2, 2);
    cfg.first_layer_self_attention = false;
    run_gradcheck(cfg, 1002, false);
}

TEST_CASE("gradients match finite differences (ablation flags)") {
    GriffinConfig cfg = small_config(8, 2, 2);
    cfg.avg_attention = true;
    run_gradcheck(cfg, 1003, false);

    GriffinConfig cfg2 = small_config(8, 2, 2);
    cfg2.mean_relations = true;
    run_gradcheck(cfg2, 1004, false);
}

TEST_CASE("gradients match finite differences with dropout active (fixed mask)") {
    GriffinConfig cfg = small_config(8, 2, 2);
    cfg.dropout = 0.1;
    run_gradcheck(cfg, 1005, true);
}

TEST_CASE("zero loss gradient produces zero parameter gradients") {
    std::mt19937_64 rng(111);
    EnrichedSubgraph eg = testutil::seven_node_fixture(rng, 8);
    GriffinModel model = GriffinModel::init(small_config(8, 2, 2), 13);
    testutil::randomize_params(model.parameters(), rng, 0.4);

    const ForwardTrace trace = forward(model, eg, RunMode::train, &rng);
    for (Param* p : model.parameters()) p->zero_grad();
    backward(model, eg, trace, Vec(8, 0.0));
    for (Param* p : model.parameters()) {
        for (double g : p->grad.data) CHECK(g == 0.0);
    }
}

TEST_CASE("decode_classification: z = 0 gives the uniform distribution") {
    auto provider = EmbeddingProvider::stub(16);
    const Vec probs =
        decode_classification(Vec(16, 0.0), {"yes", "no", "maybe"}, *provider);
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("decode_classification: z equal to a label embedding wins the argmax") {
    auto provider = EmbeddingProvider::stub(64);
    const std::vector<std::string> labels = {"alpha", "bravo", "charlie"};
    const Vec z = provider->embed("alpha");
    const Vec probs = decode_classification(z, labels, *provider);
    CHECK(probs[0] > probs[1]);
    CHECK(probs[0] > probs[2]);
}

TEST_CASE("decode_classification sums to one and rejects duplicates") {
    auto provider = EmbeddingProvider::stub(32);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist(0.0, 1.0);
    Vec z(32);
    for (double& v : z) v = dist(rng);
    const Vec probs = decode_classification(z, {"a", "b", "c", "d"}, *provider);
    double total = 0.0;
    for (double p : probs) total += p;
    CHECK(std::abs(total - 1.0) <= 1e-6);

    CHECK_THROWS_AS(decode_classification(z, {"a", "a"}, *provider), DuplicateLabels);
    CHECK_THROWS_AS(decode_classification(z, {"solo"}, *provider), DegenerateLabels);
}
