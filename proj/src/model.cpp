#include "griffin/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "griffin/common.hpp"

namespace griffin {

void GriffinConfig::validate() const {
    if (d <= 0 || layers <= 0 || heads <= 0) {
        throw DimensionMismatch("model dims must be positive");
    }
    if (d % heads != 0) {
        throw DimensionMismatch("d=" + std::to_string(d) + " not divisible by heads=" +
                                std::to_string(heads));
    }
    if (dropout < 0.0 || dropout >= 1.0) {
        throw DimensionMismatch("dropout must be in [0, 1)");
    }
}

GriffinModel GriffinModel::init(const GriffinConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    GriffinModel model;
    model.cfg = cfg;
    std::mt19937_64 rng(mix_seed(seed, 0x6d0de1));
    for (int l = 0; l < cfg.layers; ++l) {
        GriffinLayerParams layer;
        layer.attn.qmlp = Mlp(2 * cfg.d, cfg.d, cfg.d);
        layer.attn.qmlp.init_xavier(rng);
        // Query path starts at zero: a fresh model attends uniformly, so with
        // u = 0 the first cross-attention layer is exactly mean aggregation.
        layer.attn.qmlp.fc2.init_zero();
        layer.attn.key = Linear(cfg.d, cfg.d);
        layer.attn.key.init_xavier(rng);
        layer.attn.value = Linear(cfg.d, cfg.d);
        layer.attn.value.init_xavier(rng);
        layer.attn.output = Linear(cfg.d, cfg.d);
        layer.attn.output.init_xavier(rng);
        layer.amlp = Mlp(cfg.d, cfg.d, cfg.d);
        layer.amlp.init_xavier(rng);
        model.layers.push_back(std::move(layer));
    }
    model.first_self.query = Linear(cfg.d, cfg.d);
    model.first_self.query.init_xavier(rng);
    model.first_self.key = Linear(cfg.d, cfg.d);
    model.first_self.key.init_xavier(rng);
    model.first_self.value = Linear(cfg.d, cfg.d);
    model.first_self.value.init_xavier(rng);
    model.first_self.output = Linear(cfg.d, cfg.d);
    model.first_self.output.init_xavier(rng);
    return model;
}

std::vector<std::pair<std::string, Param*>> GriffinModel::named_parameters() {
    std::vector<std::pair<std::string, Param*>> out;
    auto add_linear = [&](const std::string& prefix, Linear& lin) {
        out.emplace_back(prefix + ".weight", &lin.weight);
        out.emplace_back(prefix + ".bias", &lin.bias);
    };
    auto add_mlp = [&](const std::string& prefix, Mlp& mlp) {
        add_linear(prefix + ".fc1", mlp.fc1);
        add_linear(prefix + ".fc2", mlp.fc2);
    };
    for (int l = 0; l < cfg.layers; ++l) {
        const std::string p = "layer" + std::to_string(l);
        const bool self_layer = (l == 0 && cfg.first_layer_self_attention);
        if (self_layer) {
            if (!cfg.avg_attention) {
                add_linear(p + ".self.query", first_self.query);
                add_linear(p + ".self.key", first_self.key);
            }
            add_linear(p + ".self.value", first_self.value);
            add_linear(p + ".self.output", first_self.output);
        } else {
            if (!cfg.avg_attention) {
                add_mlp(p + ".attn.qmlp", layers[l].attn.qmlp);
                add_linear(p + ".attn.key", layers[l].attn.key);
            }
            add_linear(p + ".attn.value", layers[l].attn.value);
            add_linear(p + ".attn.output", layers[l].attn.output);
        }
        add_mlp(p + ".amlp", layers[l].amlp);
    }
    return out;
}

std::vector<Param*> GriffinModel::parameters() {
    std::vector<Param*> out;
    for (auto& [name, p] : named_parameters()) out.push_back(p);
    return out;
}

namespace {

double inv_sqrt(int n) { return 1.0 / std::sqrt(static_cast<double>(n)); }

Vec softmax_row(const Vec& logits) {
    double max_logit = logits[0];
    for (double v : logits) max_logit = std::max(max_logit, v);
    Vec probs(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - max_logit);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

Mat project_rows(const Linear& lin, const Mat& rows) {
    Mat out(rows.rows, lin.out_dim());
    for (int r = 0; r < rows.rows; ++r) {
        const Vec y = lin.forward(Vec(rows.row(r), rows.row(r) + rows.cols));
        std::copy(y.begin(), y.end(), out.row(r));
    }
    return out;
}

Mat make_dropout_mask(int rows, int cols, double p, std::mt19937_64& rng) {
    Mat mask(rows, cols);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double keep_scale = 1.0 / (1.0 - p);
    for (double& v : mask.data) v = (unif(rng) < p) ? 0.0 : keep_scale;
    return mask;
}

}  // namespace

// ---------------------------------------------------------------------------
// forward

namespace {

// Stage-A cross attention for one node; fills the trace entry and returns the
// pre-residual update v_i.
Vec cross_attn_forward(const GriffinModel& model, int layer, const Vec& u, const Vec& task,
                       const Mat& m, const Mat& x, bool training, std::mt19937_64* rng,
                       CrossAttnTrace& ct) {
    const GriffinConfig& cfg = model.cfg;
    const CrossAttentionParams& p = model.layers[layer].attn;
    const int L = x.rows;
    const int d = cfg.d;
    const int dh = d / cfg.heads;
    const double scale = inv_sqrt(dh);

    if (!cfg.avg_attention) {
        ct.q_in.resize(2 * d);
        std::copy(u.begin(), u.end(), ct.q_in.begin());
        std::copy(task.begin(), task.end(), ct.q_in.begin() + d);
        ct.q = p.qmlp.forward(ct.q_in, &ct.qmlp_hidden);
        ct.keys = project_rows(p.key, m);
    }
    ct.values = project_rows(p.value, x);

    ct.probs = Mat(cfg.heads, L);
    for (int h = 0; h < cfg.heads; ++h) {
        if (cfg.avg_attention) {
            for (int j = 0; j < L; ++j) ct.probs.at(h, j) = 1.0 / L;
            continue;
        }
        Vec logits(L);
        for (int j = 0; j < L; ++j) {
            double acc = 0.0;
            const double* k = ct.keys.row(j) + h * dh;
            const double* q = ct.q.data() + h * dh;
            for (int c = 0; c < dh; ++c) acc += q[c] * k[c];
            logits[j] = acc * scale;
        }
        const Vec probs = softmax_row(logits);
        std::copy(probs.begin(), probs.end(), ct.probs.row(h));
    }
    const bool use_dropout = training && cfg.dropout > 0.0;
    if (use_dropout) ct.drop_mask = make_dropout_mask(cfg.heads, L, cfg.dropout, *rng);

    ct.attn_out.assign(d, 0.0);
    for (int h = 0; h < cfg.heads; ++h) {
        for (int j = 0; j < L; ++j) {
            const double w = ct.probs.at(h, j) * (use_dropout ? ct.drop_mask.at(h, j) : 1.0);
            if (w == 0.0) continue;
            const double* v = ct.values.row(j) + h * dh;
            double* o = ct.attn_out.data() + h * dh;
            for (int c = 0; c < dh; ++c) o[c] += w * v[c];
        }
    }
    return p.output.forward(ct.attn_out);
}

Vec self_attn_forward(const GriffinModel& model, const Mat& m, const Mat& x, bool training,
                      std::mt19937_64* rng, SelfAttnTrace& st) {
    const GriffinConfig& cfg = model.cfg;
    const SelfAttentionParams& p = model.first_self;
    const int L = x.rows;
    const int d = cfg.d;
    const int dh = d / cfg.heads;
    const double scale = inv_sqrt(dh);

    st.s = Mat(L, d);
    for (int r = 0; r < L; ++r) {
        for (int c = 0; c < d; ++c) st.s.at(r, c) = m.at(r, c) + x.at(r, c);
    }
    if (!cfg.avg_attention) {
        st.queries = project_rows(p.query, st.s);
        st.keys = project_rows(p.key, st.s);
    }
    st.values = project_rows(p.value, x);

    const bool use_dropout = training && cfg.dropout > 0.0;
    st.probs.assign(cfg.heads, Mat());
    if (use_dropout) st.drop_mask.assign(cfg.heads, Mat());
    for (int h = 0; h < cfg.heads; ++h) {
        st.probs[h] = Mat(L, L);
        for (int a = 0; a < L; ++a) {
            if (cfg.avg_attention) {
                for (int b = 0; b < L; ++b) st.probs[h].at(a, b) = 1.0 / L;
                continue;
            }
            Vec logits(L);
            const double* q = st.queries.row(a) + h * dh;
            for (int b = 0; b < L; ++b) {
                double acc = 0.0;
                const double* k = st.keys.row(b) + h * dh;
                for (int c = 0; c < dh; ++c) acc += q[c] * k[c];
                logits[b] = acc * scale;
            }
            const Vec probs = softmax_row(logits);
            std::copy(probs.begin(), probs.end(), st.probs[h].row(a));
        }
        if (use_dropout) st.drop_mask[h] = make_dropout_mask(L, L, cfg.dropout, *rng);
    }

    st.cell_out = Mat(L, d);
    for (int h = 0; h < cfg.heads; ++h) {
        for (int a = 0; a < L; ++a) {
            double* o = st.cell_out.row(a) + h * dh;
            for (int b = 0; b < L; ++b) {
                const double w =
                    st.probs[h].at(a, b) * (use_dropout ? st.drop_mask[h].at(a, b) : 1.0);
                if (w == 0.0) continue;
                const double* v = st.values.row(b) + h * dh;
                for (int c = 0; c < dh; ++c) o[c] += w * v[c];
            }
        }
    }
    st.pooled.assign(d, 0.0);
    for (int a = 0; a < L; ++a) {
        for (int c = 0; c < d; ++c) st.pooled[c] += st.cell_out.at(a, c);
    }
    for (double& v : st.pooled) v /= L;
    return p.output.forward(st.pooled);
}

}  // namespace

ForwardTrace forward(const GriffinModel& model, const EnrichedSubgraph& eg, RunMode mode,
                     std::mt19937_64* rng) {
    const GriffinConfig& cfg = model.cfg;
    if (eg.dimension != cfg.d) {
        throw DimensionMismatch("subgraph dimension " + std::to_string(eg.dimension) +
                                " != model d " + std::to_string(cfg.d));
    }
    const bool training = mode == RunMode::train;
    if (training && cfg.dropout > 0.0 && rng == nullptr) {
        throw ConsistencyError("train-mode forward with dropout requires an RNG");
    }
    const int N = static_cast<int>(eg.nodes.size());
    const int d = cfg.d;

    ForwardTrace trace;
    trace.training = training;
    trace.num_nodes = N;
    trace.dimension = d;
    trace.layers.resize(cfg.layers);

    std::vector<Vec> u(N, Vec(d, 0.0));
    for (int l = 0; l < cfg.layers; ++l) {
        LayerTrace& lt = trace.layers[l];
        lt.u_start = u;
        const bool self_layer = (l == 0 && cfg.first_layer_self_attention);
        if (self_layer) {
            lt.self.resize(N);
        } else {
            lt.cross.resize(N);
        }

        // attention residual
        for (int i = 0; i < N; ++i) {
            const EnrichedNode& node = eg.nodes[i];
            if (node.x.rows == 0) continue;  // fully masked node contributes nothing
            Vec v;
            if (self_layer) {
                v = self_attn_forward(model, node.m, node.x, training, rng, lt.self[i]);
            } else {
                v = cross_attn_forward(model, l, u[i], eg.task_embedding, node.m, node.x,
                                       training, rng, lt.cross[i]);
            }
            axpy(1.0, v, u[i]);
        }
        lt.u_mid = u;

        // message-passing residual: children -> parents, synchronous update
        lt.messages.resize(N);
        std::vector<Vec> h(N);
        for (int i = 0; i < N; ++i) {
            const auto& groups = eg.base.children[i];
            if (groups.empty()) continue;
            MessageTrace& mt = lt.messages[i];
            std::vector<Vec> gated;
            for (const ChildGroup& group : groups) {
                MessageGroupTrace gt;
                gt.relation = group.relation;
                gt.children = group.children;
                Vec mean(d, 0.0);
                for (const int child : group.children) {
                    Vec hidden;
                    Vec out = model.layers[l].amlp.forward(u[child], &hidden);
                    axpy(1.0, out, mean);
                    gt.amlp_hidden.push_back(std::move(hidden));
                    gt.amlp_out.push_back(std::move(out));
                }
                for (double& v : mean) v /= static_cast<double>(group.children.size());
                const Vec& e_r = eg.relation_embeddings.at(group.relation);
                gt.gated.resize(d);
                for (int c = 0; c < d; ++c) gt.gated[c] = mean[c] * e_r[c];
                gated.push_back(gt.gated);
                mt.groups.push_back(std::move(gt));
            }
            if (cfg.mean_relations) {
                Vec hi(d, 0.0);
                for (const Vec& g : gated) axpy(1.0, g, hi);
                for (double& v : hi) v /= static_cast<double>(gated.size());
                h[i] = std::move(hi);
            } else {
                mt.argmax.assign(d, 0);
                Vec hi = gated[0];
                for (std::size_t g = 1; g < gated.size(); ++g) {
                    for (int c = 0; c < d; ++c) {
                        if (gated[g][c] > hi[c]) {
                            hi[c] = gated[g][c];
                            mt.argmax[c] = static_cast<int>(g);
                        }
                    }
                }
                h[i] = std::move(hi);
            }
        }
        for (int i = 0; i < N; ++i) {
            if (!h[i].empty()) axpy(1.0, h[i], u[i]);
        }
    }

    trace.z = u[0];
    return trace;
}

const Mat* ForwardTrace::cross_attention_weights(int layer, int node) const {
    if (layer < 0 || layer >= static_cast<int>(layers.size())) return nullptr;
    const LayerTrace& lt = layers[layer];
    if (node < 0 || node >= static_cast<int>(lt.cross.size())) return nullptr;
    if (lt.cross[node].probs.rows == 0) return nullptr;
    return &lt.cross[node].probs;
}

// ---------------------------------------------------------------------------
// backward

namespace {

void cross_attn_backward(GriffinModel& model, int layer, const EnrichedNode& node,
                         const Vec& task, const CrossAttnTrace& ct, const Vec& gv, Vec& gu) {
    const GriffinConfig& cfg = model.cfg;
    CrossAttentionParams& p = model.layers[layer].attn;
    const int L = node.x.rows;
    const int d = cfg.d;
    const int dh = d / cfg.heads;
    const double scale = inv_sqrt(dh);
    const bool dropped = ct.drop_mask.rows > 0;

    const Vec g_attn_out = p.output.backward(ct.attn_out, gv);

    Mat gvalues(L, d);
    Mat gkeys;
    Vec gq;
    if (!cfg.avg_attention) {
        gkeys = Mat(L, d);
        gq.assign(d, 0.0);
    }
    for (int h = 0; h < cfg.heads; ++h) {
        const double* go = g_attn_out.data() + h * dh;
        Vec gw(L, 0.0);
        for (int j = 0; j < L; ++j) {
            const double w = ct.probs.at(h, j) * (dropped ? ct.drop_mask.at(h, j) : 1.0);
            const double* v = ct.values.row(j) + h * dh;
            double* gvj = gvalues.row(j) + h * dh;
            double acc = 0.0;
            for (int c = 0; c < dh; ++c) {
                acc += go[c] * v[c];
                gvj[c] += w * go[c];
            }
            gw[j] = acc * (dropped ? ct.drop_mask.at(h, j) : 1.0);
        }
        if (cfg.avg_attention) continue;  // constant weights carry no gradient

        double dot_sum = 0.0;
        for (int j = 0; j < L; ++j) dot_sum += ct.probs.at(h, j) * gw[j];
        for (int j = 0; j < L; ++j) {
            const double glogit = ct.probs.at(h, j) * (gw[j] - dot_sum) * scale;
            const double* k = ct.keys.row(j) + h * dh;
            const double* q = ct.q.data() + h * dh;
            double* gk = gkeys.row(j) + h * dh;
            double* gqh = gq.data() + h * dh;
            for (int c = 0; c < dh; ++c) {
                gqh[c] += glogit * k[c];
                gk[c] += glogit * q[c];
            }
        }
    }

    for (int j = 0; j < L; ++j) {
        p.value.backward(Vec(node.x.row(j), node.x.row(j) + d),
                         Vec(gvalues.row(j), gvalues.row(j) + d));
    }
    if (!cfg.avg_attention) {
        for (int j = 0; j < L; ++j) {
            p.key.backward(Vec(node.m.row(j), node.m.row(j) + d),
                           Vec(gkeys.row(j), gkeys.row(j) + d));
        }
        const Vec gq_in = p.qmlp.backward(ct.q_in, ct.qmlp_hidden, gq);
        for (int c = 0; c < d; ++c) gu[c] += gq_in[c];  // task embedding part is frozen
    }
}

void self_attn_backward(GriffinModel& model, const EnrichedNode& node, const SelfAttnTrace& st,
                        const Vec& gv) {
    const GriffinConfig& cfg = model.cfg;
    SelfAttentionParams& p = model.first_self;
    const int L = node.x.rows;
    const int d = cfg.d;
    const int dh = d / cfg.heads;
    const double scale = inv_sqrt(dh);
    const bool dropped = !st.drop_mask.empty();

    const Vec gpooled = p.output.backward(st.pooled, gv);

    Mat gvalues(L, d);
    Mat gqueries, gkeys;
    if (!cfg.avg_attention) {
        gqueries = Mat(L, d);
        gkeys = Mat(L, d);
    }
    const double pool_scale = 1.0 / L;
    for (int h = 0; h < cfg.heads; ++h) {
        const Mat& probs = st.probs[h];
        for (int a = 0; a < L; ++a) {
            // gradient of the mean pool: every cell row receives gpooled / L
            const double* go = gpooled.data() + h * dh;
            Vec gw(L, 0.0);
            for (int b = 0; b < L; ++b) {
                const double w = probs.at(a, b) * (dropped ? st.drop_mask[h].at(a, b) : 1.0);
                const double* v = st.values.row(b) + h * dh;
                double* gvb = gvalues.row(b) + h * dh;
                double acc = 0.0;
                for (int c = 0; c < dh; ++c) {
                    acc += go[c] * v[c];
                    gvb[c] += pool_scale * w * go[c];
                }
                gw[b] = pool_scale * acc * (dropped ? st.drop_mask[h].at(a, b) : 1.0);
            }
            if (cfg.avg_attention) continue;

            double dot_sum = 0.0;
            for (int b = 0; b < L; ++b) dot_sum += probs.at(a, b) * gw[b];
            const double* q = st.queries.row(a) + h * dh;
            double* gqa = gqueries.row(a) + h * dh;
            for (int b = 0; b < L; ++b) {
                const double glogit = probs.at(a, b) * (gw[b] - dot_sum) * scale;
                const double* k = st.keys.row(b) + h * dh;
                double* gkb = gkeys.row(b) + h * dh;
                for (int c = 0; c < dh; ++c) {
                    gqa[c] += glogit * k[c];
                    gkb[c] += glogit * q[c];
                }
            }
        }
    }

    for (int r = 0; r < L; ++r) {
        p.value.backward(Vec(node.x.row(r), node.x.row(r) + d),
                         Vec(gvalues.row(r), gvalues.row(r) + d));
    }
    if (!cfg.avg_attention) {
        for (int r = 0; r < L; ++r) {
            const Vec s_row(st.s.row(r), st.s.row(r) + d);
            p.query.backward(s_row, Vec(gqueries.row(r), gqueries.row(r) + d));
            p.key.backward(s_row, Vec(gkeys.row(r), gkeys.row(r) + d));
        }
    }
}

}  // namespace

void backward(GriffinModel& model, const EnrichedSubgraph& eg, const ForwardTrace& trace,
              const Vec& loss_grad) {
    const GriffinConfig& cfg = model.cfg;
    if (!trace.training) {
        throw StaleTrace("backward requires a train-mode trace");
    }
    if (trace.num_nodes != static_cast<int>(eg.nodes.size()) || trace.dimension != cfg.d ||
        static_cast<int>(trace.layers.size()) != cfg.layers) {
        throw StaleTrace("trace does not match the model/subgraph it is applied to");
    }
    if (static_cast<int>(loss_grad.size()) != cfg.d) {
        throw DimensionMismatch("loss gradient dimension mismatch");
    }

    const int N = trace.num_nodes;
    const int d = cfg.d;
    std::vector<Vec> gu(N, Vec(d, 0.0));
    gu[0] = loss_grad;

    for (int l = cfg.layers - 1; l >= 0; --l) {
        const LayerTrace& lt = trace.layers[l];

        // reverse the message-passing residual: u_out = u_mid + h(u_mid)
        std::vector<Vec> gu_mid = gu;
        for (int i = 0; i < N; ++i) {
            const MessageTrace& mt = lt.messages[i];
            if (mt.groups.empty()) continue;
            const Vec& gh = gu[i];

            std::vector<Vec> ggated(mt.groups.size(), Vec(d, 0.0));
            if (cfg.mean_relations) {
                const double inv = 1.0 / static_cast<double>(mt.groups.size());
                for (auto& g : ggated) {
                    for (int c = 0; c < d; ++c) g[c] = gh[c] * inv;
                }
            } else {
                for (int c = 0; c < d; ++c) ggated[mt.argmax[c]][c] += gh[c];
            }
            for (std::size_t g = 0; g < mt.groups.size(); ++g) {
                const MessageGroupTrace& gt = mt.groups[g];
                const Vec& e_r = eg.relation_embeddings.at(gt.relation);
                const double inv_children = 1.0 / static_cast<double>(gt.children.size());
                Vec gout(d);
                for (int c = 0; c < d; ++c) gout[c] = ggated[g][c] * e_r[c] * inv_children;
                for (std::size_t k = 0; k < gt.children.size(); ++k) {
                    const int child = gt.children[k];
                    const Vec gchild = model.layers[l].amlp.backward(lt.u_mid[child],
                                                                     gt.amlp_hidden[k], gout);
                    axpy(1.0, gchild, gu_mid[child]);
                }
            }
        }

        // reverse the attention residual: u_mid = u_start + v(u_start)
        std::vector<Vec> gu_start = gu_mid;
        const bool self_layer = (l == 0 && cfg.first_layer_self_attention);
        for (int i = 0; i < N; ++i) {
            if (eg.nodes[i].x.rows == 0) continue;
            const Vec& gv = gu_mid[i];
            if (self_layer) {
                self_attn_backward(model, eg.nodes[i], lt.self[i], gv);
            } else {
                cross_attn_backward(model, l, eg.nodes[i], eg.task_embedding, lt.cross[i], gv,
                                    gu_start[i]);
            }
        }
        gu = std::move(gu_start);
    }
}

// ---------------------------------------------------------------------------
// standalone ops and decoders

Vec cross_attention(const GriffinModel& model, int layer, const Vec& u, const Vec& task,
                    const Mat& m, const Mat& x) {
    if (x.rows < 1 || m.rows != x.rows || m.cols != model.cfg.d || x.cols != model.cfg.d) {
        throw DimensionMismatch("cross_attention input shapes disagree with the model");
    }
    CrossAttnTrace ct;
    return cross_attn_forward(model, layer, u, task, m, x, false, nullptr, ct);
}

Vec self_attention_first_layer(const GriffinModel& model, const Mat& m, const Mat& x) {
    if (m.rows != x.rows || (x.rows > 0 && (m.cols != model.cfg.d || x.cols != model.cfg.d))) {
        throw DimensionMismatch("self_attention input shapes disagree with the model");
    }
    if (x.rows == 0) return Vec(model.cfg.d, 0.0);
    SelfAttnTrace st;
    return self_attn_forward(model, m, x, false, nullptr, st);
}

Vec aggregate_relation(const GriffinModel& model, int layer, const std::vector<Vec>& neighbors) {
    Vec mean(model.cfg.d, 0.0);
    if (neighbors.empty()) return mean;
    for (const Vec& u : neighbors) {
        Vec hidden;
        const Vec out = model.layers[layer].amlp.forward(u, &hidden);
        axpy(1.0, out, mean);
    }
    for (double& v : mean) v /= static_cast<double>(neighbors.size());
    return mean;
}

Vec aggregate_across_relations(const std::vector<Vec>& h_by_relation,
                               const std::vector<Vec>& e_by_relation, bool mean_mode,
                               int dimension) {
    if (h_by_relation.size() != e_by_relation.size()) {
        throw DimensionMismatch("aggregate_across_relations: h/e relation counts disagree");
    }
    Vec h(dimension, 0.0);
    if (h_by_relation.empty()) return h;
    std::vector<Vec> gated(h_by_relation.size(), Vec(dimension));
    for (std::size_t r = 0; r < h_by_relation.size(); ++r) {
        for (int c = 0; c < dimension; ++c) gated[r][c] = h_by_relation[r][c] * e_by_relation[r][c];
    }
    if (mean_mode) {
        for (const Vec& g : gated) axpy(1.0, g, h);
        for (double& v : h) v /= static_cast<double>(gated.size());
        return h;
    }
    h = gated[0];
    for (std::size_t r = 1; r < gated.size(); ++r) {
        for (int c = 0; c < dimension; ++c) h[c] = std::max(h[c], gated[r][c]);
    }
    return h;
}

Vec softmax(const Vec& logits) { return softmax_row(logits); }

Vec decode_classification(const Vec& z, const std::vector<std::string>& label_texts,
                          const EmbeddingProvider& provider) {
    if (label_texts.size() < 2) {
        throw DegenerateLabels("classification needs at least 2 labels");
    }
    std::set<std::string> unique(label_texts.begin(), label_texts.end());
    if (unique.size() != label_texts.size()) {
        throw DuplicateLabels("label texts must be distinct");
    }
    Vec logits(label_texts.size());
    for (std::size_t i = 0; i < label_texts.size(); ++i) {
        logits[i] = dot(z, provider.embed(label_texts[i]));
    }
    return softmax_row(logits);
}

std::pair<double, double> decode_regression(const Vec& z, const FloatCodec& codec,
                                            const QuantileNormalizer& target_normalizer) {
    if (!codec.frozen()) {
        throw ConsistencyError("decode_regression requires a frozen codec");
    }
    if (!target_normalizer.fitted()) {
        throw NotFitted("decode_regression: target normalizer not fitted");
    }
    const double normalized = codec.decode(z);
    return {normalized, target_normalizer.inverse_transform(normalized)};
}

}  // namespace griffin
