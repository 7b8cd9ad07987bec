// The Griffin network: task-conditioned cross-attention over cells (first
// layer optionally self-attention over column names + values), mean-within-
// relation / max-across-relation message passing toward the root, residual
// node state, and the unified task decoders. Forward keeps a full trace so
// backward can produce exact analytic gradients.
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "griffin/embedding.hpp"
#include "griffin/enrich.hpp"
#include "griffin/float_codec.hpp"
#include "griffin/nn.hpp"

namespace griffin {

struct GriffinConfig {
    int d = 512;
    int layers = 4;
    int heads = 8;
    double dropout = 0.1;
    // Replace layer-1 cross-attention by self-attention over column names and
    // values (the default configuration; turning it off reproduces the
    // degenerate uniform first-layer attention).
    bool first_layer_self_attention = true;
    // Ablations: uniform attention weights everywhere / mean instead of max
    // across relations.
    bool avg_attention = false;
    bool mean_relations = false;

    void validate() const;  // throws DimensionMismatch on bad shape choices
};

struct CrossAttentionParams {
    Mlp qmlp;       // [u ; t] (2d) -> d
    Linear key;     // d -> d over m rows
    Linear value;   // d -> d over x rows
    Linear output;  // d -> d
};

struct SelfAttentionParams {
    Linear query;   // d -> d over (m + x) rows
    Linear key;     // d -> d over (m + x) rows
    Linear value;   // d -> d over x rows
    Linear output;  // d -> d
};

struct GriffinLayerParams {
    CrossAttentionParams attn;
    Mlp amlp;  // d -> d neighbor transform
};

enum class RunMode { train, eval };

struct GriffinModel {
    GriffinConfig cfg;
    std::vector<GriffinLayerParams> layers;
    SelfAttentionParams first_self;  // active iff cfg.first_layer_self_attention

    static GriffinModel init(const GriffinConfig& cfg, std::uint64_t seed);

    // Active parameters under the current config (ablations drop the unused
    // projection groups). Order is stable; checkpoints serialize by name.
    std::vector<Param*> parameters();
    std::vector<std::pair<std::string, Param*>> named_parameters();
};

// Per-node cross-attention internals cached for backward and for attention
// weight inspection.
struct CrossAttnTrace {
    Vec q_in;          // [u ; t], 2d
    Vec qmlp_hidden;   // QMLP fc1 pre-activations
    Vec q;             // query, d
    Mat keys;          // L x d projected keys
    Mat values;        // L x d projected values
    Mat probs;         // heads x L softmax weights (before dropout)
    Mat drop_mask;     // heads x L, empty when dropout is off
    Vec attn_out;      // d, concatenated heads before the output projection
};

struct SelfAttnTrace {
    Mat s;                       // L x d, m + x
    Mat queries, keys, values;   // L x d each
    std::vector<Mat> probs;      // per head L x L
    std::vector<Mat> drop_mask;  // per head L x L, empty when dropout is off
    Mat cell_out;                // L x d concatenated heads per cell
    Vec pooled;                  // d, mean over cells before the output projection
};

struct MessageGroupTrace {
    int relation = 0;
    std::vector<int> children;     // node indexes
    std::vector<Vec> amlp_hidden;  // per child fc1 pre-activations
    std::vector<Vec> amlp_out;     // per child AMLP output
    Vec gated;                     // h_r * e_r
};

struct MessageTrace {
    std::vector<MessageGroupTrace> groups;
    std::vector<int> argmax;  // winning group per coordinate (max mode), -1 if none
};

struct LayerTrace {
    std::vector<Vec> u_start;  // node states entering the layer
    std::vector<Vec> u_mid;    // after the attention residual
    std::vector<CrossAttnTrace> cross;  // indexed by node; empty entries for L=0
    std::vector<SelfAttnTrace> self;    // only for the self-attention first layer
    std::vector<MessageTrace> messages;
};

struct ForwardTrace {
    bool training = false;
    int num_nodes = 0;
    int dimension = 0;
    std::vector<LayerTrace> layers;
    Vec z;

    // heads x L attention weights of a given layer/node (cross layers), or the
    // per-head row-stacked L x L weights for the self-attention first layer.
    const Mat* cross_attention_weights(int layer, int node) const;
};

// z = root state after all layers. u starts at zero; each layer applies the
// attention residual, then the message-passing residual (children -> parents,
// one hop per layer). Train mode needs an RNG when dropout > 0; eval mode is
// deterministic.
ForwardTrace forward(const GriffinModel& model, const EnrichedSubgraph& eg, RunMode mode,
                     std::mt19937_64* rng = nullptr);

// Exact analytic gradients for all active parameters, accumulated into
// param.grad. loss_grad is dL/dz. The trace must come from a train-mode
// forward on the same subgraph shape, else StaleTrace.
void backward(GriffinModel& model, const EnrichedSubgraph& eg, const ForwardTrace& trace,
              const Vec& loss_grad);

// ---------------------------------------------------------------------------
// Unified decoders (Eq. 5 classification head, regression through DEC).

struct Prediction {
    enum class Kind { classification, regression } kind = Kind::classification;
    Vec z;
    std::optional<Vec> class_probs;
    std::optional<double> reg_value_normalized;
    std::optional<double> reg_value_denormalized;
};

// softmax([<z, embed(label)>]); throws DuplicateLabels on repeated label text.
Vec decode_classification(const Vec& z, const std::vector<std::string>& label_texts,
                          const EmbeddingProvider& provider);
Vec softmax(const Vec& logits);

// normalized = DEC(z); denormalized through the target column's normalizer.
std::pair<double, double> decode_regression(const Vec& z, const FloatCodec& codec,
                                            const QuantileNormalizer& target_normalizer);

// Standalone attention ops (the model layers call these); exposed for direct
// testing against brute-force oracles.
Vec cross_attention(const GriffinModel& model, int layer, const Vec& u, const Vec& task,
                    const Mat& m, const Mat& x);
Vec self_attention_first_layer(const GriffinModel& model, const Mat& m, const Mat& x);
Vec aggregate_relation(const GriffinModel& model, int layer, const std::vector<Vec>& neighbors);
// Elementwise max over {h_r * e_r} (or mean in the ablation); empty -> 0.
Vec aggregate_across_relations(const std::vector<Vec>& h_by_relation,
                               const std::vector<Vec>& e_by_relation, bool mean_mode,
                               int dimension);

}  // namespace griffin
