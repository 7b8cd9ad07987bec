// Three-stage training pipeline: masked-cell completion pretraining, joint
// supervised fine-tuning across tasks, and downstream per-task fine-tuning.
// Batch assembly (sampling + enrichment) runs in a worker pool; optimization
// steps are single-threaded and deterministic.
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "griffin/enrich.hpp"
#include "griffin/model.hpp"
#include "griffin/optim.hpp"
#include "griffin/sampler.hpp"
#include "griffin/tasks.hpp"

namespace griffin {

struct TrainConfig {
    double learning_rate = 3e-4;
    double weight_decay = 2e-4;
    int batch_size = 256;
    int patience = 10;  // epochs
    std::uint64_t seed = 0;
    int max_epochs = 100;
    long completion_steps = 2000;        // optimizer-step budget for completion
    int completion_eval_every = 0;       // 0: evaluate once per epoch-equivalent
    double completion_val_fraction = 0.1;
    SampleConfig sampling;
    int workers = 2;

    void validate() const;
};

// A loaded RDB with its graph and fitted feature encoders; immutable once
// built and shared across training stages.
struct DatasetBundle {
    std::string name;
    RdbManifest manifest;
    std::vector<TableFrame> frames;
    HeteroGraph graph;
    ColumnEncoders encoders;

    // dir must contain manifest.json and one <table>.csv per table.
    static DatasetBundle load(const std::string& dir);
    static DatasetBundle from(RdbManifest manifest, std::vector<TableFrame> frames);
};

// ---------------------------------------------------------------------------
// Losses

// 1 - cos(z, cell): in [0, 2], zero iff positively collinear. ZeroVector on a
// zero-norm input.
double completion_loss(const Vec& z, const Vec& cell_embedding);
Vec completion_loss_grad(const Vec& z, const Vec& cell_embedding);

struct LossGrad {
    double loss = 0.0;
    Vec dz;
};
// Cross-entropy over inner-product logits against label embeddings.
LossGrad classification_loss(const Vec& z, const std::vector<Vec>& label_embeddings, int target);
// Squared error on the normalized target through the frozen decoder.
LossGrad regression_loss(const Vec& z, const FloatCodec& codec, double normalized_target);

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
    GriffinModel model;
    FloatCodec codec;
    int provider_dimension = 0;
    EmbeddingMode provider_mode = EmbeddingMode::deterministic_stub;
    std::string stage = "init";              // init | completion | sft | finetuned
    std::vector<std::string> datasets_seen;  // append-only across stages
    std::vector<std::string> registered_downstream;
};

// Atomic write (temp file + rename).
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Stage 1: completion pretraining

struct CompletionStats {
    double initial_val_loss = 0.0;
    double best_val_loss = 0.0;
    long steps = 0;
    std::int64_t skipped_rows = 0;  // rows without maskable context
    std::vector<std::pair<long, double>> val_history;  // (step, val loss)
    std::unordered_map<std::string, long> mask_counts;  // "table.column" -> times masked
};

// Masks one uniformly random encodable column per sampled row and minimizes
// the cosine distance between the model output and the masked cell embedding.
// Early-stops on validation completion loss; the best parameters are restored.
// Throws EmptyCorpus when no dataset provides a maskable row.
CompletionStats pretrain_completion(Checkpoint& ckpt,
                                    const std::vector<const DatasetBundle*>& corpus,
                                    const EmbeddingProvider& provider, const TrainConfig& cfg,
                                    std::ostream* log = nullptr);

// ---------------------------------------------------------------------------
// Stage 2: joint SFT

struct SftTask {
    const TaskSpec* task = nullptr;
    const DatasetBundle* data = nullptr;
};

struct SftStats {
    int epochs = 0;
    std::vector<double> best_val_metrics;  // per task, at the restored epoch
};

// Round-robin mini-batches across tasks; cross-entropy for classification,
// squared error on normalized targets for regression. Early stopping uses the
// mean validation rank across tasks. Throws LeakageError when any task's
// dataset is registered as downstream. An empty task list is a no-op.
SftStats sft(Checkpoint& ckpt, const std::vector<SftTask>& tasks,
             const std::vector<std::string>& downstream_datasets,
             const EmbeddingProvider& provider, const TrainConfig& cfg,
             std::ostream* log = nullptr);

// ---------------------------------------------------------------------------
// Stage 3: downstream fine-tuning + evaluation

struct EvalResult {
    double metric = 0.0;
    std::vector<double> predictions;
    std::vector<double> targets;
};

struct FinetuneReport {
    std::string task;
    std::uint64_t seed = 0;
    double val_metric = 0.0;
    double test_metric = 0.0;
    int epochs = 0;
    long train_examples = 0;
};

// Fits the regression target normalizer on the task's train split.
QuantileNormalizer fit_target_normalizer(const TaskSpec& task, const DatasetBundle& data);

// Evaluates a checkpoint on one split of a task without training.
EvalResult evaluate_split(const Checkpoint& ckpt, const TaskSpec& task, const DatasetBundle& data,
                          const EmbeddingProvider& provider, const TrainConfig& cfg,
                          const std::vector<SplitRow>& split);

// Trains on the (optionally limit-subsampled) train split, early-stops on the
// validation metric, restores the best parameters and reports the test metric.
// Mutates ckpt (stage becomes "finetuned").
FinetuneReport finetune_and_eval(Checkpoint& ckpt, const TaskSpec& task,
                                 const DatasetBundle& data, const EmbeddingProvider& provider,
                                 const TrainConfig& cfg, long limit = 0,
                                 std::ostream* log = nullptr);

}  // namespace griffin
