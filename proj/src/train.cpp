#include "griffin/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "griffin/binio.hpp"
#include "griffin/common.hpp"

namespace griffin {

void TrainConfig::validate() const {
    if (learning_rate <= 0 || weight_decay < 0 || batch_size <= 0 || patience <= 0 ||
        max_epochs <= 0 || workers <= 0) {
        throw SchemaError("train config values must be positive");
    }
}

DatasetBundle DatasetBundle::load(const std::string& dir) {
    RdbManifest manifest = load_manifest(dir + "/manifest.json");
    LoadResult loaded = load_tables(manifest, dir);
    DatasetBundle bundle;
    bundle.name = manifest.name;
    bundle.manifest = std::move(manifest);
    bundle.frames = std::move(loaded.frames);
    bundle.graph = build_graph(bundle.frames, bundle.manifest);
    bundle.encoders = ColumnEncoders::fit(bundle.frames);
    return bundle;
}

DatasetBundle DatasetBundle::from(RdbManifest manifest, std::vector<TableFrame> frames) {
    DatasetBundle bundle;
    bundle.name = manifest.name;
    bundle.manifest = std::move(manifest);
    bundle.frames = std::move(frames);
    bundle.graph = build_graph(bundle.frames, bundle.manifest);
    bundle.encoders = ColumnEncoders::fit(bundle.frames);
    return bundle;
}

// ---------------------------------------------------------------------------
// Losses

double completion_loss(const Vec& z, const Vec& cell_embedding) {
    const double nz = l2_norm(z);
    const double nc = l2_norm(cell_embedding);
    if (nz < 1e-12 || nc < 1e-12) {
        throw ZeroVector("completion loss needs nonzero vectors");
    }
    return 1.0 - dot(z, cell_embedding) / (nz * nc);
}

Vec completion_loss_grad(const Vec& z, const Vec& cell_embedding) {
    const double nz = l2_norm(z);
    const double nc = l2_norm(cell_embedding);
    if (nz < 1e-12 || nc < 1e-12) {
        throw ZeroVector("completion loss needs nonzero vectors");
    }
    const double zc = dot(z, cell_embedding);
    Vec g(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        g[i] = -(cell_embedding[i] / (nz * nc) - zc * z[i] / (nz * nz * nz * nc));
    }
    return g;
}

LossGrad classification_loss(const Vec& z, const std::vector<Vec>& label_embeddings, int target) {
    Vec logits(label_embeddings.size());
    for (std::size_t i = 0; i < label_embeddings.size(); ++i) {
        logits[i] = dot(z, label_embeddings[i]);
    }
    const Vec probs = softmax(logits);
    LossGrad out;
    out.loss = -std::log(std::max(probs[target], 1e-300));
    out.dz.assign(z.size(), 0.0);
    for (std::size_t i = 0; i < label_embeddings.size(); ++i) {
        const double coeff = probs[i] - (static_cast<int>(i) == target ? 1.0 : 0.0);
        axpy(coeff, label_embeddings[i], out.dz);
    }
    return out;
}

LossGrad regression_loss(const Vec& z, const FloatCodec& codec, double normalized_target) {
    const double pred = codec.decode(z);
    const double err = pred - normalized_target;
    LossGrad out;
    out.loss = err * err;
    out.dz = codec.decode_input_grad(z, 2.0 * err);
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr char kCkptMagic[4] = {'G', 'R', 'F', 'K'};
constexpr std::uint32_t kCkptVersion = 1;
}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write checkpoint: " + tmp);
        out.write(kCkptMagic, 4);
        binio::put_u32(out, kCkptVersion);

        nlohmann::json header;
        const GriffinConfig& c = ckpt.model.cfg;
        header["model"] = {{"d", c.d},
                           {"layers", c.layers},
                           {"heads", c.heads},
                           {"dropout", c.dropout},
                           {"first_layer_self_attention", c.first_layer_self_attention},
                           {"avg_attention", c.avg_attention},
                           {"mean_relations", c.mean_relations}};
        header["provider"] = {
            {"mode", ckpt.provider_mode == EmbeddingMode::deterministic_stub ? "stub" : "external"},
            {"dimension", ckpt.provider_dimension}};
        header["stage"] = ckpt.stage;
        header["datasets_seen"] = ckpt.datasets_seen;
        header["registered_downstream"] = ckpt.registered_downstream;
        // named_parameters() hands out mutable pointers; serialization only reads
        auto named = const_cast<Checkpoint&>(ckpt).model.named_parameters();
        std::vector<std::string> names;
        for (auto& [name, p] : named) names.push_back(name);
        header["tensors"] = names;
        binio::put_string(out, header.dump());

        for (auto& [name, p] : named) {
            binio::put_u32(out, static_cast<std::uint32_t>(p->value.rows));
            binio::put_u32(out, static_cast<std::uint32_t>(p->value.cols));
            binio::put_f64_array(out, p->value.data);
        }
        write_codec(out, ckpt.codec, {});
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingCheckpoint("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCkptMagic, 4) != 0) {
        throw ParseError("not a model checkpoint: " + path);
    }
    const std::uint32_t version = binio::get_u32(in);
    if (version != kCkptVersion) {
        throw ParseError("unsupported checkpoint version " + std::to_string(version));
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(binio::get_string(in));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad checkpoint header in " + path + ": " + e.what());
    }

    GriffinConfig cfg;
    cfg.d = header.at("model").at("d").get<int>();
    cfg.layers = header.at("model").at("layers").get<int>();
    cfg.heads = header.at("model").at("heads").get<int>();
    cfg.dropout = header.at("model").at("dropout").get<double>();
    cfg.first_layer_self_attention = header.at("model").at("first_layer_self_attention").get<bool>();
    cfg.avg_attention = header.at("model").at("avg_attention").get<bool>();
    cfg.mean_relations = header.at("model").at("mean_relations").get<bool>();

    Checkpoint ckpt;
    ckpt.model = GriffinModel::init(cfg, 0);
    ckpt.provider_dimension = header.at("provider").at("dimension").get<int>();
    ckpt.provider_mode = header.at("provider").at("mode").get<std::string>() == "stub"
                             ? EmbeddingMode::deterministic_stub
                             : EmbeddingMode::external_service;
    ckpt.stage = header.at("stage").get<std::string>();
    ckpt.datasets_seen = header.at("datasets_seen").get<std::vector<std::string>>();
    ckpt.registered_downstream =
        header.at("registered_downstream").get<std::vector<std::string>>();

    const std::vector<std::string> names = header.at("tensors").get<std::vector<std::string>>();
    std::unordered_map<std::string, Param*> by_name;
    for (auto& [name, p] : ckpt.model.named_parameters()) by_name.emplace(name, p);
    if (names.size() != by_name.size()) {
        throw ParseError("checkpoint tensor list does not match the model configuration");
    }
    for (const std::string& name : names) {
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw ParseError("unexpected tensor \"" + name + "\" in " + path);
        const int rows = static_cast<int>(binio::get_u32(in));
        const int cols = static_cast<int>(binio::get_u32(in));
        if (rows != it->second->value.rows || cols != it->second->value.cols) {
            throw ParseError("tensor \"" + name + "\" has unexpected shape in " + path);
        }
        it->second->value.data = binio::get_f64_array(in);
    }
    auto [codec, norms] = read_codec(in);
    ckpt.codec = std::move(codec);
    if (!in) throw ParseError("truncated checkpoint: " + path);
    return ckpt;
}

// ---------------------------------------------------------------------------
// Shared training machinery

namespace {

// Deterministic worker pool: output slot i only ever written by the worker
// that owns index i.
void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn) {
    const int use = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(workers, n)));
    if (use == 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < use; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::int64_t i = w; i < n; i += use) fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

struct Example {
    CellRef root;
    std::int64_t cutoff = 0;
    int class_target = -1;        // classification
    double normalized_target = 0;  // regression
    Vec completion_target;         // completion pretraining
};

std::vector<EnrichedSubgraph> assemble_batch(const std::vector<Example>& batch,
                                             const DatasetBundle& data,
                                             const EmbeddingProvider& provider,
                                             const FloatCodec& codec, const SampleConfig& sampling,
                                             int workers) {
    std::vector<EnrichedSubgraph> out(batch.size());
    parallel_for(static_cast<std::int64_t>(batch.size()), workers, [&](std::int64_t i) {
        const Example& ex = batch[i];
        const RootedSubgraph sg = sample_subgraph(data.graph, ex.root, ex.cutoff, sampling);
        out[i] = enrich(sg, data.frames, data.manifest, data.graph, provider, codec, data.encoders);
    });
    return out;
}

// Context for one supervised task: resolved target location, label embeddings
// or the train-split target normalizer, and usable split rows.
struct TaskContext {
    const TaskSpec* task = nullptr;
    const DatasetBundle* data = nullptr;
    int target_type = -1;
    int target_column = -1;
    std::vector<Vec> label_embeddings;
    std::unordered_map<std::string, int> label_index;
    QuantileNormalizer target_normalizer;
    std::vector<SplitRow> train, val, test;
    std::int64_t dropped_rows = 0;  // null targets

    Example make_example(const SplitRow& row) const;
};

TaskContext build_task_context(const TaskSpec& task, const DatasetBundle& data,
                               const EmbeddingProvider& provider) {
    TaskContext ctx;
    ctx.task = &task;
    ctx.data = &data;
    ctx.target_type = data.graph.type_index(task.target_table);
    if (ctx.target_type < 0) {
        throw SchemaError("task " + task.name + ": target table " + task.target_table +
                          " not in dataset " + data.name);
    }
    const TableSpec& spec = data.manifest.tables[ctx.target_type];
    ctx.target_column = spec.column_index(task.target_column);
    if (ctx.target_column < 0) {
        throw SchemaError("task " + task.name + ": target column " + task.target_column +
                          " not in table " + task.target_table);
    }

    if (task.kind == TaskKind::classification) {
        std::set<std::string> unique(task.label_texts.begin(), task.label_texts.end());
        if (unique.size() != task.label_texts.size()) {
            throw DuplicateLabels("task " + task.name + " has duplicate label texts");
        }
        if ((task.metric == MetricKind::auroc || task.metric == MetricKind::logloss) &&
            task.label_texts.size() != 2) {
            throw SchemaError("task " + task.name + ": " + to_string(task.metric) +
                              " requires exactly 2 labels");
        }
        for (std::size_t i = 0; i < task.label_texts.size(); ++i) {
            ctx.label_embeddings.push_back(provider.embed(task.label_texts[i]));
            ctx.label_index.emplace(task.label_texts[i], static_cast<int>(i));
        }
    } else {
        ctx.target_normalizer = fit_target_normalizer(task, data);
    }

    const TableFrame& frame = data.frames[ctx.target_type];
    auto keep_usable = [&](const std::vector<SplitRow>& in) {
        std::vector<SplitRow> out;
        for (const SplitRow& r : in) {
            if (r.row < 0 || r.row >= frame.row_count || frame.is_null(r.row, ctx.target_column)) {
                ++ctx.dropped_rows;
                continue;
            }
            if (task.kind == TaskKind::classification) {
                const std::string& value = frame.columns[ctx.target_column].str[r.row];
                if (!ctx.label_index.count(value)) {
                    throw CellTypeError("task " + task.name + ": label \"" + value +
                                        "\" at row " + std::to_string(r.row) +
                                        " not in the task label set");
                }
            }
            out.push_back(r);
        }
        return out;
    };
    ctx.train = keep_usable(task.train);
    ctx.val = keep_usable(task.val);
    ctx.test = keep_usable(task.test);
    return ctx;
}

Example TaskContext::make_example(const SplitRow& row) const {
    Example ex;
    ex.root = CellRef{target_type, row.row, target_column};
    ex.cutoff = row.cutoff;
    const TableFrame& frame = data->frames[target_type];
    if (task->kind == TaskKind::classification) {
        ex.class_target = label_index.at(frame.columns[target_column].str[row.row]);
    } else {
        ex.normalized_target =
            target_normalizer.transform(frame.columns[target_column].f64[row.row]);
    }
    return ex;
}

// One optimizer step over an assembled batch; returns the mean loss.
double supervised_step(GriffinModel& model, AdamW& opt, const TaskContext& ctx,
                       const std::vector<EnrichedSubgraph>& enriched,
                       const std::vector<Example>& batch, const FloatCodec& codec,
                       std::uint64_t step_seed) {
    opt.zero_grad();
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    double total_loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::mt19937_64 rng(mix_seed(step_seed, i));
        const ForwardTrace trace = forward(model, enriched[i], RunMode::train, &rng);
        LossGrad lg = ctx.task->kind == TaskKind::classification
                          ? classification_loss(trace.z, ctx.label_embeddings,
                                                batch[i].class_target)
                          : regression_loss(trace.z, codec, batch[i].normalized_target);
        total_loss += lg.loss;
        for (double& g : lg.dz) g *= inv_batch;
        backward(model, enriched[i], trace, lg.dz);
    }
    opt.step();
    return total_loss * inv_batch;
}

// Validation metric of the current parameters on a split.
EvalResult evaluate_context(const GriffinModel& model, const TaskContext& ctx,
                            const EmbeddingProvider& provider, const FloatCodec& codec,
                            const TrainConfig& cfg, const std::vector<SplitRow>& split) {
    EvalResult result;
    if (split.empty()) {
        throw InsufficientData("evaluation split for task " + ctx.task->name + " is empty");
    }
    SampleConfig sampling = cfg.sampling;
    sampling.seed = mix_seed(cfg.seed, 0xe7a1);  // fixed sampling stream for evaluation

    const std::size_t chunk = 256;
    for (std::size_t start = 0; start < split.size(); start += chunk) {
        const std::size_t end = std::min(split.size(), start + chunk);
        std::vector<Example> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(ctx.make_example(split[i]));
        const std::vector<EnrichedSubgraph> enriched =
            assemble_batch(batch, *ctx.data, provider, codec, sampling, cfg.workers);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const ForwardTrace trace = forward(model, enriched[i], RunMode::eval);
            if (ctx.task->kind == TaskKind::classification) {
                Vec logits(ctx.label_embeddings.size());
                for (std::size_t c = 0; c < ctx.label_embeddings.size(); ++c) {
                    logits[c] = dot(trace.z, ctx.label_embeddings[c]);
                }
                const Vec probs = softmax(logits);
                switch (ctx.task->metric) {
                    case MetricKind::accuracy: {
                        const int argmax = static_cast<int>(
                            std::max_element(probs.begin(), probs.end()) - probs.begin());
                        result.predictions.push_back(argmax);
                        break;
                    }
                    default:
                        result.predictions.push_back(probs[1]);  // binary positive class
                }
                result.targets.push_back(batch[i].class_target);
            } else {
                result.predictions.push_back(codec.decode(trace.z));
                result.targets.push_back(batch[i].normalized_target);
            }
        }
    }
    result.metric = evaluate_metric(ctx.task->metric, result.predictions, result.targets);
    return result;
}

void log_line(std::ostream* log, const nlohmann::json& record) {
    if (log) *log << record.dump() << "\n";
}

}  // namespace

QuantileNormalizer fit_target_normalizer(const TaskSpec& task, const DatasetBundle& data) {
    const int type = data.graph.type_index(task.target_table);
    if (type < 0) throw SchemaError("target table " + task.target_table + " missing");
    const int col = data.manifest.tables[type].column_index(task.target_column);
    if (col < 0) throw SchemaError("target column " + task.target_column + " missing");
    const TableFrame& frame = data.frames[type];
    std::vector<double> values;
    for (const SplitRow& r : task.train) {
        if (r.row >= 0 && r.row < frame.row_count && !frame.is_null(r.row, col)) {
            values.push_back(frame.columns[col].f64[r.row]);
        }
    }
    return QuantileNormalizer::fit(values);
}

// ---------------------------------------------------------------------------
// Completion pretraining

namespace {

struct CompletionExample {
    int bundle = 0;
    int table = 0;
    std::int64_t row = 0;
};

// Columns of a row that the encoders can mask/encode.
std::vector<int> encodable_cells(const TableFrame& frame, std::int64_t row) {
    std::vector<int> out;
    for (std::size_t c = 0; c < frame.spec.columns.size(); ++c) {
        if (is_key_kind(frame.spec.columns[c].semantic_kind)) continue;
        if (frame.is_null(row, static_cast<int>(c))) continue;
        out.push_back(static_cast<int>(c));
    }
    return out;
}

}  // namespace

CompletionStats pretrain_completion(Checkpoint& ckpt,
                                    const std::vector<const DatasetBundle*>& corpus,
                                    const EmbeddingProvider& provider, const TrainConfig& cfg,
                                    std::ostream* log) {
    cfg.validate();
    CompletionStats stats;

    // Pool of maskable rows (>= 2 encodable cells: one target + context).
    std::vector<CompletionExample> train_pool, val_pool;
    std::mt19937_64 split_rng(mix_seed(cfg.seed, 0x59117));
    for (std::size_t b = 0; b < corpus.size(); ++b) {
        for (std::size_t t = 0; t < corpus[b]->frames.size(); ++t) {
            const TableFrame& frame = corpus[b]->frames[t];
            std::vector<CompletionExample> rows;
            for (std::int64_t r = 0; r < frame.row_count; ++r) {
                if (encodable_cells(frame, r).size() >= 2) {
                    rows.push_back({static_cast<int>(b), static_cast<int>(t), r});
                } else {
                    ++stats.skipped_rows;
                }
            }
            std::shuffle(rows.begin(), rows.end(), split_rng);
            const std::size_t n_val = std::min<std::size_t>(
                rows.size() / 2,
                std::max<std::size_t>(1, static_cast<std::size_t>(
                                             rows.size() * cfg.completion_val_fraction)));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                (i < n_val ? val_pool : train_pool).push_back(rows[i]);
            }
        }
    }
    if (train_pool.empty()) {
        throw EmptyCorpus("completion corpus has no row with maskable context");
    }

    auto bundle_of = [&](const CompletionExample& ex) -> const DatasetBundle& {
        return *corpus[ex.bundle];
    };

    // Deterministic masked column for validation rows; uniform draw in training.
    auto masked_column = [&](const CompletionExample& ex, std::mt19937_64* rng) {
        const TableFrame& frame = bundle_of(ex).frames[ex.table];
        const std::vector<int> cells = encodable_cells(frame, ex.row);
        if (rng) {
            return cells[(*rng)() % cells.size()];
        }
        return cells[mix_seed(cfg.seed, ex.table, static_cast<std::uint64_t>(ex.row)) %
                     cells.size()];
    };

    auto to_example = [&](const CompletionExample& ex, int column) {
        const DatasetBundle& data = bundle_of(ex);
        Example out;
        out.root = CellRef{ex.table, ex.row, column};
        out.cutoff = std::numeric_limits<std::int64_t>::max();
        out.completion_target =
            encode_cell(data.frames[ex.table], ex.row, column, provider, ckpt.codec,
                        data.encoders);
        return out;
    };

    auto val_loss = [&]() {
        double total = 0.0;
        std::size_t count = 0;
        const std::size_t chunk = 256;
        for (std::size_t start = 0; start < val_pool.size(); start += chunk) {
            const std::size_t end = std::min(val_pool.size(), start + chunk);
            // group by bundle to reuse assemble_batch
            for (std::size_t i = start; i < end; ++i) {
                const CompletionExample& ce = val_pool[i];
                const Example ex = to_example(ce, masked_column(ce, nullptr));
                const RootedSubgraph sg =
                    sample_subgraph(bundle_of(ce).graph, ex.root, ex.cutoff, cfg.sampling);
                const EnrichedSubgraph eg =
                    enrich(sg, bundle_of(ce).frames, bundle_of(ce).manifest, bundle_of(ce).graph,
                           provider, ckpt.codec, bundle_of(ce).encoders);
                const ForwardTrace trace = forward(ckpt.model, eg, RunMode::eval);
                if (l2_norm(trace.z) < 1e-12) {
                    total += 1.0;  // orthogonal by convention: untrained zero output
                } else {
                    total += completion_loss(trace.z, ex.completion_target);
                }
                ++count;
            }
        }
        return total / static_cast<double>(count);
    };

    AdamW opt;
    opt.lr = cfg.learning_rate;
    opt.weight_decay = cfg.weight_decay;
    opt.attach(ckpt.model.parameters());

    EarlyStopping stopper;
    stopper.patience = cfg.patience;
    stopper.minimize = true;

    stats.initial_val_loss = val_loss();
    stats.val_history.emplace_back(0, stats.initial_val_loss);
    stopper.update(stats.initial_val_loss, ckpt.model.parameters());
    log_line(log, {{"stage", "completion"}, {"step", 0}, {"val_loss", stats.initial_val_loss}});

    const long eval_every =
        cfg.completion_eval_every > 0
            ? cfg.completion_eval_every
            : std::max<long>(1, static_cast<long>(train_pool.size() / cfg.batch_size));

    std::mt19937_64 rng(mix_seed(cfg.seed, 0x7a14));
    for (long step = 1; step <= cfg.completion_steps; ++step) {
        std::vector<Example> batch;
        std::vector<const DatasetBundle*> batch_data;
        for (int i = 0; i < cfg.batch_size; ++i) {
            const CompletionExample& ce = train_pool[rng() % train_pool.size()];
            const int column = masked_column(ce, &rng);
            const TableFrame& frame = bundle_of(ce).frames[ce.table];
            stats.mask_counts[frame.spec.name + "." + frame.spec.columns[column].name] += 1;
            batch.push_back(to_example(ce, column));
            batch_data.push_back(&bundle_of(ce));
        }

        std::vector<EnrichedSubgraph> enriched(batch.size());
        SampleConfig sampling = cfg.sampling;
        sampling.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(step));
        parallel_for(static_cast<std::int64_t>(batch.size()), cfg.workers, [&](std::int64_t i) {
            const RootedSubgraph sg =
                sample_subgraph(batch_data[i]->graph, batch[i].root, batch[i].cutoff, sampling);
            enriched[i] = enrich(sg, batch_data[i]->frames, batch_data[i]->manifest,
                                 batch_data[i]->graph, provider, ckpt.codec,
                                 batch_data[i]->encoders);
        });

        opt.zero_grad();
        double step_loss = 0.0;
        const double inv_batch = 1.0 / static_cast<double>(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::mt19937_64 drop_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(step), i));
            const ForwardTrace trace = forward(ckpt.model, enriched[i], RunMode::train, &drop_rng);
            if (l2_norm(trace.z) < 1e-12) continue;  // all-masked context, no signal
            step_loss += completion_loss(trace.z, batch[i].completion_target);
            Vec dz = completion_loss_grad(trace.z, batch[i].completion_target);
            for (double& g : dz) g *= inv_batch;
            backward(ckpt.model, enriched[i], trace, dz);
        }
        opt.step();
        stats.steps = step;

        if (step % eval_every == 0 || step == cfg.completion_steps) {
            const double vl = val_loss();
            stats.val_history.emplace_back(step, vl);
            stopper.update(vl, ckpt.model.parameters());
            log_line(log, {{"stage", "completion"},
                           {"step", step},
                           {"train_loss", step_loss * inv_batch},
                           {"val_loss", vl}});
            if (stopper.should_stop()) break;
        }
    }

    stopper.restore_best(ckpt.model.parameters());
    stats.best_val_loss = stopper.best_metric();
    ckpt.stage = "completion";
    for (const DatasetBundle* data : corpus) ckpt.datasets_seen.push_back(data->name);
    return stats;
}

// ---------------------------------------------------------------------------
// Joint SFT

SftStats sft(Checkpoint& ckpt, const std::vector<SftTask>& tasks,
             const std::vector<std::string>& downstream_datasets,
             const EmbeddingProvider& provider, const TrainConfig& cfg, std::ostream* log) {
    cfg.validate();
    SftStats stats;
    if (tasks.empty()) return stats;

    // Leakage audit against both the caller-registered and previously
    // registered downstream datasets.
    std::set<std::string> downstream(downstream_datasets.begin(), downstream_datasets.end());
    downstream.insert(ckpt.registered_downstream.begin(), ckpt.registered_downstream.end());
    for (const SftTask& t : tasks) {
        if (downstream.count(t.task->rdb)) {
            throw LeakageError("SFT dataset \"" + t.task->rdb +
                               "\" is registered as a downstream dataset");
        }
    }
    for (const std::string& name : downstream_datasets) {
        ckpt.registered_downstream.push_back(name);
    }

    std::vector<TaskContext> contexts;
    for (const SftTask& t : tasks) {
        contexts.push_back(build_task_context(*t.task, *t.data, provider));
        if (contexts.back().train.empty() || contexts.back().val.empty()) {
            throw InsufficientData("SFT task " + t.task->name + " has an empty train/val split");
        }
    }

    AdamW opt;
    opt.lr = cfg.learning_rate;
    opt.weight_decay = cfg.weight_decay;
    opt.attach(ckpt.model.parameters());

    EarlyStopping stopper;
    stopper.patience = cfg.patience;
    stopper.minimize = true;  // mean validation rank

    // per task: history of validation metrics, one entry per epoch
    std::vector<std::vector<double>> history(contexts.size());
    std::vector<double> current_metrics(contexts.size());

    std::mt19937_64 rng(mix_seed(cfg.seed, 0x5f7));
    long steps_per_epoch = 0;
    for (const TaskContext& ctx : contexts) {
        steps_per_epoch = std::max<long>(
            steps_per_epoch, static_cast<long>((ctx.train.size() + cfg.batch_size - 1) /
                                               cfg.batch_size));
    }
    steps_per_epoch *= static_cast<long>(contexts.size());

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        for (long s = 0; s < steps_per_epoch; ++s) {
            TaskContext& ctx = contexts[s % contexts.size()];  // round-robin over tasks
            std::vector<Example> batch;
            for (int i = 0; i < cfg.batch_size; ++i) {
                batch.push_back(ctx.make_example(ctx.train[rng() % ctx.train.size()]));
            }
            SampleConfig sampling = cfg.sampling;
            sampling.seed = mix_seed(cfg.seed, epoch, s);
            const std::vector<EnrichedSubgraph> enriched =
                assemble_batch(batch, *ctx.data, provider, ckpt.codec, sampling, cfg.workers);
            supervised_step(ckpt.model, opt, ctx, enriched, batch, ckpt.codec,
                            mix_seed(cfg.seed, 0xd209, epoch * steps_per_epoch + s));
        }

        for (std::size_t t = 0; t < contexts.size(); ++t) {
            current_metrics[t] =
                evaluate_context(ckpt.model, contexts[t], provider, ckpt.codec, cfg,
                                 contexts[t].val)
                    .metric;
            history[t].push_back(current_metrics[t]);
        }
        // mean rank of this epoch among all epochs so far, averaged over tasks
        double mean_rank = 0.0;
        for (std::size_t t = 0; t < contexts.size(); ++t) {
            const bool maximize = metric_maximizes(contexts[t].task->metric);
            int rank = 1;
            for (double past : history[t]) {
                const bool better = maximize ? past > history[t].back() : past < history[t].back();
                if (better) ++rank;
            }
            mean_rank += rank;
        }
        mean_rank /= static_cast<double>(contexts.size());

        const bool improved = stopper.update(mean_rank, ckpt.model.parameters());
        if (improved) stats.best_val_metrics = current_metrics;
        nlohmann::json record = {{"stage", "sft"}, {"epoch", epoch}, {"mean_rank", mean_rank}};
        for (std::size_t t = 0; t < contexts.size(); ++t) {
            record["val_" + contexts[t].task->name] = current_metrics[t];
        }
        log_line(log, record);
        stats.epochs = epoch + 1;
        if (stopper.should_stop()) break;
    }

    stopper.restore_best(ckpt.model.parameters());
    ckpt.stage = "sft";
    for (const SftTask& t : tasks) ckpt.datasets_seen.push_back(t.task->rdb);
    return stats;
}

// ---------------------------------------------------------------------------
// Downstream fine-tuning and evaluation

EvalResult evaluate_split(const Checkpoint& ckpt, const TaskSpec& task, const DatasetBundle& data,
                          const EmbeddingProvider& provider, const TrainConfig& cfg,
                          const std::vector<SplitRow>& split) {
    TaskContext ctx = build_task_context(task, data, provider);
    std::vector<SplitRow> usable;
    for (const SplitRow& r : split) {
        if (r.row >= 0 && r.row < data.frames[ctx.target_type].row_count &&
            !data.frames[ctx.target_type].is_null(r.row, ctx.target_column)) {
            usable.push_back(r);
        }
    }
    return evaluate_context(ckpt.model, ctx, provider, ckpt.codec, cfg, usable);
}

FinetuneReport finetune_and_eval(Checkpoint& ckpt, const TaskSpec& task,
                                 const DatasetBundle& data, const EmbeddingProvider& provider,
                                 const TrainConfig& cfg, long limit, std::ostream* log) {
    cfg.validate();
    TaskContext ctx = build_task_context(task, data, provider);
    if (ctx.train.empty() || ctx.val.empty() || ctx.test.empty()) {
        throw InsufficientData("task " + task.name + " has an empty split after filtering");
    }
    if (limit > static_cast<long>(ctx.train.size())) {
        throw InsufficientData("limit " + std::to_string(limit) + " exceeds train split size " +
                               std::to_string(ctx.train.size()));
    }

    std::vector<SplitRow> train_rows = ctx.train;
    std::mt19937_64 subsample_rng(mix_seed(cfg.seed, 0x11317));
    std::shuffle(train_rows.begin(), train_rows.end(), subsample_rng);
    if (limit > 0) train_rows.resize(limit);

    AdamW opt;
    opt.lr = cfg.learning_rate;
    opt.weight_decay = cfg.weight_decay;
    opt.attach(ckpt.model.parameters());

    EarlyStopping stopper;
    stopper.patience = cfg.patience;
    stopper.minimize = !metric_maximizes(task.metric);

    FinetuneReport report;
    report.task = task.name;
    report.seed = cfg.seed;
    report.train_examples = static_cast<long>(train_rows.size());

    std::mt19937_64 rng(mix_seed(cfg.seed, 0xf17e));
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::shuffle(train_rows.begin(), train_rows.end(), rng);
        long step_in_epoch = 0;
        for (std::size_t start = 0; start < train_rows.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(train_rows.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<Example> batch;
            for (std::size_t i = start; i < end; ++i) batch.push_back(ctx.make_example(train_rows[i]));
            SampleConfig sampling = cfg.sampling;
            sampling.seed = mix_seed(cfg.seed, epoch, step_in_epoch);
            const std::vector<EnrichedSubgraph> enriched =
                assemble_batch(batch, data, provider, ckpt.codec, sampling, cfg.workers);
            supervised_step(ckpt.model, opt, ctx, enriched, batch, ckpt.codec,
                            mix_seed(cfg.seed, 0xd209, epoch * 1000003 + step_in_epoch));
            ++step_in_epoch;
        }

        const double val_metric =
            evaluate_context(ckpt.model, ctx, provider, ckpt.codec, cfg, ctx.val).metric;
        stopper.update(val_metric, ckpt.model.parameters());
        log_line(log, {{"stage", "finetune"},
                       {"task", task.name},
                       {"epoch", epoch},
                       {"val_metric", val_metric}});
        report.epochs = epoch + 1;
        if (stopper.should_stop()) break;
    }

    stopper.restore_best(ckpt.model.parameters());
    report.val_metric = stopper.best_metric();
    report.test_metric =
        evaluate_context(ckpt.model, ctx, provider, ckpt.codec, cfg, ctx.test).metric;
    ckpt.stage = "finetuned";
    ckpt.datasets_seen.push_back(task.rdb);
    return report;
}

}  // namespace griffin
