// griffin: command-line driver for the RDB learning pipeline.
//
// Subcommands: ingest, generate-synth, pretrain-codec, pretrain-completion,
// sft, finetune, eval, sample-debug. Every training command writes a run
// directory holding the resolved config, a run manifest, JSONL logs, metric
// CSVs and checkpoints.
//
// Exit codes: 0 ok, 2 parse/schema/config, 3 io/service, 4 data/value,
// 5 not found, 6 leakage, 7 consistency/internal, 1 unexpected.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <json.hpp>

#include "griffin/common.hpp"
#include "griffin/embedding.hpp"
#include "griffin/float_codec.hpp"
#include "griffin/graph.hpp"
#include "griffin/sampler.hpp"
#include "griffin/synth.hpp"
#include "griffin/train.hpp"

namespace fs = std::filesystem;
using namespace griffin;

namespace {

int exit_code(ErrorCategory cat) {
    switch (cat) {
        case ErrorCategory::parse:
        case ErrorCategory::schema: return 2;
        case ErrorCategory::io:
        case ErrorCategory::service: return 3;
        case ErrorCategory::data:
        case ErrorCategory::value:
        case ErrorCategory::convergence: return 4;
        case ErrorCategory::not_found: return 5;
        case ErrorCategory::leakage: return 6;
        case ErrorCategory::consistency: return 7;
    }
    return 1;
}

struct ModelFlags {
    int d = 512;
    int layers = 4;
    int heads = 8;
    double dropout = 0.1;
    std::string first_layer = "self";  // self | cross
    std::string attention = "full";    // full | avg
    std::string relations = "max";     // max | mean

    void add_to(CLI::App* cmd) {
        cmd->add_option("--d", d, "embedding dimension");
        cmd->add_option("--layers", layers, "message passing layers");
        cmd->add_option("--heads", heads, "attention heads");
        cmd->add_option("--dropout", dropout, "attention dropout rate");
        cmd->add_option("--first-layer", first_layer, "first layer kind: self|cross")
            ->check(CLI::IsMember({"self", "cross"}));
        cmd->add_option("--attention", attention, "attention: full|avg (ablation)")
            ->check(CLI::IsMember({"full", "avg"}));
        cmd->add_option("--relations", relations, "across-relation aggregation: max|mean (ablation)")
            ->check(CLI::IsMember({"max", "mean"}));
    }

    GriffinConfig to_config() const {
        GriffinConfig cfg;
        cfg.d = d;
        cfg.layers = layers;
        cfg.heads = heads;
        cfg.dropout = dropout;
        cfg.first_layer_self_attention = first_layer == "self";
        cfg.avg_attention = attention == "avg";
        cfg.mean_relations = relations == "mean";
        cfg.validate();
        return cfg;
    }
};

struct TrainFlags {
    TrainConfig cfg;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--lr", cfg.learning_rate, "learning rate");
        cmd->add_option("--weight-decay", cfg.weight_decay, "decoupled L2 regularization");
        cmd->add_option("--batch-size", cfg.batch_size, "mini-batch size");
        cmd->add_option("--patience", cfg.patience, "early stopping patience (epochs)");
        cmd->add_option("--max-epochs", cfg.max_epochs, "epoch budget");
        cmd->add_option("--seed", cfg.seed, "run seed");
        cmd->add_option("--hops", cfg.sampling.hops, "sampling depth");
        cmd->add_option("--fanout", cfg.sampling.fanout, "max neighbors per relation per hop");
        cmd->add_option("--workers", cfg.workers, "batch assembly threads");
        cmd->add_option("--completion-steps", cfg.completion_steps,
                        "optimizer step budget (completion pretraining)");
        cmd->add_option("--completion-eval-every", cfg.completion_eval_every,
                        "validation cadence in steps (0: once per epoch equivalent)");
    }
};

// Run directory scaffolding: resolved config, manifest, logs.
struct RunDir {
    fs::path root;
    std::ofstream log;

    RunDir(const std::string& dir, CLI::App& app, const std::string& command) : root(dir) {
        fs::create_directories(root);
        std::ofstream cfg(root / "config.toml");
        cfg << app.config_to_str(true, true);
        log.open(root / "log.jsonl");
        manifest["command"] = command;
        manifest["stages"] = nlohmann::json::array();
    }

    nlohmann::json manifest;

    void add_stage(const std::string& stage, const nlohmann::json& detail) {
        nlohmann::json entry = detail;
        entry["stage"] = stage;
        manifest["stages"].push_back(entry);
    }

    void finish() {
        std::ofstream out(root / "run_manifest.json");
        out << manifest.dump(2) << "\n";
    }
};

std::shared_ptr<EmbeddingProvider> make_provider(int dimension) {
    auto provider = EmbeddingProvider::from_env(dimension);
    if (provider->mode() == EmbeddingMode::external_service) {
        std::cerr << "embedding provider: external service (GRIFFIN_EMBED_ENDPOINT)\n";
    }
    return provider;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// subcommand implementations

int cmd_ingest(const std::string& manifest_path, const std::string& data_dir,
               const std::string& snapshot, const std::string& report_path) {
    const RdbManifest manifest = load_manifest(manifest_path);
    const LoadResult loaded = load_tables(manifest, data_dir);
    const HeteroGraph graph = build_graph(loaded.frames, manifest);

    nlohmann::json report;
    report["rdb"] = manifest.name;
    report["tables"] = nlohmann::json::array();
    for (const auto& [table, rows] : loaded.report.rows_per_table) {
        report["tables"].push_back({{"name", table}, {"rows", rows}});
    }
    report["total_rows"] = loaded.report.total_rows();
    report["dangling_fks"] = nlohmann::json::array();
    for (const auto& d : loaded.report.dangling_fks) {
        report["dangling_fks"].push_back(
            {{"table", d.fk_table}, {"column", d.fk_column}, {"nulled", d.count}});
    }
    report["total_dangling"] = loaded.report.total_dangling();
    report["node_types"] = graph.num_types();
    report["relations"] = nlohmann::json::array();
    for (const RelationAdj& rel : graph.relations) {
        report["relations"].push_back({{"name", rel.name},
                                       {"direction", rel.direction == RelationDirection::forward
                                                         ? "forward"
                                                         : "reversed"},
                                       {"edges", rel.edge_count()}});
    }
    std::cout << report.dump(2) << "\n";
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << report.dump(2) << "\n";
    }
    if (!snapshot.empty()) {
        save_graph_snapshot(graph, snapshot);
        std::cerr << "graph snapshot written to " << snapshot << "\n";
    }
    return 0;
}

int cmd_generate_synth(const SynthSpec& spec, const std::string& out_dir) {
    const SynthOutput out = generate(spec);
    write_synth(out, out_dir);
    nlohmann::json report;
    report["name"] = spec.name;
    report["dir"] = out_dir;
    for (const TableFrame& frame : out.frames) {
        report["rows"][frame.spec.name] = frame.row_count;
    }
    if (out.task) {
        report["task"] = out.task->name;
        report["oracle_accuracy"] = oracle_accuracy(spec, out);
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_pretrain_codec(CLI::App& app, const CodecPretrainConfig& cfg, const std::string& out_dir) {
    RunDir run(out_dir, app, "pretrain-codec");
    const FloatCodec codec = pretrain_float_codec(cfg);
    const double mae = codec_holdout_mae(codec, cfg.holdout_size, mix_seed(cfg.seed, 0x401d011));
    save_codec(codec, {}, (run.root / "codec.bin").string());
    run.add_stage("pretrain-codec", {{"d", cfg.d},
                                     {"steps", cfg.steps},
                                     {"seed", cfg.seed},
                                     {"holdout_mae", mae}});
    run.finish();
    std::cout << "codec holdout MAE " << mae << " -> " << (run.root / "codec.bin").string() << "\n";
    return 0;
}

int cmd_pretrain_completion(CLI::App& app, const std::vector<std::string>& corpus_dirs,
                            const std::string& codec_path, const ModelFlags& model_flags,
                            const TrainConfig& train_cfg, const std::string& out_dir) {
    RunDir run(out_dir, app, "pretrain-completion");

    auto [codec, _] = load_codec(codec_path);
    Checkpoint ckpt;
    ckpt.model = GriffinModel::init(model_flags.to_config(), train_cfg.seed);
    if (codec.dimension() != ckpt.model.cfg.d) {
        throw DimensionMismatch("codec dimension " + std::to_string(codec.dimension()) +
                                " != model d " + std::to_string(ckpt.model.cfg.d));
    }
    ckpt.codec = std::move(codec);
    ckpt.provider_dimension = ckpt.model.cfg.d;

    std::vector<DatasetBundle> bundles;
    std::vector<const DatasetBundle*> corpus;
    for (const std::string& dir : corpus_dirs) bundles.push_back(DatasetBundle::load(dir));
    for (const DatasetBundle& b : bundles) corpus.push_back(&b);

    auto provider = make_provider(ckpt.model.cfg.d);
    const CompletionStats stats = pretrain_completion(ckpt, corpus, *provider, train_cfg, &run.log);
    save_checkpoint(ckpt, (run.root / "checkpoint.bin").string());

    nlohmann::json datasets = nlohmann::json::array();
    for (const DatasetBundle& b : bundles) datasets.push_back(b.name);
    run.add_stage("completion", {{"datasets", datasets},
                                 {"seed", train_cfg.seed},
                                 {"steps", stats.steps},
                                 {"initial_val_loss", stats.initial_val_loss},
                                 {"best_val_loss", stats.best_val_loss},
                                 {"skipped_rows", stats.skipped_rows}});
    run.finish();
    std::cout << "completion: val loss " << stats.initial_val_loss << " -> " << stats.best_val_loss
              << " in " << stats.steps << " steps\n";
    return 0;
}

int cmd_sft(CLI::App& app, const std::string& checkpoint_path,
            const std::vector<std::string>& task_paths, const std::vector<std::string>& data_dirs,
            const std::vector<std::string>& downstream, const TrainConfig& train_cfg,
            const std::string& out_dir) {
    if (task_paths.size() != data_dirs.size()) {
        throw SchemaError("--task and --data must be given the same number of times");
    }
    RunDir run(out_dir, app, "sft");

    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    std::vector<TaskSpec> tasks;
    std::vector<DatasetBundle> bundles;
    for (std::size_t i = 0; i < task_paths.size(); ++i) {
        tasks.push_back(load_task(task_paths[i]));
        bundles.push_back(DatasetBundle::load(data_dirs[i]));
    }
    std::vector<SftTask> sft_tasks;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        sft_tasks.push_back({&tasks[i], &bundles[i]});
    }

    auto provider = make_provider(ckpt.model.cfg.d);
    const SftStats stats = sft(ckpt, sft_tasks, downstream, *provider, train_cfg, &run.log);
    save_checkpoint(ckpt, (run.root / "checkpoint.bin").string());

    nlohmann::json datasets = nlohmann::json::array();
    for (const TaskSpec& t : tasks) datasets.push_back(t.rdb);
    run.add_stage("sft", {{"datasets", datasets},
                          {"downstream", downstream},
                          {"seed", train_cfg.seed},
                          {"epochs", stats.epochs}});
    run.finish();
    std::cout << "sft finished after " << stats.epochs << " epochs\n";
    return 0;
}

int cmd_finetune(CLI::App& app, const std::string& checkpoint_path, const std::string& codec_path,
                 const std::string& task_path, const std::string& data_dir,
                 const ModelFlags& model_flags, const TrainConfig& base_cfg, long limit, int seeds,
                 const std::string& out_dir) {
    RunDir run(out_dir, app, "finetune");
    const TaskSpec task = load_task(task_path);
    const DatasetBundle data = DatasetBundle::load(data_dir);

    auto base_checkpoint = [&]() -> Checkpoint {
        if (!checkpoint_path.empty()) return load_checkpoint(checkpoint_path);
        if (codec_path.empty()) {
            throw MissingCheckpoint("finetune needs --checkpoint or --codec (fresh model)");
        }
        auto [codec, _] = load_codec(codec_path);
        Checkpoint ckpt;
        ckpt.model = GriffinModel::init(model_flags.to_config(), base_cfg.seed);
        if (codec.dimension() != ckpt.model.cfg.d) {
            throw DimensionMismatch("codec dimension does not match --d");
        }
        ckpt.codec = std::move(codec);
        ckpt.provider_dimension = ckpt.model.cfg.d;
        return ckpt;
    };

    std::ofstream csv(run.root / "metrics.csv");
    csv << "task,seed,limit,val_metric,test_metric,epochs\n";
    csv.precision(10);

    std::vector<double> test_metrics;
    std::shared_ptr<EmbeddingProvider> provider;
    for (int s = 0; s < seeds; ++s) {
        TrainConfig cfg = base_cfg;
        cfg.seed = base_cfg.seed + static_cast<std::uint64_t>(s);
        Checkpoint ckpt = base_checkpoint();
        if (checkpoint_path.empty()) {
            // fresh model per seed: vary the initialization with the run seed
            ckpt.model = GriffinModel::init(model_flags.to_config(), cfg.seed);
        }
        if (!provider) provider = make_provider(ckpt.model.cfg.d);
        const FinetuneReport report =
            finetune_and_eval(ckpt, task, data, *provider, cfg, limit, &run.log);
        csv << report.task << "," << report.seed << "," << limit << "," << report.val_metric << ","
            << report.test_metric << "," << report.epochs << "\n";
        test_metrics.push_back(report.test_metric);
        save_checkpoint(ckpt, (run.root / ("checkpoint_seed" + std::to_string(cfg.seed) + ".bin"))
                                  .string());
    }
    csv << task.name << ",mean," << limit << ",," << mean_of(test_metrics) << ",\n";
    csv << task.name << ",std," << limit << ",," << std_of(test_metrics) << ",\n";

    run.add_stage("finetune", {{"task", task.name},
                               {"dataset", task.rdb},
                               {"limit", limit},
                               {"seeds", seeds},
                               {"base_seed", base_cfg.seed},
                               {"test_metric_mean", mean_of(test_metrics)},
                               {"test_metric_std", std_of(test_metrics)}});
    run.finish();
    std::cout << "finetune " << task.name << ": test " << to_string(task.metric) << " mean "
              << mean_of(test_metrics) << " +- " << std_of(test_metrics) << " over " << seeds
              << " seed(s)\n";
    return 0;
}

int cmd_eval(CLI::App& app, const std::string& checkpoint_path, const std::string& task_path,
             const std::string& data_dir, const std::string& split_name,
             const TrainConfig& train_cfg, const std::string& out_dir) {
    RunDir run(out_dir, app, "eval");
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const TaskSpec task = load_task(task_path);
    const DatasetBundle data = DatasetBundle::load(data_dir);
    auto provider = make_provider(ckpt.model.cfg.d);

    const std::vector<SplitRow>* split = &task.test;
    if (split_name == "train") split = &task.train;
    if (split_name == "val") split = &task.val;

    const EvalResult result =
        evaluate_split(ckpt, task, data, *provider, train_cfg, *split);

    std::ofstream csv(run.root / "metrics.csv");
    csv.precision(10);
    csv << "task,dataset,split,metric,value\n";
    csv << task.name << "," << task.rdb << "," << split_name << "," << to_string(task.metric)
        << "," << result.metric << "\n";

    std::ofstream preds(run.root / "predictions.csv");
    preds.precision(10);
    preds << "index,prediction,target\n";
    for (std::size_t i = 0; i < result.predictions.size(); ++i) {
        preds << i << "," << result.predictions[i] << "," << result.targets[i] << "\n";
    }

    run.add_stage("eval", {{"task", task.name},
                           {"dataset", task.rdb},
                           {"split", split_name},
                           {"metric", to_string(task.metric)},
                           {"value", result.metric}});
    run.finish();
    std::cout << task.name << " " << split_name << " " << to_string(task.metric) << " = "
              << result.metric << "\n";
    return 0;
}

int cmd_sample_debug(const std::string& snapshot, const std::string& type_name, std::int64_t row,
                     std::int64_t cutoff, const SampleConfig& cfg, int target_column) {
    const HeteroGraph graph = load_graph_snapshot(snapshot);
    const int type = graph.type_index(type_name);
    if (type < 0) {
        throw RootNotFound("node type \"" + type_name + "\" not in snapshot");
    }
    const RootedSubgraph sg = sample_subgraph(graph, CellRef{type, row, target_column}, cutoff, cfg);
    std::cout << format_subgraph_tree(sg, graph);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"griffin: graph-centric learning over relational databases"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML config file (flags take precedence)");
    app.get_config_formatter_base()->comment('#');

    std::function<int()> action;

    // ingest
    {
        auto* cmd = app.add_subcommand("ingest", "load + validate an RDB, optionally snapshot the graph");
        auto manifest = std::make_shared<std::string>();
        auto data_dir = std::make_shared<std::string>();
        auto snapshot = std::make_shared<std::string>();
        auto report = std::make_shared<std::string>();
        cmd->add_option("--manifest", *manifest, "manifest JSON path")->required();
        cmd->add_option("--data-dir", *data_dir, "directory with <table>.csv files")->required();
        cmd->add_option("--snapshot", *snapshot, "write a binary graph snapshot here");
        cmd->add_option("--report", *report, "write the validation report JSON here");
        cmd->callback([&, manifest, data_dir, snapshot, report] {
            action = [=] { return cmd_ingest(*manifest, *data_dir, *snapshot, *report); };
        });
    }

    // generate-synth
    {
        auto* cmd = app.add_subcommand("generate-synth", "emit a synthetic RDB with a planted task");
        auto spec = std::make_shared<SynthSpec>();
        auto scenario = std::make_shared<std::string>("commerce");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--scenario", *scenario,
                        "commerce|other|signal-column|unbalanced-relations|profile-table|codebook-table")
            ->check(CLI::IsMember({"commerce", "other", "signal-column", "unbalanced-relations",
                                   "profile-table", "codebook-table"}));
        cmd->add_option("--name", spec->name, "dataset name")->required();
        cmd->add_option("--out", *out, "output directory")->required();
        cmd->add_option("--entities", spec->entities, "entity count");
        cmd->add_option("--min-events", spec->min_events, "min events per entity");
        cmd->add_option("--max-events", spec->max_events, "max events per entity");
        cmd->add_option("--dimension-rows", spec->dimension_rows, "dimension table rows");
        cmd->add_option("--label-noise", spec->label_noise, "label flip probability");
        cmd->add_option("--distractors", spec->distractors, "distractor columns (signal-column)");
        cmd->add_option("--seed", spec->seed, "generation seed");
        cmd->callback([&, spec, scenario, out] {
            action = [=] {
                SynthSpec s = *spec;
                if (*scenario == "commerce") s.scenario = SynthSpec::Scenario::commerce;
                if (*scenario == "other") s.scenario = SynthSpec::Scenario::other;
                if (*scenario == "signal-column") s.scenario = SynthSpec::Scenario::signal_column;
                if (*scenario == "unbalanced-relations") {
                    s.scenario = SynthSpec::Scenario::unbalanced_relations;
                }
                if (*scenario == "profile-table") s.scenario = SynthSpec::Scenario::profile_table;
                if (*scenario == "codebook-table") s.scenario = SynthSpec::Scenario::codebook_table;
                return cmd_generate_synth(s, *out);
            };
        });
    }

    // pretrain-codec
    {
        auto* cmd = app.add_subcommand("pretrain-codec", "train + freeze the float ENC/DEC codec");
        auto cfg = std::make_shared<CodecPretrainConfig>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--d", cfg->d, "embedding dimension");
        cmd->add_option("--hidden", cfg->hidden, "hidden width");
        cmd->add_option("--steps", cfg->steps, "optimizer steps");
        cmd->add_option("--batch-size", cfg->batch_size, "batch size");
        cmd->add_option("--lr", cfg->lr, "learning rate");
        cmd->add_option("--seed", cfg->seed, "seed");
        cmd->add_option("--tolerance", cfg->tolerance, "held-out MAE bound");
        cmd->add_option("--out-dir", *out, "run directory")->required();
        cmd->callback([&, cfg, out] {
            action = [=, &app] { return cmd_pretrain_codec(app, *cfg, *out); };
        });
    }

    // pretrain-completion
    {
        auto* cmd = app.add_subcommand("pretrain-completion", "masked-cell completion pretraining");
        auto corpus = std::make_shared<std::vector<std::string>>();
        auto codec = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto model_flags = std::make_shared<ModelFlags>();
        auto train_flags = std::make_shared<TrainFlags>();
        cmd->add_option("--corpus", *corpus, "dataset directory (repeatable)")->required();
        cmd->add_option("--codec", *codec, "pretrained codec checkpoint")->required();
        cmd->add_option("--out-dir", *out, "run directory")->required();
        model_flags->add_to(cmd);
        train_flags->add_to(cmd);
        cmd->callback([&, corpus, codec, out, model_flags, train_flags] {
            action = [=, &app] {
                return cmd_pretrain_completion(app, *corpus, *codec, *model_flags,
                                               train_flags->cfg, *out);
            };
        });
    }

    // sft
    {
        auto* cmd = app.add_subcommand("sft", "joint supervised fine-tuning across tasks");
        auto ckpt = std::make_shared<std::string>();
        auto tasks = std::make_shared<std::vector<std::string>>();
        auto datas = std::make_shared<std::vector<std::string>>();
        auto downstream = std::make_shared<std::vector<std::string>>();
        auto out = std::make_shared<std::string>();
        auto train_flags = std::make_shared<TrainFlags>();
        cmd->add_option("--checkpoint", *ckpt, "input checkpoint")->required();
        cmd->add_option("--task", *tasks, "task JSON (repeatable, paired with --data)")->required();
        cmd->add_option("--data", *datas, "dataset directory (repeatable)")->required();
        cmd->add_option("--downstream", *downstream,
                        "datasets registered as downstream (leakage audit)");
        cmd->add_option("--out-dir", *out, "run directory")->required();
        train_flags->add_to(cmd);
        cmd->callback([&, ckpt, tasks, datas, downstream, out, train_flags] {
            action = [=, &app] {
                return cmd_sft(app, *ckpt, *tasks, *datas, *downstream, train_flags->cfg, *out);
            };
        });
    }

    // finetune
    {
        auto* cmd = app.add_subcommand("finetune", "downstream fine-tuning + test evaluation");
        auto ckpt = std::make_shared<std::string>();
        auto codec = std::make_shared<std::string>();
        auto task = std::make_shared<std::string>();
        auto data = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto limit = std::make_shared<long>(0);
        auto seeds = std::make_shared<int>(1);
        auto model_flags = std::make_shared<ModelFlags>();
        auto train_flags = std::make_shared<TrainFlags>();
        cmd->add_option("--checkpoint", *ckpt, "input checkpoint (omit for unpretrained)");
        cmd->add_option("--codec", *codec, "codec checkpoint (required without --checkpoint)");
        cmd->add_option("--task", *task, "task JSON")->required();
        cmd->add_option("--data", *data, "dataset directory")->required();
        cmd->add_option("--limit", *limit, "train subsample size (0 = full)");
        cmd->add_option("--seeds", *seeds, "number of run seeds");
        cmd->add_option("--out-dir", *out, "run directory")->required();
        model_flags->add_to(cmd);
        train_flags->add_to(cmd);
        cmd->callback([&, ckpt, codec, task, data, out, limit, seeds, model_flags, train_flags] {
            action = [=, &app] {
                return cmd_finetune(app, *ckpt, *codec, *task, *data, *model_flags,
                                    train_flags->cfg, *limit, *seeds, *out);
            };
        });
    }

    // eval
    {
        auto* cmd = app.add_subcommand("eval", "evaluate a frozen checkpoint on a task split");
        auto ckpt = std::make_shared<std::string>();
        auto task = std::make_shared<std::string>();
        auto data = std::make_shared<std::string>();
        auto split = std::make_shared<std::string>("test");
        auto out = std::make_shared<std::string>();
        auto train_flags = std::make_shared<TrainFlags>();
        cmd->add_option("--checkpoint", *ckpt, "checkpoint to evaluate")->required();
        cmd->add_option("--task", *task, "task JSON")->required();
        cmd->add_option("--data", *data, "dataset directory")->required();
        cmd->add_option("--split", *split, "train|val|test")
            ->check(CLI::IsMember({"train", "val", "test"}));
        cmd->add_option("--out-dir", *out, "run directory")->required();
        train_flags->add_to(cmd);
        cmd->callback([&, ckpt, task, data, split, out, train_flags] {
            action = [=, &app] {
                return cmd_eval(app, *ckpt, *task, *data, *split, train_flags->cfg, *out);
            };
        });
    }

    // sample-debug
    {
        auto* cmd = app.add_subcommand("sample-debug", "print a sampled subgraph as a text tree");
        auto snapshot = std::make_shared<std::string>();
        auto type = std::make_shared<std::string>();
        auto row = std::make_shared<std::int64_t>(0);
        auto cutoff = std::make_shared<std::int64_t>(0);
        auto column = std::make_shared<int>(0);
        auto cfg = std::make_shared<SampleConfig>();
        cmd->add_option("--snapshot", *snapshot, "graph snapshot from `ingest --snapshot`")
            ->required();
        cmd->add_option("--type", *type, "root node type (table name)")->required();
        cmd->add_option("--row", *row, "root row index")->required();
        cmd->add_option("--cutoff", *cutoff, "temporal cutoff (epoch seconds)")->required();
        cmd->add_option("--target-column", *column, "target column index");
        cmd->add_option("--hops", cfg->hops, "sampling depth");
        cmd->add_option("--fanout", cfg->fanout, "fanout per relation");
        cmd->add_option("--seed", cfg->seed, "sampling seed");
        cmd->callback([&, snapshot, type, row, cutoff, column, cfg] {
            action = [=] { return cmd_sample_debug(*snapshot, *type, *row, *cutoff, *cfg, *column); };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return action();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
