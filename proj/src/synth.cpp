#include "griffin/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "griffin/common.hpp"

namespace griffin {

void SynthSpec::validate() const {
    if (entities < 10) throw SchemaError("synth spec needs >= 10 entities");
    if (min_events < 1 || max_events < min_events) throw SchemaError("bad event count range");
    if (label_noise < 0.0 || label_noise > 1.0) throw SchemaError("label_noise must be in [0,1]");
    if (distractors < 0) throw SchemaError("distractors must be >= 0");
}

namespace {

constexpr std::int64_t kBaseTime = 1600000000;
constexpr std::int64_t kDay = 86400;

// Incremental row-major table builder.
struct FrameBuilder {
    TableFrame frame;

    explicit FrameBuilder(TableSpec spec) {
        frame.spec = std::move(spec);
        frame.columns.resize(frame.spec.columns.size());
        frame.null_mask.resize(frame.spec.columns.size());
    }

    std::int64_t add_row() {
        for (std::size_t c = 0; c < frame.spec.columns.size(); ++c) {
            switch (frame.spec.columns[c].semantic_kind) {
                case SemanticKind::numerical: frame.columns[c].f64.push_back(0.0); break;
                case SemanticKind::categorical:
                case SemanticKind::text: frame.columns[c].str.emplace_back(); break;
                default: frame.columns[c].i64.push_back(0); break;
            }
            frame.null_mask[c].push_back(0);
        }
        return frame.row_count++;
    }

    void set_i64(std::int64_t row, const char* col, std::int64_t v) {
        frame.columns[frame.spec.column_index(col)].i64[row] = v;
    }
    void set_f64(std::int64_t row, const char* col, double v) {
        frame.columns[frame.spec.column_index(col)].f64[row] = v;
    }
    void set_str(std::int64_t row, const char* col, std::string v) {
        frame.columns[frame.spec.column_index(col)].str[row] = std::move(v);
    }
};

struct Vocab {
    // commerce family
    std::vector<std::string> segments = {"basic", "plus", "premium", "trial"};
    std::vector<std::string> regions = {"north", "south", "east", "west"};
    std::vector<std::string> categories = {"apparel", "electronics", "garden", "toys", "books"};
    // other family (disjoint content words)
    std::vector<std::string> climates = {"arid", "humid", "polar", "temperate"};
    std::vector<std::string> models = {"falcon", "osprey", "condor", "heron"};
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

// 60/20/20 task splits over the label rows, cutoffs attached.
void build_splits(TaskSpec& task, const std::vector<std::int64_t>& rows,
                  const std::vector<std::int64_t>& cutoffs, std::mt19937_64& rng) {
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = rows.size() * 6 / 10;
    const std::size_t n_val = rows.size() * 2 / 10;
    for (std::size_t i = 0; i < order.size(); ++i) {
        SplitRow r{rows[order[i]], cutoffs[order[i]]};
        if (i < n_train) {
            task.train.push_back(r);
        } else if (i < n_train + n_val) {
            task.val.push_back(r);
        } else {
            task.test.push_back(r);
        }
    }
}

// Shared generator for the two event-aggregation families (commerce / other /
// unbalanced): entities with timestamped events whose mean signal value
// decides the label, plus an optional dense noise event table.
struct EventFamilyNames {
    const char* entity_table;
    const char* entity_pk;
    const char* event_table;
    const char* event_pk;
    const char* event_value;
    const char* event_time;
    const char* dim_table;    // nullptr for none
    const char* dim_pk;
    const char* dim_cat;
    const char* dim_num;
    const char* event_dim_fk;
    const char* label_table;
    const char* label_pk;
    const char* label_fk;
    const char* label_column;
    const char* label_time;
    const char* negative;
    const char* positive;
    std::vector<std::string> entity_cats;  // optional categorical columns on the entity
    std::vector<std::vector<std::string>> entity_cat_values;
    std::vector<std::string> dim_cat_values;
};

SynthOutput generate_event_family(const SynthSpec& spec, const EventFamilyNames& nm) {
    std::mt19937_64 rng(mix_seed(spec.seed, fnv1a(nm.label_table)));

    TableSpec entity_spec;
    entity_spec.name = nm.entity_table;
    entity_spec.columns.push_back({nm.entity_pk, SemanticKind::primary_key, {}, {}});
    for (const std::string& cat : nm.entity_cats) {
        entity_spec.columns.push_back({cat, SemanticKind::categorical, {}, {}});
    }

    TableSpec event_spec;
    event_spec.name = nm.event_table;
    event_spec.time_column = nm.event_time;
    event_spec.columns.push_back({nm.event_pk, SemanticKind::primary_key, {}, {}});
    event_spec.columns.push_back({std::string(nm.entity_pk), SemanticKind::foreign_key,
                                  FkTarget{nm.entity_table, nm.entity_pk}, {}});
    if (nm.dim_table) {
        event_spec.columns.push_back({nm.event_dim_fk, SemanticKind::foreign_key,
                                      FkTarget{nm.dim_table, nm.dim_pk}, {}});
    }
    event_spec.columns.push_back({nm.event_value, SemanticKind::numerical, {}, {}});
    event_spec.columns.push_back({nm.event_time, SemanticKind::timestamp, {}, {}});

    TableSpec label_spec;
    label_spec.name = nm.label_table;
    label_spec.time_column = nm.label_time;
    label_spec.columns.push_back({nm.label_pk, SemanticKind::primary_key, {}, {}});
    label_spec.columns.push_back({std::string(nm.label_fk), SemanticKind::foreign_key,
                                  FkTarget{nm.entity_table, nm.entity_pk}, {}});
    label_spec.columns.push_back({nm.label_column, SemanticKind::categorical, {}, {}});
    label_spec.columns.push_back({nm.label_time, SemanticKind::timestamp, {}, {}});

    SynthOutput out;
    out.manifest.name = spec.name;

    FrameBuilder entities{entity_spec};
    FrameBuilder events{event_spec};
    FrameBuilder labels{label_spec};

    std::optional<FrameBuilder> dims;
    if (nm.dim_table) {
        TableSpec dim_spec;
        dim_spec.name = nm.dim_table;
        dim_spec.columns.push_back({nm.dim_pk, SemanticKind::primary_key, {}, {}});
        dim_spec.columns.push_back({nm.dim_cat, SemanticKind::categorical, {}, {}});
        dim_spec.columns.push_back({nm.dim_num, SemanticKind::numerical, {}, {}});
        dims.emplace(dim_spec);
        for (std::int64_t i = 0; i < spec.dimension_rows; ++i) {
            const std::int64_t r = dims->add_row();
            dims->set_i64(r, nm.dim_pk, i);
            dims->set_str(r, nm.dim_cat, nm.dim_cat_values[rng() % nm.dim_cat_values.size()]);
            dims->set_f64(r, nm.dim_num, uniform(rng, 1.0, 100.0));
        }
    }

    std::vector<std::int64_t> label_rows, cutoffs;
    for (std::int64_t e = 0; e < spec.entities; ++e) {
        const std::int64_t row = entities.add_row();
        entities.set_i64(row, nm.entity_pk, e);
        for (std::size_t c = 0; c < nm.entity_cats.size(); ++c) {
            entities.set_str(row, nm.entity_cats[c].c_str(),
                             nm.entity_cat_values[c][rng() % nm.entity_cat_values[c].size()]);
        }

        const bool positive = rng() % 2 == 0;
        const std::int64_t n_events = uniform_int(rng, spec.min_events, spec.max_events);
        std::int64_t last_time = kBaseTime;
        for (std::int64_t k = 0; k < n_events; ++k) {
            const std::int64_t t = kBaseTime + k * kDay + uniform_int(rng, 0, 20000);
            last_time = std::max(last_time, t);
            const std::int64_t r = events.add_row();
            events.set_i64(r, nm.event_pk, events.frame.row_count - 1);
            events.set_i64(r, nm.entity_pk, e);
            if (nm.dim_table) {
                events.set_i64(r, nm.event_dim_fk, uniform_int(rng, 0, spec.dimension_rows - 1));
            }
            const double value = positive ? uniform(rng, spec.threshold - 45.0, spec.threshold - 5.0)
                                          : uniform(rng, spec.threshold + 5.0, spec.threshold + 45.0);
            events.set_f64(r, nm.event_value, value);
            events.set_i64(r, nm.event_time, t);
        }
        bool stored = positive;
        if (spec.label_noise > 0.0 && uniform(rng, 0.0, 1.0) < spec.label_noise) {
            stored = !stored;
        }
        const std::int64_t cutoff = last_time + 3600;
        const std::int64_t lr = labels.add_row();
        labels.set_i64(lr, nm.label_pk, lr);
        labels.set_i64(lr, nm.label_fk, e);
        labels.set_str(lr, nm.label_column, stored ? nm.positive : nm.negative);
        labels.set_i64(lr, nm.label_time, cutoff);
        label_rows.push_back(lr);
        cutoffs.push_back(cutoff);
    }

    out.manifest.tables.push_back(entity_spec);
    out.frames.push_back(std::move(entities.frame));
    if (dims) {
        out.manifest.tables.push_back(dims->frame.spec);
        out.frames.push_back(std::move(dims->frame));
    }
    out.manifest.tables.push_back(event_spec);
    out.frames.push_back(std::move(events.frame));
    out.manifest.tables.push_back(label_spec);
    out.frames.push_back(std::move(labels.frame));

    out.manifest.relations.push_back({nm.event_table, nm.entity_pk, nm.entity_table, nm.entity_pk});
    if (nm.dim_table) {
        out.manifest.relations.push_back({nm.event_table, nm.event_dim_fk, nm.dim_table, nm.dim_pk});
    }
    out.manifest.relations.push_back({nm.label_table, nm.label_fk, nm.entity_table, nm.entity_pk});
    validate_manifest(out.manifest);

    TaskSpec task;
    task.name = spec.name + "_" + nm.label_column;
    task.rdb = spec.name;
    task.target_table = nm.label_table;
    task.target_column = nm.label_column;
    task.kind = TaskKind::classification;
    task.label_texts = {nm.negative, nm.positive};
    task.metric = MetricKind::accuracy;
    build_splits(task, label_rows, cutoffs, rng);
    task.validate();
    out.task = std::move(task);
    return out;
}

SynthOutput generate_signal_column(const SynthSpec& spec) {
    std::mt19937_64 rng(mix_seed(spec.seed, fnv1a("signal_column")));
    Vocab vocab;

    // Distractors are numerical draws from the signal's own distribution, so
    // no fixed linear projection can separate them from the signal cell; only
    // column-name attention can.
    TableSpec records_spec;
    records_spec.name = "records";
    records_spec.columns.push_back({"record_id", SemanticKind::primary_key, {}, {}});
    records_spec.columns.push_back({"outcome", SemanticKind::categorical, {}, {}});
    records_spec.columns.push_back({"signal", SemanticKind::numerical, {}, {}});
    for (int c = 0; c < spec.distractors; ++c) {
        records_spec.columns.push_back(
            {"noise_" + std::to_string(c), SemanticKind::numerical, {}, {}});
    }

    FrameBuilder records{records_spec};
    std::vector<std::int64_t> rows, cutoffs;
    for (std::int64_t i = 0; i < spec.entities; ++i) {
        const std::int64_t r = records.add_row();
        records.set_i64(r, "record_id", i);
        const double signal = uniform(rng, -1.0, 1.0);
        records.set_f64(r, "signal", signal);
        bool positive = signal > 0.0;
        if (spec.label_noise > 0.0 && uniform(rng, 0.0, 1.0) < spec.label_noise) {
            positive = !positive;
        }
        records.set_str(r, "outcome", positive ? "pos" : "neg");
        for (int c = 0; c < spec.distractors; ++c) {
            const std::string col = "noise_" + std::to_string(c);
            records.set_f64(r, col.c_str(), uniform(rng, -1.0, 1.0));
        }
        rows.push_back(r);
        cutoffs.push_back(0);
    }

    SynthOutput out;
    out.manifest.name = spec.name;
    out.manifest.tables.push_back(records_spec);
    out.frames.push_back(std::move(records.frame));
    validate_manifest(out.manifest);

    TaskSpec task;
    task.name = spec.name + "_outcome";
    task.rdb = spec.name;
    task.target_table = "records";
    task.target_column = "outcome";
    task.kind = TaskKind::classification;
    task.label_texts = {"neg", "pos"};
    task.metric = MetricKind::accuracy;
    build_splits(task, rows, cutoffs, rng);
    task.validate();
    out.task = std::move(task);
    return out;
}

// Sender/recipient money-movement graph. Both relation types deliver rows of
// the same transfers table, so the node features cannot reveal which side an
// edge came from; only the relation identity separates the initiated
// (label-carrying) transfers from the received (mixture-noise) ones. Received
// fan-in follows the random counterparty draw and varies widely per account.
SynthOutput generate_unbalanced(const SynthSpec& spec) {
    std::mt19937_64 rng(mix_seed(spec.seed, fnv1a("unbalanced")));

    TableSpec accounts_spec;
    accounts_spec.name = "accounts";
    accounts_spec.columns.push_back({"account_id", SemanticKind::primary_key, {}, {}});

    TableSpec transfers_spec;
    transfers_spec.name = "transfers";
    transfers_spec.time_column = "moved_at";
    transfers_spec.columns.push_back({"transfer_id", SemanticKind::primary_key, {}, {}});
    transfers_spec.columns.push_back(
        {"account_id", SemanticKind::foreign_key, FkTarget{"accounts", "account_id"}, {}});
    transfers_spec.columns.push_back(
        {"counterparty_id", SemanticKind::foreign_key, FkTarget{"accounts", "account_id"}, {}});
    transfers_spec.columns.push_back({"value", SemanticKind::numerical, {}, {}});
    transfers_spec.columns.push_back({"moved_at", SemanticKind::timestamp, {}, {}});

    TableSpec labels_spec;
    labels_spec.name = "flag_labels";
    labels_spec.time_column = "label_time";
    labels_spec.columns.push_back({"label_id", SemanticKind::primary_key, {}, {}});
    labels_spec.columns.push_back(
        {"account_id", SemanticKind::foreign_key, FkTarget{"accounts", "account_id"}, {}});
    labels_spec.columns.push_back({"status", SemanticKind::categorical, {}, {}});
    labels_spec.columns.push_back({"label_time", SemanticKind::timestamp, {}, {}});

    FrameBuilder accounts{accounts_spec};
    FrameBuilder transfers{transfers_spec};
    FrameBuilder labels{labels_spec};

    std::vector<bool> positives(spec.entities);
    for (std::int64_t e = 0; e < spec.entities; ++e) {
        const std::int64_t row = accounts.add_row();
        accounts.set_i64(row, "account_id", e);
        positives[e] = rng() % 2 == 0;
    }

    const std::int64_t span = (spec.max_events + 2) * kDay;
    for (std::int64_t e = 0; e < spec.entities; ++e) {
        const std::int64_t n_events = uniform_int(rng, spec.min_events, spec.max_events);
        for (std::int64_t k = 0; k < n_events; ++k) {
            const std::int64_t r = transfers.add_row();
            transfers.set_i64(r, "transfer_id", r);
            transfers.set_i64(r, "account_id", e);
            // skewed counterparty draw: the first tenth of accounts receive
            // roughly half of all transfers
            std::int64_t counterparty;
            if (rng() % 2 == 0) {
                counterparty = uniform_int(rng, 0, std::max<std::int64_t>(1, spec.entities / 10) - 1);
            } else {
                counterparty = uniform_int(rng, 0, spec.entities - 1);
            }
            transfers.set_i64(r, "counterparty_id", counterparty);
            const double value =
                positives[e] ? uniform(rng, spec.threshold - 45.0, spec.threshold - 5.0)
                             : uniform(rng, spec.threshold + 5.0, spec.threshold + 45.0);
            transfers.set_f64(r, "value", value);
            transfers.set_i64(r, "moved_at", kBaseTime + uniform_int(rng, 0, span));
        }
    }

    std::vector<std::int64_t> label_rows, cutoffs;
    const std::int64_t cutoff = kBaseTime + span + 3600;  // after every transfer
    for (std::int64_t e = 0; e < spec.entities; ++e) {
        bool stored = positives[e];
        if (spec.label_noise > 0.0 && uniform(rng, 0.0, 1.0) < spec.label_noise) {
            stored = !stored;
        }
        const std::int64_t lr = labels.add_row();
        labels.set_i64(lr, "label_id", lr);
        labels.set_i64(lr, "account_id", e);
        labels.set_str(lr, "status", stored ? "flag" : "ok");
        labels.set_i64(lr, "label_time", cutoff);
        label_rows.push_back(lr);
        cutoffs.push_back(cutoff);
    }

    SynthOutput out;
    out.manifest.name = spec.name;
    out.manifest.tables = {accounts_spec, transfers_spec, labels_spec};
    out.frames.push_back(std::move(accounts.frame));
    out.frames.push_back(std::move(transfers.frame));
    out.frames.push_back(std::move(labels.frame));
    out.manifest.relations.push_back({"transfers", "account_id", "accounts", "account_id"});
    out.manifest.relations.push_back({"transfers", "counterparty_id", "accounts", "account_id"});
    out.manifest.relations.push_back({"flag_labels", "account_id", "accounts", "account_id"});
    validate_manifest(out.manifest);

    TaskSpec task;
    task.name = spec.name + "_status";
    task.rdb = spec.name;
    task.target_table = "flag_labels";
    task.target_column = "status";
    task.kind = TaskKind::classification;
    task.label_texts = {"ok", "flag"};
    task.metric = MetricKind::accuracy;
    build_splits(task, label_rows, cutoffs, rng);
    task.validate();
    out.task = std::move(task);
    return out;
}

SynthOutput generate_profile_table(const SynthSpec& spec) {
    std::mt19937_64 rng(mix_seed(spec.seed, fnv1a("profiles")));
    Vocab vocab;

    TableSpec profiles_spec;
    profiles_spec.name = "profiles";
    profiles_spec.columns.push_back({"profile_id", SemanticKind::primary_key, {}, {}});
    profiles_spec.columns.push_back({"segment", SemanticKind::categorical, {}, {}});
    profiles_spec.columns.push_back({"region", SemanticKind::categorical, {}, {}});
    profiles_spec.columns.push_back({"amount", SemanticKind::numerical, {}, {}});
    profiles_spec.columns.push_back({"orders", SemanticKind::numerical, {}, {}});
    profiles_spec.columns.push_back({"churn", SemanticKind::categorical, {}, {}});

    FrameBuilder profiles{profiles_spec};
    std::vector<std::int64_t> rows, cutoffs;
    for (std::int64_t i = 0; i < spec.entities; ++i) {
        const std::int64_t r = profiles.add_row();
        profiles.set_i64(r, "profile_id", i);
        profiles.set_str(r, "segment", vocab.segments[rng() % vocab.segments.size()]);
        profiles.set_str(r, "region", vocab.regions[rng() % vocab.regions.size()]);
        const bool positive = rng() % 2 == 0;
        const double amount = positive ? uniform(rng, spec.threshold - 45.0, spec.threshold - 5.0)
                                       : uniform(rng, spec.threshold + 5.0, spec.threshold + 45.0);
        profiles.set_f64(r, "amount", amount);
        profiles.set_f64(r, "orders", uniform(rng, 1.0, 20.0));
        bool stored = positive;
        if (spec.label_noise > 0.0 && uniform(rng, 0.0, 1.0) < spec.label_noise) {
            stored = !stored;
        }
        profiles.set_str(r, "churn", stored ? "yes" : "no");
        rows.push_back(r);
        cutoffs.push_back(0);
    }

    SynthOutput out;
    out.manifest.name = spec.name;
    out.manifest.tables.push_back(profiles_spec);
    out.frames.push_back(std::move(profiles.frame));
    validate_manifest(out.manifest);

    TaskSpec task;
    task.name = spec.name + "_churn";
    task.rdb = spec.name;
    task.target_table = "profiles";
    task.target_column = "churn";
    task.kind = TaskKind::classification;
    task.label_texts = {"no", "yes"};
    task.metric = MetricKind::accuracy;
    build_splits(task, rows, cutoffs, rng);
    task.validate();
    out.task = std::move(task);
    return out;
}

SynthOutput generate_codebook(const SynthSpec& spec) {
    std::mt19937_64 rng(mix_seed(spec.seed, fnv1a("codebook")));
    const std::vector<std::string> codes = {"alpha", "bravo", "charlie", "delta", "echo",
                                            "foxtrot", "golf", "hotel", "india", "juliet"};
    const std::vector<std::string> meanings = {"stone", "river", "cloud", "ember", "frost",
                                               "grove", "ridge", "plume", "shard", "tide"};

    TableSpec spec_table;
    spec_table.name = "codebook";
    spec_table.columns.push_back({"entry_id", SemanticKind::primary_key, {}, {}});
    spec_table.columns.push_back({"code", SemanticKind::categorical, {}, {}});
    spec_table.columns.push_back({"meaning", SemanticKind::categorical, {}, {}});

    FrameBuilder rows{spec_table};
    for (std::int64_t i = 0; i < spec.entities; ++i) {
        const std::int64_t r = rows.add_row();
        const std::size_t k = rng() % codes.size();
        rows.set_i64(r, "entry_id", i);
        rows.set_str(r, "code", codes[k]);
        rows.set_str(r, "meaning", meanings[k]);  // deterministic mapping code -> meaning
    }

    SynthOutput out;
    out.manifest.name = spec.name;
    out.manifest.tables.push_back(spec_table);
    out.frames.push_back(std::move(rows.frame));
    validate_manifest(out.manifest);
    return out;
}

EventFamilyNames commerce_names() {
    Vocab vocab;
    EventFamilyNames nm;
    nm.entity_table = "customers";
    nm.entity_pk = "customer_id";
    nm.event_table = "purchases";
    nm.event_pk = "purchase_id";
    nm.event_value = "amount";
    nm.event_time = "purchased_at";
    nm.dim_table = "products";
    nm.dim_pk = "product_id";
    nm.dim_cat = "category";
    nm.dim_num = "price";
    nm.event_dim_fk = "product_id";
    nm.label_table = "churn_labels";
    nm.label_pk = "label_id";
    nm.label_fk = "customer_id";
    nm.label_column = "churn";
    nm.label_time = "label_time";
    nm.negative = "no";
    nm.positive = "yes";
    nm.entity_cats = {"segment", "region"};
    nm.entity_cat_values = {vocab.segments, vocab.regions};
    nm.dim_cat_values = vocab.categories;
    return nm;
}

EventFamilyNames other_names() {
    Vocab vocab;
    EventFamilyNames nm;
    nm.entity_table = "stations";
    nm.entity_pk = "station_id";
    nm.event_table = "readings";
    nm.event_pk = "reading_id";
    nm.event_value = "magnitude";
    nm.event_time = "recorded_on";
    nm.dim_table = "sensors";
    nm.dim_pk = "sensor_id";
    nm.dim_cat = "model";
    nm.dim_num = "sensitivity";
    nm.event_dim_fk = "sensor_id";
    nm.label_table = "delay_labels";
    nm.label_pk = "label_id";
    nm.label_fk = "station_id";
    nm.label_column = "delayed";
    nm.label_time = "label_time";
    nm.negative = "low";
    nm.positive = "high";
    nm.entity_cats = {"climate"};
    nm.entity_cat_values = {vocab.climates};
    nm.dim_cat_values = vocab.models;
    return nm;
}

}  // namespace

SynthOutput generate(const SynthSpec& spec) {
    spec.validate();
    switch (spec.scenario) {
        case SynthSpec::Scenario::commerce: return generate_event_family(spec, commerce_names());
        case SynthSpec::Scenario::other: return generate_event_family(spec, other_names());
        case SynthSpec::Scenario::signal_column: return generate_signal_column(spec);
        case SynthSpec::Scenario::unbalanced_relations: return generate_unbalanced(spec);
        case SynthSpec::Scenario::profile_table: return generate_profile_table(spec);
        case SynthSpec::Scenario::codebook_table: return generate_codebook(spec);
    }
    throw ConsistencyError("unreachable");
}

namespace {

int event_family_oracle(const SynthSpec& spec, const SynthOutput& out, std::int64_t task_row,
                        const EventFamilyNames& nm) {
    const int label_tab = out.manifest.table_index(nm.label_table);
    const int event_tab = out.manifest.table_index(nm.event_table);
    const TableFrame& labels = out.frames[label_tab];
    const TableFrame& events = out.frames[event_tab];

    const int fk_col = labels.spec.column_index(nm.label_fk);
    const int time_col = labels.spec.column_index(nm.label_time);
    const std::int64_t entity = labels.columns[fk_col].i64[task_row];
    const std::int64_t cutoff = labels.columns[time_col].i64[task_row];

    const int ev_fk = events.spec.column_index(nm.entity_pk);
    const int ev_val = events.spec.column_index(nm.event_value);
    const int ev_time = events.spec.column_index(nm.event_time);

    double total = 0.0;
    std::int64_t count = 0;
    for (std::int64_t r = 0; r < events.row_count; ++r) {
        if (events.is_null(r, ev_fk) || events.columns[ev_fk].i64[r] != entity) continue;
        if (events.columns[ev_time].i64[r] >= cutoff) continue;  // same causality filter
        total += events.columns[ev_val].f64[r];
        ++count;
    }
    if (count == 0) return 0;
    return (total / static_cast<double>(count)) < spec.threshold ? 1 : 0;
}

}  // namespace

int oracle_label(const SynthSpec& spec, const SynthOutput& out, std::int64_t task_row) {
    switch (spec.scenario) {
        case SynthSpec::Scenario::commerce:
            return event_family_oracle(spec, out, task_row, commerce_names());
        case SynthSpec::Scenario::other:
            return event_family_oracle(spec, out, task_row, other_names());
        case SynthSpec::Scenario::unbalanced_relations: {
            // same rule shape: mean of the account's initiated transfer values
            EventFamilyNames nm;
            nm.entity_table = "accounts";
            nm.entity_pk = "account_id";
            nm.event_table = "transfers";
            nm.event_value = "value";
            nm.event_time = "moved_at";
            nm.label_table = "flag_labels";
            nm.label_fk = "account_id";
            nm.label_time = "label_time";
            return event_family_oracle(spec, out, task_row, nm);
        }
        case SynthSpec::Scenario::signal_column: {
            const TableFrame& records = out.frames[0];
            const int col = records.spec.column_index("signal");
            return records.columns[col].f64[task_row] > 0.0 ? 1 : 0;
        }
        case SynthSpec::Scenario::profile_table: {
            const TableFrame& profiles = out.frames[0];
            const int col = profiles.spec.column_index("amount");
            return profiles.columns[col].f64[task_row] < spec.threshold ? 1 : 0;
        }
        case SynthSpec::Scenario::codebook_table:
            throw ConsistencyError("codebook scenario has no supervised rule");
    }
    throw ConsistencyError("unreachable");
}

double oracle_accuracy(const SynthSpec& spec, const SynthOutput& out) {
    if (!out.task) throw ConsistencyError("scenario has no task");
    const TaskSpec& task = *out.task;
    const int tab = out.manifest.table_index(task.target_table);
    const TableFrame& frame = out.frames[tab];
    const int col = frame.spec.column_index(task.target_column);

    std::int64_t hits = 0, total = 0;
    auto scan = [&](const std::vector<SplitRow>& split) {
        for (const SplitRow& r : split) {
            const int oracle = oracle_label(spec, out, r.row);
            const int stored = frame.columns[col].str[r.row] == task.label_texts[1] ? 1 : 0;
            hits += (oracle == stored) ? 1 : 0;
            ++total;
        }
    };
    scan(task.train);
    scan(task.val);
    scan(task.test);
    return static_cast<double>(hits) / static_cast<double>(total);
}

void write_synth(const SynthOutput& out, const std::string& dir) {
    std::filesystem::create_directories(dir);
    save_manifest(out.manifest, dir + "/manifest.json");
    for (const TableFrame& frame : out.frames) {
        write_table_csv(frame, dir + "/" + frame.spec.name + ".csv");
    }
    if (out.task) {
        std::filesystem::create_directories(dir + "/tasks");
        save_task(*out.task, dir + "/tasks/" + out.task->name + ".json");
    }
}

}  // namespace griffin
