// Deterministic synthetic RDB generators with planted, oracle-recoverable
// signals. Labels live in timestamped label tables so a label can never leak
// back into a sampled subgraph as a feature of a non-root node: label rows
// share the prediction timestamp and the sampler requires t < cutoff.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "griffin/manifest.hpp"
#include "griffin/table.hpp"
#include "griffin/tasks.hpp"

namespace griffin {

struct SynthSpec {
    enum class Scenario {
        commerce,               // churn iff mean eligible purchase amount < threshold
        other,                  // same rule shape, vocabulary-disjoint schema
        signal_column,          // single table: 1 informative column among distractors
        unbalanced_relations,   // initiated vs received transfer edges; only relation identity separates them
        profile_table,          // single-table commerce-flavored rows (SFT corpus)
        codebook_table,         // column B is a deterministic function of column A
    };

    Scenario scenario = Scenario::commerce;
    std::string name = "synth";
    std::int64_t entities = 300;  // customers / stations / records / accounts / rows
    int min_events = 5;
    int max_events = 9;
    std::int64_t dimension_rows = 40;  // products / sensors
    double label_noise = 0.0;          // probability of flipping the stored label
    int distractors = 8;               // signal_column scenario
    double threshold = 50.0;
    std::uint64_t seed = 0;

    void validate() const;  // entities >= 10 etc.
};

struct SynthOutput {
    RdbManifest manifest;
    std::vector<TableFrame> frames;
    std::optional<TaskSpec> task;
};

// Pure function of the spec; emitted data passes ingest/graph validation.
SynthOutput generate(const SynthSpec& spec);

// Recomputes the planted rule for one task row directly from the raw tables
// (no model, no stored label): the learnability ceiling. Returns the label
// index into task.label_texts.
int oracle_label(const SynthSpec& spec, const SynthOutput& out, std::int64_t task_row);

// Fraction of task rows whose stored label matches the oracle (1 - noise).
double oracle_accuracy(const SynthSpec& spec, const SynthOutput& out);

// manifest.json + <table>.csv files + tasks/<task>.json under dir.
void write_synth(const SynthOutput& out, const std::string& dir);

}  // namespace griffin
