// Task definitions: target cell, kind, label vocabulary, splits with per-row
// cutoff timestamps, and the evaluation metric.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "griffin/metrics.hpp"

namespace griffin {

struct SplitRow {
    std::int64_t row = 0;     // row index in the target table
    std::int64_t cutoff = 0;  // temporal cutoff for sampling
};

enum class TaskKind { classification, regression };

struct TaskSpec {
    std::string name;
    std::string rdb;  // dataset name (leakage audit key)
    std::string target_table;
    std::string target_column;
    TaskKind kind = TaskKind::classification;
    std::vector<std::string> label_texts;  // classification only
    MetricKind metric = MetricKind::accuracy;
    std::vector<SplitRow> train, val, test;

    // splits disjoint, >= 2 labels for classification; throws SchemaError.
    void validate() const;
};

TaskSpec load_task(const std::string& path);
void save_task(const TaskSpec& task, const std::string& path);

}  // namespace griffin
