#include "griffin/tasks.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "griffin/common.hpp"

namespace griffin {

void TaskSpec::validate() const {
    if (kind == TaskKind::classification && label_texts.size() < 2) {
        throw SchemaError("classification task " + name + " needs >= 2 label texts");
    }
    std::set<std::int64_t> seen;
    auto check_split = [&](const std::vector<SplitRow>& split, const char* which) {
        for (const SplitRow& r : split) {
            if (!seen.insert(r.row).second) {
                throw SchemaError("task " + name + ": row " + std::to_string(r.row) +
                                  " appears in more than one split (" + which + ")");
            }
        }
    };
    check_split(train, "train");
    check_split(val, "val");
    check_split(test, "test");
}

namespace {

nlohmann::json split_to_json(const std::vector<SplitRow>& split) {
    nlohmann::json out = nlohmann::json::array();
    for (const SplitRow& r : split) out.push_back({{"row", r.row}, {"cutoff", r.cutoff}});
    return out;
}

std::vector<SplitRow> split_from_json(const nlohmann::json& j) {
    std::vector<SplitRow> out;
    for (const auto& r : j) {
        out.push_back(SplitRow{r.at("row").get<std::int64_t>(), r.at("cutoff").get<std::int64_t>()});
    }
    return out;
}

}  // namespace

TaskSpec load_task(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open task file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed task file " + path + ": " + e.what());
    }
    TaskSpec task;
    try {
        task.name = doc.at("name").get<std::string>();
        task.rdb = doc.at("rdb").get<std::string>();
        task.target_table = doc.at("target").at("table").get<std::string>();
        task.target_column = doc.at("target").at("column").get<std::string>();
        const std::string kind = doc.at("kind").get<std::string>();
        if (kind == "classification") {
            task.kind = TaskKind::classification;
        } else if (kind == "regression") {
            task.kind = TaskKind::regression;
        } else {
            throw ParseError("unknown task kind \"" + kind + "\" in " + path);
        }
        if (doc.contains("labels")) {
            task.label_texts = doc["labels"].get<std::vector<std::string>>();
        }
        task.metric = metric_from_string(doc.at("metric").get<std::string>());
        task.train = split_from_json(doc.at("splits").at("train"));
        task.val = split_from_json(doc.at("splits").at("val"));
        task.test = split_from_json(doc.at("splits").at("test"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("task file " + path + " missing required field: " + e.what());
    }
    task.validate();
    return task;
}

void save_task(const TaskSpec& task, const std::string& path) {
    nlohmann::json doc;
    doc["name"] = task.name;
    doc["rdb"] = task.rdb;
    doc["target"] = {{"table", task.target_table}, {"column", task.target_column}};
    doc["kind"] = task.kind == TaskKind::classification ? "classification" : "regression";
    if (!task.label_texts.empty()) doc["labels"] = task.label_texts;
    doc["metric"] = to_string(task.metric);
    doc["splits"] = {{"train", split_to_json(task.train)},
                     {"val", split_to_json(task.val)},
                     {"test", split_to_json(task.test)}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write task file: " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace griffin
