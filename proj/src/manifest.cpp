#include "griffin/manifest.hpp"

#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "griffin/common.hpp"

namespace griffin {

const char* to_string(SemanticKind kind) {
    switch (kind) {
        case SemanticKind::numerical: return "numerical";
        case SemanticKind::categorical: return "categorical";
        case SemanticKind::text: return "text";
        case SemanticKind::timestamp: return "timestamp";
        case SemanticKind::primary_key: return "primary_key";
        case SemanticKind::foreign_key: return "foreign_key";
    }
    return "?";
}

SemanticKind semantic_kind_from_string(const std::string& s) {
    if (s == "numerical") return SemanticKind::numerical;
    if (s == "categorical") return SemanticKind::categorical;
    if (s == "text") return SemanticKind::text;
    if (s == "timestamp") return SemanticKind::timestamp;
    if (s == "primary_key") return SemanticKind::primary_key;
    if (s == "foreign_key") return SemanticKind::foreign_key;
    throw ParseError("unknown column kind: \"" + s + "\"");
}

int TableSpec::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

int TableSpec::primary_key_index() const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].semantic_kind == SemanticKind::primary_key) return static_cast<int>(i);
    }
    return -1;
}

int RdbManifest::table_index(const std::string& name) const {
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (tables[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

void validate_manifest(const RdbManifest& manifest) {
    std::unordered_set<std::string> table_names;
    for (const TableSpec& table : manifest.tables) {
        if (!table_names.insert(table.name).second) {
            throw SchemaError("duplicate table name: " + table.name);
        }
        std::unordered_set<std::string> column_names;
        int pk_count = 0;
        for (const ColumnSpec& col : table.columns) {
            const std::string where = table.name + "." + col.name;
            if (!column_names.insert(col.name).second) {
                throw SchemaError("duplicate column: " + where);
            }
            if (col.semantic_kind == SemanticKind::primary_key && ++pk_count > 1) {
                throw SchemaError("more than one primary key column in table " + table.name);
            }
            const bool is_fk = col.semantic_kind == SemanticKind::foreign_key;
            if (is_fk != col.fk_target.has_value()) {
                throw SchemaError("fk_target must be present exactly for foreign_key columns: " + where);
            }
        }
        if (table.time_column) {
            const int idx = table.column_index(*table.time_column);
            if (idx < 0 || table.columns[idx].semantic_kind != SemanticKind::timestamp) {
                throw SchemaError("time_column \"" + *table.time_column + "\" of table " + table.name +
                                  " does not name a timestamp column");
            }
        }
    }

    // Each foreign_key column must be covered by exactly one relation whose
    // endpoints resolve and whose pk side names the target's primary key.
    std::unordered_map<std::string, int> fk_cover;  // "table.column" -> count
    for (const Relation& rel : manifest.relations) {
        const std::string rel_desc = rel.fk_table + "." + rel.fk_column + " -> " + rel.pk_table + "." + rel.pk_column;
        const int fk_tab = manifest.table_index(rel.fk_table);
        if (fk_tab < 0) throw SchemaError("relation references missing table: " + rel_desc);
        const int fk_col = manifest.tables[fk_tab].column_index(rel.fk_column);
        if (fk_col < 0) throw SchemaError("relation references missing column: " + rel_desc);
        if (manifest.tables[fk_tab].columns[fk_col].semantic_kind != SemanticKind::foreign_key) {
            throw SchemaError("relation fk side is not a foreign_key column: " + rel_desc);
        }
        const int pk_tab = manifest.table_index(rel.pk_table);
        if (pk_tab < 0) throw SchemaError("relation targets missing table: " + rel_desc);
        const int pk_col = manifest.tables[pk_tab].column_index(rel.pk_column);
        if (pk_col < 0) throw SchemaError("relation targets missing column: " + rel_desc);
        if (manifest.tables[pk_tab].columns[pk_col].semantic_kind != SemanticKind::primary_key) {
            throw SchemaError("relation pk side is not a primary_key column: " + rel_desc);
        }
        const auto& target = *manifest.tables[fk_tab].columns[fk_col].fk_target;
        if (target.table != rel.pk_table || target.column != rel.pk_column) {
            throw SchemaError("relation disagrees with fk_target of " + rel.fk_table + "." + rel.fk_column);
        }
        fk_cover[rel.fk_table + "." + rel.fk_column] += 1;
    }
    for (const TableSpec& table : manifest.tables) {
        for (const ColumnSpec& col : table.columns) {
            if (col.semantic_kind != SemanticKind::foreign_key) continue;
            const std::string where = table.name + "." + col.name;
            if (col.fk_target && manifest.table_index(col.fk_target->table) < 0) {
                throw SchemaError("fk_target of " + where + " names nonexistent table " + col.fk_target->table);
            }
            const auto it = fk_cover.find(where);
            if (it == fk_cover.end()) {
                throw SchemaError("foreign_key column " + where + " has no relation entry");
            }
            if (it->second != 1) {
                throw SchemaError("foreign_key column " + where + " appears in more than one relation");
            }
        }
    }
}

RdbManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest: " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed manifest " + path + ": " + e.what());
    }

    RdbManifest manifest;
    try {
        manifest.name = doc.at("name").get<std::string>();
        for (const auto& jt : doc.at("tables")) {
            TableSpec table;
            table.name = jt.at("name").get<std::string>();
            if (jt.contains("time_column") && !jt["time_column"].is_null()) {
                table.time_column = jt["time_column"].get<std::string>();
            }
            for (const auto& jc : jt.at("columns")) {
                ColumnSpec col;
                col.name = jc.at("name").get<std::string>();
                col.semantic_kind = semantic_kind_from_string(jc.at("kind").get<std::string>());
                if (jc.contains("fk_target") && !jc["fk_target"].is_null()) {
                    col.fk_target = FkTarget{jc["fk_target"].at("table").get<std::string>(),
                                             jc["fk_target"].at("column").get<std::string>()};
                }
                if (jc.contains("unit_hint") && !jc["unit_hint"].is_null()) {
                    col.unit_hint = jc["unit_hint"].get<std::string>();
                }
                table.columns.push_back(std::move(col));
            }
            manifest.tables.push_back(std::move(table));
        }
        if (doc.contains("relations")) {
            for (const auto& jr : doc.at("relations")) {
                manifest.relations.push_back(Relation{
                    jr.at("fk_table").get<std::string>(),
                    jr.at("fk_column").get<std::string>(),
                    jr.at("pk_table").get<std::string>(),
                    jr.at("pk_column").get<std::string>(),
                });
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest " + path + " missing required field: " + e.what());
    }

    validate_manifest(manifest);
    return manifest;
}

void save_manifest(const RdbManifest& manifest, const std::string& path) {
    nlohmann::json doc;
    doc["name"] = manifest.name;
    doc["tables"] = nlohmann::json::array();
    for (const TableSpec& table : manifest.tables) {
        nlohmann::json jt;
        jt["name"] = table.name;
        if (table.time_column) jt["time_column"] = *table.time_column;
        jt["columns"] = nlohmann::json::array();
        for (const ColumnSpec& col : table.columns) {
            nlohmann::json jc;
            jc["name"] = col.name;
            jc["kind"] = to_string(col.semantic_kind);
            if (col.fk_target) {
                jc["fk_target"] = {{"table", col.fk_target->table}, {"column", col.fk_target->column}};
            }
            if (col.unit_hint) jc["unit_hint"] = *col.unit_hint;
            jt["columns"].push_back(std::move(jc));
        }
        doc["tables"].push_back(std::move(jt));
    }
    doc["relations"] = nlohmann::json::array();
    for (const Relation& rel : manifest.relations) {
        doc["relations"].push_back({{"fk_table", rel.fk_table},
                                    {"fk_column", rel.fk_column},
                                    {"pk_table", rel.pk_table},
                                    {"pk_column", rel.pk_column}});
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write manifest: " + path);
    }
    out << doc.dump(2) << "\n";
}

}  // namespace griffin
