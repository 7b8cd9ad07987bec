// Relational database schema: column/table specs, PK-FK relations, and the
// JSON manifest loader with structural validation.
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace griffin {

enum class SemanticKind {
    numerical,
    categorical,
    text,
    timestamp,
    primary_key,
    foreign_key,
};

const char* to_string(SemanticKind kind);
SemanticKind semantic_kind_from_string(const std::string& s);

// Columns the encoders can turn into cell vectors; keys are structure, not features.
inline bool is_key_kind(SemanticKind kind) {
    return kind == SemanticKind::primary_key || kind == SemanticKind::foreign_key;
}

struct FkTarget {
    std::string table;
    std::string column;
};

struct ColumnSpec {
    std::string name;
    SemanticKind semantic_kind = SemanticKind::text;
    std::optional<FkTarget> fk_target;
    std::optional<std::string> unit_hint;
};

struct TableSpec {
    std::string name;
    std::vector<ColumnSpec> columns;
    std::optional<std::string> time_column;

    int column_index(const std::string& name) const;  // -1 if absent
    int primary_key_index() const;                    // -1 if no PK column
};

struct Relation {
    std::string fk_table;
    std::string fk_column;
    std::string pk_table;
    std::string pk_column;
};

struct RdbManifest {
    std::string name;
    std::vector<TableSpec> tables;
    std::vector<Relation> relations;

    int table_index(const std::string& name) const;  // -1 if absent
};

// Checks every structural invariant: unique column names, at most one PK per
// table, fk_target present iff foreign_key, every FK column covered by exactly
// one relation, relation endpoints resolve, time_column names a timestamp.
// Throws SchemaError with the offending table/column in the message.
void validate_manifest(const RdbManifest& manifest);

// Parses and validates a JSON manifest file. Throws ParseError / SchemaError.
RdbManifest load_manifest(const std::string& path);

// Serializes back to the on-disk JSON layout (used by the synthetic generator).
void save_manifest(const RdbManifest& manifest, const std::string& path);

}  // namespace griffin
