// Columnar table storage and the CSV loader with PK/FK validation.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "griffin/manifest.hpp"

namespace griffin {

// One column's payload; only the array matching the declared kind is filled.
struct ColumnData {
    std::vector<double> f64;        // numerical
    std::vector<std::string> str;   // categorical / text
    std::vector<std::int64_t> i64;  // timestamp (epoch seconds) / keys (row ids)
};

struct TableFrame {
    TableSpec spec;
    std::int64_t row_count = 0;
    std::vector<ColumnData> columns;                  // aligned with spec.columns
    std::vector<std::vector<std::uint8_t>> null_mask;  // [column][row], 1 = null

    bool is_null(std::int64_t row, int col) const { return null_mask[col][row] != 0; }
    // Row timestamp in epoch seconds; kNoTimestamp when untimed or null.
    std::int64_t row_time(std::int64_t row) const;
};

struct DanglingFkCount {
    std::string fk_table;
    std::string fk_column;
    std::int64_t count = 0;
};

struct LoadReport {
    std::vector<std::pair<std::string, std::int64_t>> rows_per_table;
    std::vector<DanglingFkCount> dangling_fks;

    std::int64_t total_rows() const;
    std::int64_t total_dangling() const;
};

struct LoadResult {
    std::vector<TableFrame> frames;
    LoadReport report;
};

// Loads "<table>.csv" per table from data_dir, parses cells against the declared
// kinds, checks PK uniqueness and nulls unresolvable FK cells (counted in the
// report). Tables load in parallel; frames are immutable afterwards.
LoadResult load_tables(const RdbManifest& manifest, const std::string& data_dir);

// Parses a single table file; no cross-table validation.
TableFrame load_table_csv(const TableSpec& spec, const std::string& path);

// Writes a frame back to the CSV data format (empty string = null). Round-trips
// cell-identically through load_table_csv.
void write_table_csv(const TableFrame& frame, const std::string& path);

}  // namespace griffin
