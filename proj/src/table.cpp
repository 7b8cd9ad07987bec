#include "griffin/table.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <unordered_map>
#include <unordered_set>

#include "griffin/common.hpp"
#include "griffin/csv.hpp"

namespace griffin {

std::int64_t TableFrame::row_time(std::int64_t row) const {
    if (!spec.time_column) return kNoTimestamp;
    const int col = spec.column_index(*spec.time_column);
    if (is_null(row, col)) return kNoTimestamp;
    return columns[col].i64[row];
}

std::int64_t LoadReport::total_rows() const {
    std::int64_t n = 0;
    for (const auto& [_, rows] : rows_per_table) n += rows;
    return n;
}

std::int64_t LoadReport::total_dangling() const {
    std::int64_t n = 0;
    for (const auto& d : dangling_fks) n += d.count;
    return n;
}

namespace {

std::string cell_location(const TableSpec& spec, const std::string& column, std::int64_t row) {
    return spec.name + "." + column + " row " + std::to_string(row);
}

double parse_double(const std::string& cell, const TableSpec& spec, const std::string& column,
                    std::int64_t row) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || cell.empty() || errno == ERANGE) {
        throw CellTypeError("cell does not parse as numerical at " + cell_location(spec, column, row) +
                            ": \"" + cell + "\"");
    }
    return v;
}

std::int64_t parse_int64(const std::string& cell, const TableSpec& spec, const std::string& column,
                         std::int64_t row, const char* kind) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(cell.c_str(), &end, 10);
    if (end != cell.c_str() + cell.size() || cell.empty() || errno == ERANGE) {
        throw CellTypeError("cell does not parse as " + std::string(kind) + " at " +
                            cell_location(spec, column, row) + ": \"" + cell + "\"");
    }
    return static_cast<std::int64_t>(v);
}

}  // namespace

TableFrame load_table_csv(const TableSpec& spec, const std::string& path) {
    const std::vector<CsvRow> rows = read_csv(path);
    if (!rows.empty()) {
        const CsvRow& header = rows.front();
        if (header.size() != spec.columns.size()) {
            throw ParseError("header of " + path + " has " + std::to_string(header.size()) +
                             " columns, expected " + std::to_string(spec.columns.size()));
        }
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] != spec.columns[c].name) {
                throw ParseError("header mismatch in " + path + ": column " + std::to_string(c) +
                                 " is \"" + header[c] + "\", expected \"" + spec.columns[c].name + "\"");
            }
        }
    }

    TableFrame frame;
    frame.spec = spec;
    frame.row_count = rows.empty() ? 0 : static_cast<std::int64_t>(rows.size()) - 1;
    frame.columns.resize(spec.columns.size());
    frame.null_mask.assign(spec.columns.size(), std::vector<std::uint8_t>(frame.row_count, 0));

    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
        ColumnData& col = frame.columns[c];
        switch (spec.columns[c].semantic_kind) {
            case SemanticKind::numerical: col.f64.resize(frame.row_count, 0.0); break;
            case SemanticKind::categorical:
            case SemanticKind::text: col.str.resize(frame.row_count); break;
            default: col.i64.resize(frame.row_count, 0); break;
        }
    }

    for (std::int64_t r = 0; r < frame.row_count; ++r) {
        const CsvRow& row = rows[r + 1];
        if (row.size() != spec.columns.size()) {
            throw ParseError("row " + std::to_string(r) + " of " + path + " has " +
                             std::to_string(row.size()) + " cells, expected " +
                             std::to_string(spec.columns.size()));
        }
        for (std::size_t c = 0; c < spec.columns.size(); ++c) {
            const std::string& cell = row[c];
            const ColumnSpec& cs = spec.columns[c];
            if (cell.empty()) {
                frame.null_mask[c][r] = 1;
                continue;
            }
            switch (cs.semantic_kind) {
                case SemanticKind::numerical:
                    frame.columns[c].f64[r] = parse_double(cell, spec, cs.name, r);
                    break;
                case SemanticKind::categorical:
                case SemanticKind::text:
                    frame.columns[c].str[r] = cell;
                    break;
                case SemanticKind::timestamp:
                    frame.columns[c].i64[r] = parse_int64(cell, spec, cs.name, r, "timestamp");
                    break;
                case SemanticKind::primary_key:
                case SemanticKind::foreign_key:
                    frame.columns[c].i64[r] = parse_int64(cell, spec, cs.name, r, "key");
                    break;
            }
        }
    }

    // PK uniqueness among non-null entries.
    const int pk = spec.primary_key_index();
    if (pk >= 0) {
        std::unordered_set<std::int64_t> seen;
        seen.reserve(frame.row_count);
        for (std::int64_t r = 0; r < frame.row_count; ++r) {
            if (frame.is_null(r, pk)) continue;
            if (!seen.insert(frame.columns[pk].i64[r]).second) {
                throw CellTypeError("duplicate primary key value at " +
                                    cell_location(spec, spec.columns[pk].name, r));
            }
        }
    }
    return frame;
}

LoadResult load_tables(const RdbManifest& manifest, const std::string& data_dir) {
    LoadResult result;
    result.frames.resize(manifest.tables.size());

    std::vector<std::future<TableFrame>> jobs;
    jobs.reserve(manifest.tables.size());
    for (const TableSpec& spec : manifest.tables) {
        const std::string path = data_dir + "/" + spec.name + ".csv";
        jobs.push_back(std::async(std::launch::async,
                                  [&spec, path] { return load_table_csv(spec, path); }));
    }
    for (std::size_t t = 0; t < jobs.size(); ++t) {
        result.frames[t] = jobs[t].get();
        result.report.rows_per_table.emplace_back(manifest.tables[t].name, result.frames[t].row_count);
    }

    // Referential integrity: null out FK cells that do not resolve to a PK row.
    for (const Relation& rel : manifest.relations) {
        const int fk_tab = manifest.table_index(rel.fk_table);
        const int pk_tab = manifest.table_index(rel.pk_table);
        const int fk_col = manifest.tables[fk_tab].column_index(rel.fk_column);
        const int pk_col = manifest.tables[pk_tab].column_index(rel.pk_column);

        const TableFrame& target = result.frames[pk_tab];
        std::unordered_set<std::int64_t> pk_values;
        pk_values.reserve(target.row_count);
        for (std::int64_t r = 0; r < target.row_count; ++r) {
            if (!target.is_null(r, pk_col)) pk_values.insert(target.columns[pk_col].i64[r]);
        }

        TableFrame& source = result.frames[fk_tab];
        std::int64_t dangling = 0;
        for (std::int64_t r = 0; r < source.row_count; ++r) {
            if (source.is_null(r, fk_col)) continue;
            if (!pk_values.count(source.columns[fk_col].i64[r])) {
                source.null_mask[fk_col][r] = 1;
                ++dangling;
            }
        }
        if (dangling > 0) {
            result.report.dangling_fks.push_back({rel.fk_table, rel.fk_column, dangling});
        }
    }
    return result;
}

void write_table_csv(const TableFrame& frame, const std::string& path) {
    std::vector<CsvRow> rows;
    rows.reserve(frame.row_count + 1);
    CsvRow header;
    for (const ColumnSpec& col : frame.spec.columns) header.push_back(col.name);
    rows.push_back(std::move(header));

    char buf[64];
    for (std::int64_t r = 0; r < frame.row_count; ++r) {
        CsvRow row;
        row.reserve(frame.spec.columns.size());
        for (std::size_t c = 0; c < frame.spec.columns.size(); ++c) {
            if (frame.is_null(r, static_cast<int>(c))) {
                row.emplace_back();
                continue;
            }
            switch (frame.spec.columns[c].semantic_kind) {
                case SemanticKind::numerical:
                    // %.17g round-trips doubles exactly
                    std::snprintf(buf, sizeof(buf), "%.17g", frame.columns[c].f64[r]);
                    row.emplace_back(buf);
                    break;
                case SemanticKind::categorical:
                case SemanticKind::text:
                    row.push_back(frame.columns[c].str[r]);
                    break;
                default:
                    row.push_back(std::to_string(frame.columns[c].i64[r]));
                    break;
            }
        }
        rows.push_back(std::move(row));
    }
    write_csv(path, rows);
}

}  // namespace griffin
