// Minimal CSV reader/writer: UTF-8, quoted fields, empty string = null convention
// handled by the callers.
#pragma once

#include <string>
#include <vector>

namespace griffin {

using CsvRow = std::vector<std::string>;

// Parses a whole CSV file. Handles quoted fields, embedded commas/newlines and
// doubled quotes. Throws IoError if the file cannot be opened.
std::vector<CsvRow> read_csv(const std::string& path);

// Writes rows, quoting fields that contain separators, quotes or newlines.
void write_csv(const std::string& path, const std::vector<CsvRow>& rows);

}  // namespace griffin
