#include "griffin/csv.hpp"

#include <fstream>
#include <sstream>

#include "griffin/common.hpp"

namespace griffin {

std::vector<CsvRow> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open CSV file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    bool in_quotes = false;
    std::size_t i = 0;
    const std::size_t n = text.size();

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    while (i < n) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            // swallow; \r\n handled by the \n branch
        } else if (c == '\n') {
            end_row();
        } else {
            field.push_back(c);
        }
        ++i;
    }
    if (in_quotes) {
        throw ParseError("unterminated quoted field in " + path);
    }
    if (!field.empty() || !row.empty()) {
        end_row();
    }
    return rows;
}

namespace {

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\r\n") != std::string::npos;
}

void write_field(std::ostream& out, const std::string& s) {
    if (!needs_quoting(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace

void write_csv(const std::string& path, const std::vector<CsvRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open CSV file for writing: " + path);
    }
    for (const CsvRow& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            write_field(out, row[i]);
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

}  // namespace griffin
