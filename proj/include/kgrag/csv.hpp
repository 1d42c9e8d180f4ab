#pragma once
// Minimal RFC-4180 CSV reader: comma-delimited, double-quoted fields with
// doubled-quote escapes, quoted fields may span lines. Rows remember the
// line they started on so errors can name it.

#include "kgrag/errors.hpp"

#include <fstream>
#include <istream>
#include <string>
#include <vector>

namespace kgrag {

struct CsvRow {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based line the row starts on
};

inline std::vector<CsvRow> read_csv(std::istream& in) {
    std::vector<CsvRow> rows;
    std::string field;
    CsvRow row;
    std::size_t line = 1;
    row.line = 1;
    bool quoted = false;
    bool row_started = false;
    auto end_field = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row = CsvRow{};
        row.line = line;
        row_started = false;
    };
    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                row_started = true;
                break;
            case ',':
                end_field();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                ++line;
                if (row_started || !field.empty() || !row.fields.empty()) end_row();
                row.line = line;
                break;
            default:
                field += c;
                row_started = true;
                break;
        }
    }
    if (quoted) throw FormatError("unterminated quoted CSV field", row.line);
    if (row_started || !field.empty() || !row.fields.empty()) end_row();
    return rows;
}

inline std::vector<CsvRow> read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open CSV file: " + path);
    return read_csv(in);
}

}  // namespace kgrag
