#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "qdfg/util.hpp"

namespace qdfg::csv {

/// Quote a field per RFC 4180 when it contains a comma, quote, or newline.
inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os.put(',');
        os << escape(fields[i]);
    }
    os.put('\n');
}

/// Split one physical line into fields. Assumes fields do not contain
/// embedded newlines (true for every file this project writes).
inline std::vector<std::string> parse_row(std::string_view line, std::size_t line_no = 0) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            if (!cur.empty()) throw ParseError(line_no, "unexpected quote inside unquoted field");
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw ParseError(line_no, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

/// Read all rows of a CSV stream; skips blank lines.
inline std::vector<std::vector<std::string>> parse(std::istream& is) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        rows.push_back(parse_row(line, line_no));
    }
    return rows;
}

} // namespace qdfg::csv
