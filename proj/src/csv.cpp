#include "epw/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "epw/errors.hpp"

namespace epw::csv {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

/// Splits the full file content into records, honoring newlines inside quoted
/// fields. Empty records (blank lines between rows) are dropped.
std::vector<std::vector<std::string>> parse_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    bool field_started = false;
    auto end_record = [&] {
        fields.push_back(cur);
        cur.clear();
        const bool blank = fields.size() == 1 && fields[0].empty() && !field_started;
        if (!blank) records.push_back(std::move(fields));
        fields.clear();
        field_started = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
            field_started = true;
        } else if (c == '\n') {
            end_record();
        } else if (c != '\r') {
            cur += c;
            field_started = true;
        }
    }
    if (field_started || !cur.empty() || !fields.empty()) end_record();
    return records;
}

}  // namespace

void write(const std::string& path, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("csv: cannot open for writing: " + path);
    auto emit = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << (needs_quoting(row[i]) ? quoted(row[i]) : row[i]);
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    if (!out) throw io_error("csv: write failed: " + path);
}

Table read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("csv: cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto records = parse_records(buf.str());
    if (records.empty()) throw io_error("csv: empty file: " + path);
    Table t;
    t.header = std::move(records.front());
    t.rows.assign(std::make_move_iterator(records.begin() + 1),
                  std::make_move_iterator(records.end()));
    return t;
}

double to_double(const std::string& field) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(field, &pos);
    } catch (const std::exception&) {
        throw io_error("csv: not a number: '" + field + "'");
    }
    if (pos != field.size()) throw io_error("csv: trailing junk in number: '" + field + "'");
    return v;
}

}  // namespace epw::csv
