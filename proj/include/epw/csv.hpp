#pragma once

#include <string>
#include <vector>

namespace epw::csv {

/// Shortest round-trip decimal form of v (via %.17g with trailing cleanup
/// skipped: 17 significant digits always round-trip doubles exactly).
std::string format_double(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// RFC 4180-style writer: fields containing comma, quote, or newline are quoted.
void write(const std::string& path, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows);

/// Minimal reader for the files this project writes (and hand-made fixtures):
/// comma separation, double quotes with "" escapes, first row is the header.
Table read(const std::string& path);

double to_double(const std::string& field);

}  // namespace epw::csv
