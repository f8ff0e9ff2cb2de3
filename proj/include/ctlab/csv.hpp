#pragma once

#include <string>
#include <vector>

// Minimal CSV I/O for the experiment artifacts. Malformed input is rejected
// with the offending row number.

namespace ctlab::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws if absent
};

Table read(const std::string& path);
void write(const std::string& path, const Table& table);

std::string format_double(double v);  // round-trip precision
double parse_double(const std::string& cell, std::size_t row_number);

}  // namespace ctlab::csv
