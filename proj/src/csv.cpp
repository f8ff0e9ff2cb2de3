#include "ctlab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ctlab::csv {

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::invalid_argument("csv: missing column '" + name + "'");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path);
    Table table;
    std::string line;
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (row_number == 1) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size())
            throw std::runtime_error(path + " row " + std::to_string(row_number) +
                                     ": expected " + std::to_string(table.header.size()) +
                                     " fields, got " + std::to_string(cells.size()));
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty())
        throw std::runtime_error(path + " row 1: missing header");
    return table;
}

void write(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot write " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    if (!out) throw std::runtime_error("csv: write failed for " + path);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& cell, std::size_t row_number) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("row " + std::to_string(row_number) +
                                 ": not a number: '" + cell + "'");
    }
}

}  // namespace ctlab::csv
