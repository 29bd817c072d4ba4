#include "ergolab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "ergolab/errors.hpp"

namespace ergolab {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw DomainError("csv: missing column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
    for (const auto& c : columns)
        if (c == name) return true;
    return false;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_row(line);
        if (first) {
            table.columns = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.columns.size())
                throw DomainError("csv: row has " + std::to_string(fields.size()) +
                                  " fields, header has " +
                                  std::to_string(table.columns.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("csv: cannot open '" + path + "'");
    return read_csv(in);
}

}  // namespace ergolab
