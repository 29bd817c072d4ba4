#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ergolab {

/// Serialises a double with 12 significant digits; all report files use this
/// so reruns are byte-comparable.
std::string format_double(double value);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of a column; throws DomainError naming the column when absent.
    std::size_t column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

/// Minimal comma-separated reader (no quoting; the schemas here never need it).
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

}  // namespace ergolab
