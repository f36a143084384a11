#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gauge {

// Numeric table with a named header row. Missing cells are stored as NaN and
// written as empty fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;  // throws InvalidInput if absent
    std::vector<double> column_values(const std::string& name) const;
};

// 12 significant digits, shortest of fixed/exponent form.
std::string format_number(double value);

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

}  // namespace gauge
