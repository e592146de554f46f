// Minimal header-checked CSV reading for the project's flat record files.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace scooterx {

std::vector<std::string> split_csv_line(std::string_view line);
std::string_view trim(std::string_view s);

class CsvReader {
public:
    // Reads the header line and checks it names exactly `columns`.
    CsvReader(std::istream& in, std::vector<std::string> columns);

    // Next non-blank record; false at end of input. Throws DataError on a
    // wrong field count.
    bool next(std::vector<std::string>& fields);

    double number(const std::string& field, std::string_view column) const;
    std::size_t line() const { return line_; }
    std::string where() const;

private:
    std::istream& in_;
    std::vector<std::string> columns_;
    std::size_t line_ = 0;
};

double parse_double(std::string_view text);

}  // namespace scooterx
