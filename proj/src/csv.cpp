#include "scooterx/csv.hpp"

#include "scooterx/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <istream>

namespace scooterx {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const auto piece = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        out.emplace_back(trim(piece));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

double parse_double(std::string_view text)
{
    const std::string buf(trim(text));
    if (buf.empty()) {
        throw InvalidArgument("empty number");
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || errno == ERANGE || !std::isfinite(v)) {
        throw InvalidArgument("not a finite number: '" + buf + "'");
    }
    return v;
}

CsvReader::CsvReader(std::istream& in, std::vector<std::string> columns)
    : in_(in), columns_(std::move(columns))
{
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (!trim(text).empty()) {
            const auto header = split_csv_line(text);
            if (header != columns_) {
                std::string expected;
                for (const auto& c : columns_) {
                    expected += (expected.empty() ? "" : ",") + c;
                }
                throw DataError(where() + ": expected header '" + expected + "'");
            }
            return;
        }
    }
    throw DataError("empty file");
}

bool CsvReader::next(std::vector<std::string>& fields)
{
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (trim(text).empty()) {
            continue;
        }
        fields = split_csv_line(text);
        if (fields.size() != columns_.size()) {
            throw DataError(where() + ": expected " + std::to_string(columns_.size()) +
                            " fields, got " + std::to_string(fields.size()));
        }
        return true;
    }
    return false;
}

double CsvReader::number(const std::string& field, std::string_view column) const
{
    try {
        return parse_double(field);
    } catch (const InvalidArgument& e) {
        throw DataError(where() + ": column " + std::string(column) + ": " + e.what());
    }
}

std::string CsvReader::where() const
{
    return "line " + std::to_string(line_);
}

}  // namespace scooterx
