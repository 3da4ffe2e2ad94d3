#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trace {

/// A header plus string cells; every row has header.size() cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string source = "<input>";

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws ParseError("missing column: <name>").
    std::size_t column(std::string_view name) const;
};

/// RFC 4180 style: comma separated, double-quote escaping, LF or CRLF.
/// Blank lines are ignored. Throws ParseError on an empty input, a ragged
/// row or an unterminated quote.
CsvTable parse_csv(std::string_view text, std::string source = "<input>");
CsvTable read_csv_file(const std::filesystem::path& path);

void write_csv_row(std::ostream& out, std::span<const std::string> cells);

/// Shortest representation that round-trips to the same double.
std::string format_number(double value);

/// Whole-string parse of a finite decimal number; nullopt otherwise.
std::optional<double> parse_number(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

} // namespace trace
