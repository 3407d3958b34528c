#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace csid {

/// Raw CSV contents: a header row and string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find_column(std::string_view name) const;
  std::size_t column(std::string_view name) const;  // throws DataError
  std::size_t size() const noexcept { return rows.size(); }
  Table subset(const std::vector<std::size_t>& row_positions) const;
};

/// Comma-separated values with optional double-quoted fields. Every row must
/// have as many fields as the header; errors name the 1-based line.
Table read_csv(std::istream& in);
Table read_csv_file(const std::filesystem::path& path);
void write_csv(std::ostream& out, const Table& table);

/// Empty (after trimming) or the literal NA.
bool is_missing(std::string_view field);

/// Parses a finite decimal number; nullopt when the text is not one.
std::optional<double> parse_number(std::string_view field);

std::string_view trim(std::string_view s);

}  // namespace csid
