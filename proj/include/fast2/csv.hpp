#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fast2 {

using CsvRow = std::vector<std::string>;

/// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
/// line breaks. A leading UTF-8 byte-order mark is dropped. Blank lines are skipped.
std::vector<CsvRow> parse_csv(std::string_view text);

std::vector<CsvRow> read_csv_file(const std::filesystem::path& path);

/// Quotes a field only when it contains a separator, quote or line break.
std::string csv_escape(std::string_view field);

std::string csv_line(const CsvRow& row);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace fast2
