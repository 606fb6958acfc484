#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dlcov {

/// Shortest form that round-trips is not required; 17 significant digits always do.
std::string format_double(double x);
/// Parses a decimal or "inf"/"-inf"/"nan"; throws FormatError on trailing garbage.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string> split_csv_line(std::string_view line);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// "key = value" lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> parse_key_values(std::string_view text);

}  // namespace dlcov
