#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace heatrl::csv {

/// Shortest round-trip decimal representation; stable across runs.
std::string format(double value);

/// Strict full-token parse; returns false on trailing garbage or empty input.
bool parse_double(std::string_view token, double& out);
bool parse_long(std::string_view token, long long& out);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Reads every line (LF endings, a trailing CR is stripped).
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes `content` atomically enough for our purposes (truncate + write).
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace heatrl::csv
