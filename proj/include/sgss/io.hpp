#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sgss::io {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Parses a newline-delimited JSON file; blank lines are skipped. Parse errors
// report the 1-based line number.
std::vector<nlohmann::json> read_ndjson(const std::filesystem::path& path);
std::vector<nlohmann::json> parse_ndjson(const std::string& text, const std::string& origin);

template <typename Json>
std::string dump_ndjson(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump();
    out += '\n';
  }
  return out;
}

}  // namespace sgss::io
