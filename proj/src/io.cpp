#include "sgss/io.hpp"

#include <fstream>
#include <sstream>

#include "sgss/error.hpp"

namespace sgss::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<nlohmann::json> parse_ndjson(const std::string& text, const std::string& origin) {
  std::vector<nlohmann::json> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<nlohmann::json> read_ndjson(const std::filesystem::path& path) {
  return parse_ndjson(read_file(path), path.string());
}

}  // namespace sgss::io
