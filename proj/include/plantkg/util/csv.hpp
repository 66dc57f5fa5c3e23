#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace plantkg::util {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a comma-separated file with a header row. Double-quoted fields may
// contain commas, escaped quotes ("") and newlines.
CsvTable read_csv(const std::string& path);

CsvTable parse_csv(std::string_view text);

// Quotes a field only when needed.
std::string csv_escape(std::string_view field);

void write_csv(const std::string& path, const CsvTable& table);

}  // namespace plantkg::util
