#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace addwn {

// Shortest round-trip-stable rendering used for every number that lands in a
// CSV cell; identical doubles always produce identical bytes.
std::string format_double(double x);

// RFC-4180 quoting: fields containing commas, quotes or line breaks are
// wrapped in double quotes with embedded quotes doubled.
std::string csv_escape(const std::string& field);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(std::uint64_t h);  // 16 lowercase hex digits

// Header-plus-rows CSV buffer.  Callers format numeric cells through
// format_double; write() emits LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add(std::vector<std::string> row);
  std::string to_string() const;
  void write(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& doc);

}  // namespace addwn
