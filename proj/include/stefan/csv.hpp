#pragma once

#include <string>
#include <vector>

namespace stefan {

/// Shortest decimal string that round-trips the double exactly.
std::string format_double(double v);

/// Minimal CSV writer: fixed header, rows of round-trip formatted numbers.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(const std::vector<double>& row);
  void add_text_row(const std::vector<std::string>& row);
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::string& path, const std::string& content);

}  // namespace stefan
