#pragma once

// Deterministic CSV I/O: fixed column order, header row, doubles printed
// with %.17g so files round-trip and byte-compare across reruns.

#include <fstream>
#include <string>
#include <vector>

namespace stq {

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  // mixed row: prints integers without a decimal point
  void row_cells(const std::vector<std::string>& cells);
  static std::string cell(double v);
  static std::string cell(long long v);

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  double num(std::size_t row, int col) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace stq
