#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqpert {

// round-trippable decimal form, no locale surprises
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(std::int64_t v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }

// comma-separated rows, LF line endings, header written on open
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary), cols_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path);
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_) throw std::runtime_error("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  bool good() const { return static_cast<bool>(out_); }

 private:
  std::ofstream out_;
  std::size_t cols_;
};

}  // namespace eqpert
