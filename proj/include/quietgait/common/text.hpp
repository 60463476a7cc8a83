#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "quietgait/common/error.hpp"

namespace quietgait {

/// Shortest round-trippable decimal form of a double (17 significant digits).
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Minimal CSV writer: one header row, then numeric rows printed with
/// fmt_double so files are bit-stable across runs.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : out_(path), n_columns_(columns.size()) {
    if (!out_) throw InvalidInputError("cannot open CSV for writing: " + path);
    for (size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    if (values.size() != n_columns_)
      throw InvalidInputError("CSV row width mismatch");
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << fmt_double(values[i]);
    }
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  size_t n_columns_;
};

/// FNV-1a 64-bit hash; used to fingerprint resolved configs in run metadata.
inline uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open file: " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open file for writing: " + path);
  out << data;
}

}  // namespace quietgait
