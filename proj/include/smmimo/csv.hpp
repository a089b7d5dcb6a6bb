#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace smmimo {

/// Deterministic CSV emitter: fixed column order, 12 significant digits,
/// '.' decimal separator, RFC 4180 quoting.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << quoted(header[i]);
    }
    out_ << '\n';
  }

  CsvWriter& field(const std::string& value) { return raw(quoted(value)); }
  CsvWriter& field(const char* value) { return field(std::string(value)); }
  CsvWriter& field(double value) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return raw(buf);
  }
  CsvWriter& field(int value) { return raw(std::to_string(value)); }
  CsvWriter& field(long value) { return raw(std::to_string(value)); }
  CsvWriter& field(bool value) { return raw(value ? "true" : "false"); }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& raw(const std::string& text) {
    if (!first_) out_ << ',';
    out_ << text;
    first_ = false;
    return *this;
  }

  static std::string quoted(const std::string& value) {
    if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
    return out;
  }

  std::ostream& out_;
  bool first_ = true;
};

}  // namespace smmimo
