#pragma once

/// \file csv.hpp
/// Locale-independent number formatting for CSV and JSON output.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

namespace smf {

/// Shortest round-trip representation; "inf", "-inf" and "nan" for
/// non-finite values.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

inline std::string format_uint(std::uint64_t x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, end);
}

/// Joins fields with commas and terminates the row with a newline.
class CsvRow {
 public:
  CsvRow& add(std::string_view field) {
    if (started_) line_ += ',';
    started_ = true;
    line_ += field;
    return *this;
  }
  CsvRow& add(const char* field) { return add(std::string_view(field)); }
  CsvRow& add(const std::string& field) { return add(std::string_view(field)); }
  CsvRow& add(double x) { return add(format_double(x)); }
  CsvRow& add(std::uint64_t x) { return add(format_uint(x)); }
  CsvRow& add(bool b) { return add(std::string_view(b ? "1" : "0")); }

  [[nodiscard]] std::string str() const { return line_ + '\n'; }

 private:
  std::string line_;
  bool started_ = false;
};

}  // namespace smf
