#pragma once

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mfw {

/// Schema version written into every CSV's first comment line.
inline constexpr int kCsvSchemaVersion = 1;

/// Shortest round-trip decimal form of a double ("inf", "-inf", "nan" for
/// non-finite values).
std::string format_double(double v);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

/// RFC 4180 style writer: `#` metadata lines, one header row, data rows.
///
///   # mfwalk schema=1 table=<table>
///   # key=value
///   col1,col2,...
class CsvWriter {
 public:
  /// Writes to a file; "-" means standard output. Throws IoError when the
  /// file cannot be opened.
  CsvWriter(const std::string& path, std::string_view table);
  /// Writes to an existing stream (not owned).
  CsvWriter(std::ostream& out, std::string_view table);

  void meta(std::string_view key, std::string_view value);
  void meta(std::string_view key, double value);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& fields);
  void flush();

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
  std::size_t columns_ = 0;
};

}  // namespace mfw
