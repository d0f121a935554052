#include "mfwalk/csv.hpp"

#include <charconv>
#include <cmath>
#include <iostream>

#include "mfwalk/errors.hpp"

namespace mfw {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const std::string& path, std::string_view table) {
  if (path == "-") {
    out_ = &std::cout;
  } else {
    file_ = std::make_unique<std::ofstream>(path, std::ios::out | std::ios::trunc);
    if (!*file_) throw IoError("cannot open '" + path + "' for writing");
    out_ = file_.get();
  }
  *out_ << "# mfwalk schema=" << kCsvSchemaVersion << " table=" << table << '\n';
}

CsvWriter::CsvWriter(std::ostream& out, std::string_view table) : out_(&out) {
  *out_ << "# mfwalk schema=" << kCsvSchemaVersion << " table=" << table << '\n';
}

void CsvWriter::meta(std::string_view key, std::string_view value) {
  *out_ << "# " << key << '=' << value << '\n';
}

void CsvWriter::meta(std::string_view key, double value) { meta(key, format_double(value)); }

void CsvWriter::header(const std::vector<std::string>& columns) {
  columns_ = columns.size();
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (columns_ != 0 && fields.size() != columns_) {
    throw InternalError("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(columns_));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) *out_ << ',';
    *out_ << csv_escape(fields[i]);
  }
  *out_ << '\n';
  if (!*out_) throw IoError("write to CSV output failed");
}

void CsvWriter::flush() {
  out_->flush();
  if (!*out_) throw IoError("flushing CSV output failed");
}

}  // namespace mfw
