#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace noisescope {

using CsvCell = std::variant<double, std::int64_t, std::string>;

/// Ordered key/value pairs written as the '#'-prefixed header block.
using CsvMetadata = std::vector<std::pair<std::string, std::string>>;

/// Decimal rendering with 15 significant digits; locale independent.
std::string format_number(double value);

/// Comma-separated table with LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(std::vector<CsvCell> cells);
  void add_row(std::initializer_list<double> cells);

  [[nodiscard]] std::size_t rows() const { return rows_.size(); }
  [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }

  /// Column-name line followed by the rows.
  void write_rows(std::ostream& out) const;
  /// Metadata block, then write_rows.
  void write(std::ostream& out, const CsvMetadata& metadata) const;
  void save(const std::filesystem::path& path, const CsvMetadata& metadata) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<CsvCell>> rows_;
};

}  // namespace noisescope
