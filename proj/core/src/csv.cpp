#include "noisescope/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace noisescope {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.15g", value);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<CsvCell> cells) {
  if (cells.size() != columns_.size()) throw std::invalid_argument("CSV row width mismatch");
  rows_.push_back(std::move(cells));
}

void CsvTable::add_row(std::initializer_list<double> cells) {
  add_row(std::vector<CsvCell>(cells.begin(), cells.end()));
}

void CsvTable::write_rows(std::ostream& out) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      std::visit(
          [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out << format_number(v);
            } else {
              out << v;
            }
          },
          row[c]);
    }
    out << '\n';
  }
}

void CsvTable::write(std::ostream& out, const CsvMetadata& metadata) const {
  for (const auto& [key, value] : metadata) out << "# " << key << ": " << value << '\n';
  write_rows(out);
}

void CsvTable::save(const std::filesystem::path& path, const CsvMetadata& metadata) const {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(file, metadata);
}

}  // namespace noisescope
