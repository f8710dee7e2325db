#include "fhn/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fhn {

std::string format_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string hex16(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void write_csv(const std::filesystem::path& path, std::span<const std::string> column_names,
               std::span<const std::vector<double>> columns) {
  if (column_names.size() != columns.size()) {
    throw std::invalid_argument("CSV header/column count mismatch");
  }
  if (columns.empty()) throw std::invalid_argument("CSV needs at least one column");
  const std::size_t rows = columns.front().size();
  for (const auto& col : columns) {
    if (col.size() != rows) throw std::invalid_argument("CSV columns have unequal lengths");
  }

  std::string out;
  for (std::size_t c = 0; c < column_names.size(); ++c) {
    if (c) out += ',';
    out += column_names[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_g17(columns[c][r]);
    }
    out += '\n';
  }
  write_text(path, out);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  const std::size_t n = trajectory.states.size();
  std::vector<std::vector<double>> columns(3, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    columns[0][k] = trajectory.time_at(k);
    columns[1][k] = trajectory.states[k][0];
    columns[2][k] = trajectory.states[k][1];
  }
  const std::vector<std::string> names{"t", "x1", "x2"};
  write_csv(path, names, columns);
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < column_names.size(); ++c) {
    if (column_names[c] == name) return columns[c];
  }
  throw std::invalid_argument("CSV has no column named '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open CSV file: " + path.string());

  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("CSV file is empty");
  {
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.column_names.push_back(cell);
  }
  table.columns.resize(table.column_names.size());

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(row, cell, ',')) {
      if (c >= table.columns.size()) break;
      try {
        table.columns[c].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                    ": non-numeric cell '" + cell + "'");
      }
      ++c;
    }
    if (c != table.columns.size()) {
      throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(table.columns.size()) + " cells");
    }
  }
  return table;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace fhn
