#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fhn/sde.hpp"

namespace fhn {

inline constexpr const char* kVersion = "1.0.0";

/// Shortest round-trip decimal form (17 significant digits).
[[nodiscard]] std::string format_g17(double value);

/// Lower-case 16-digit hex form of a 64-bit value.
[[nodiscard]] std::string hex16(std::uint64_t value);

/// Writes named numeric columns as CSV with a header row; all columns must
/// have equal length. Values are written at 17 significant digits.
void write_csv(const std::filesystem::path& path, std::span<const std::string> column_names,
               std::span<const std::vector<double>> columns);

/// Trajectory as CSV (t, x1, x2).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);

/// Numeric CSV with one header row back into named columns.
struct CsvTable {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> columns;

  [[nodiscard]] const std::vector<double>& column(const std::string& name) const;
};

[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

/// Writes text atomically enough for our purposes (truncate + write).
void write_text(const std::filesystem::path& path, const std::string& text);

[[nodiscard]] std::string read_text(const std::filesystem::path& path);

}  // namespace fhn
