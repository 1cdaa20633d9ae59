#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bellsim/halo_analysis.hpp"
#include "bellsim/pulse_sequence.hpp"

namespace bellsim {

enum class TableFormat { csv, json_lines };
TableFormat parse_table_format(const std::string& text);
// ".csv" or ".jsonl"
const char* extension(TableFormat f);

// One row per setting: theta_a, theta_b, phi_a, phi_b, W1..W4 (raw), the
// normalised weights, E and a status column ("ok" or the error).
void write_correlation_table(const std::filesystem::path& path, const std::vector<ScanPoint>& points,
                             TableFormat format);

struct ChshSummary {
  std::array<ScanPoint, 4> runs;  // (a,b), (a,b'), (a',b), (a',b')
  double s = 0.0;
  double visibility = 0.0;
  double fit_rms = 0.0;
};
void write_chsh_summary(const std::filesystem::path& path, const ChshSummary& summary, TableFormat format);

// Flat N x N grid (one row per first-axis index) plus `<path>.txt` naming the
// axes and units.
void write_field_csv(const std::filesystem::path& path, const Field2D& field, const std::string& row_axis,
                     const std::string& column_axis, double momentum_unit, const std::string& unit_name);

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  std::string started;   // ISO 8601 UTC
  std::string finished;
  std::vector<StageRecord> stages;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> notes;

  // Throws FormatError if a listed output is missing.
  void write(const std::filesystem::path& path) const;
};

std::string utc_timestamp();
const char* tool_version();

}  // namespace bellsim
