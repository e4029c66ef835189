#pragma once

// CSV and JSON output. Every CSV starts with one comment line holding the
// JSON provenance record, followed by a header row; numbers use 17
// significant digits so doubles round-trip.

#include <json.hpp>
#include <string>
#include <vector>

#include "qwalk/readout.hpp"

namespace qwalk::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

/// {"tool", "version", "subcommand", "seed", "config"}.
Json provenance(const std::string& subcommand, std::uint64_t seed, const Json& config);

std::string format_double(double v);

struct CsvTable {
  Json provenance;  ///< null when the file has no comment line
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws IoError if absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

/// Throws IoError if the file cannot be written.
void write_csv(const std::string& path, const Json& provenance,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Throws IoError if the file is missing, malformed, or has ragged rows.
CsvTable read_csv(const std::string& path);

void write_json(const std::string& path, const Json& j);

/// Columns (t_seconds, p_down); the channel goes into the provenance record.
void write_signal_csv(const std::string& path, const SignalTrace& s, Json provenance);

/// Channel from the provenance record when present, else `fallback`.
SignalTrace read_signal_csv(const std::string& path, Channel fallback = Channel::carrier);

}  // namespace qwalk::io
