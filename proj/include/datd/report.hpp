#pragma once

// Output tables (CSV and whitespace-separated .dat twins), scenario config
// files and the run manifest.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "datd/harness.hpp"

namespace datd {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Shortest round-trip decimal; NaN becomes the empty string.
std::string format_number(double value);

Table per_task_table(const PairedRun& run);
Table credibility_table(const PairedRun& run);
Table weights_table(const PairedRun& run);
Table sweep_table(const std::vector<SweepRow>& rows);

/// Comma-separated, header row, LF line endings.
void write_csv(std::ostream& out, const Table& table);
/// Whitespace-separated, header commented with '#', empty cells as NaN.
void write_dat(std::ostream& out, const Table& table);
/// Writes `<stem>.csv` and `<stem>.dat` under `dir`. Throws on I/O failure.
void write_table(const std::filesystem::path& dir, std::string_view stem,
                 const Table& table);

/// Applies one `key = value` setting; keys are ScenarioConfig field names.
/// Throws config-error on unknown keys or unparsable values.
void apply_setting(ScenarioConfig& config, std::string_view key,
                   std::string_view value);

/// Reads a flat `key = value` file ('#' starts a comment). A JSON run
/// manifest is also accepted; its "config" object is applied.
void load_config(const std::filesystem::path& path, ScenarioConfig& config);

/// Every ScenarioConfig field as (key, value) text, in declaration order.
std::vector<std::pair<std::string, std::string>> config_settings(
    const ScenarioConfig& config);

struct RunManifest {
  ScenarioConfig config;
  std::string command;
  std::string scheme;
  std::string out_dir;
  std::string tool_version;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace datd
