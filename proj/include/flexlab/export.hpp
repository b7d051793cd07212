#pragma once

#include "flexlab/engine.hpp"

#include <filesystem>
#include <span>
#include <string>

namespace flexlab {

inline constexpr const char* kExportCsvHeader =
    "t_min,zone_id,temp_base_c,temp_ctrl_c,cool_sp_base_c,cool_sp_ctrl_c,power_base_kw,power_ctrl_kw,"
    "energy_base_kwh,energy_ctrl_kwh,dr_active";

/// Shortest round-trip decimal form.
std::string format_number(double value);

/// One row per zone per tick.
std::string export_csv(std::span<const TelemetryFrame> frames);

std::string summary_json(const RunSummary& summary);

/// Fixed-width energy comparison: DR, non-DR and total rows with baseline,
/// controlled and delta kWh (2 decimals) and delta percent (1 decimal).
std::string format_summary_table(const RunSummary& summary);

/// Writes export.csv, summary.json and commands.ndjson into `dir`
/// (created if needed). Throws Error(io_error).
void write_run_files(const std::filesystem::path& dir, std::span<const TelemetryFrame> frames,
                     const RunSummary& summary, std::span<const LedgerEntry> command_log);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace flexlab
