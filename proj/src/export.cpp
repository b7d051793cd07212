#include "flexlab/export.hpp"

#include "flexlab/codec.hpp"
#include "flexlab/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace flexlab {

std::string format_number(double value) {
    if (value == 0.0) return "0";  // folds -0
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) return "nan";
    return {buf, ptr};
}

std::string export_csv(std::span<const TelemetryFrame> frames) {
    std::string out(kExportCsvHeader);
    out += '\n';
    for (const auto& f : frames) {
        const std::string t = format_number(f.t_min);
        const std::string common_tail_sp =
            format_number(f.baseline.settings.cooling_setpoint_c) + ',' +
            format_number(f.controlled.settings.cooling_setpoint_c) + ',' + format_number(f.baseline.power_kw) + ',' +
            format_number(f.controlled.power_kw) + ',' + format_number(f.baseline.energy_kwh) + ',' +
            format_number(f.controlled.energy_kwh) + ',' + (f.dr_active ? "true" : "false");
        for (std::size_t i = 0; i < f.zone_ids.size(); ++i) {
            out += t;
            out += ',';
            out += f.zone_ids[i];
            out += ',';
            out += format_number(f.baseline.temps_c[i]);
            out += ',';
            out += format_number(f.controlled.temps_c[i]);
            out += ',';
            out += common_tail_sp;
            out += '\n';
        }
    }
    return out;
}

std::string summary_json(const RunSummary& summary) {
    return to_json(summary).dump(2) + "\n";
}

std::string format_summary_table(const RunSummary& summary) {
    std::ostringstream os;
    os << "DR intervals:";
    if (summary.dr_intervals.empty()) os << " none";
    for (const auto& iv : summary.dr_intervals)
        os << " [" << format_number(iv.start_min) << ", " << format_number(iv.end_min) << ")";
    os << '\n';

    char line[128];
    std::snprintf(line, sizeof line, "%-8s %14s %16s %12s %10s\n", "period", "baseline_kwh", "controlled_kwh",
                  "delta_kwh", "delta_pct");
    os << line;
    const std::pair<const char*, const PeriodEnergy*> rows[] = {
        {"DR", &summary.dr}, {"non-DR", &summary.non_dr}, {"total", &summary.total}};
    for (const auto& [name, p] : rows) {
        char pct[32];
        if (p->percent)
            std::snprintf(pct, sizeof pct, "%.1f", *p->percent);
        else
            std::snprintf(pct, sizeof pct, "n/a");
        std::snprintf(line, sizeof line, "%-8s %14.2f %16.2f %12.2f %10s\n", name, p->baseline_kwh, p->controlled_kwh,
                      p->delta_kwh, pct);
        os << line;
    }
    return os.str();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << contents;
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

void write_run_files(const std::filesystem::path& dir, std::span<const TelemetryFrame> frames,
                     const RunSummary& summary, std::span<const LedgerEntry> command_log) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "export.csv", export_csv(frames));
    write_file(dir / "summary.json", summary_json(summary));
    write_file(dir / "commands.ndjson", format_command_log(command_log));
}

}  // namespace flexlab
