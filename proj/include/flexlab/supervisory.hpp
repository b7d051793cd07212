#pragma once

#include "flexlab/hvac_plant.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flexlab {

inline constexpr double kMinDeadbandK = 0.5;
inline constexpr double kModeHysteresisK = 0.2;
inline constexpr double kDayMinutes = 1440.0;

/// The seven discrete cooling setpoint modes, in K relative to baseline.
inline constexpr std::array<double, 7> kCoolingModes{-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};

bool is_cooling_mode(double mode) noexcept;

struct ControlSettings {
    double cooling_setpoint_c = 24.0;
    double heating_setpoint_c = 19.0;
    double start_min = 420.0;
    double end_min = 1080.0;

    bool operator==(const ControlSettings&) const = default;

    std::vector<std::string> violations(const std::string& path = "baseline") const;
};

/// Schedule end is exclusive.
bool schedule_on(const ControlSettings& settings, double t_min) noexcept;

enum class OverrideKind {
    cooling_mode,
    cooling_absolute,
    heating_absolute,
    schedule_start,
    schedule_end,
    clear_all,
};

std::string_view to_string(OverrideKind kind) noexcept;
/// Throws Error(parse_error) for an unknown kind name.
OverrideKind override_kind_from_string(std::string_view name);

struct OverrideCommand {
    OverrideKind kind = OverrideKind::clear_all;
    double mode = 0.0;   // cooling_mode only
    double value = 0.0;  // absolute kinds: C or minutes

    static OverrideCommand cooling_mode(double mode) { return {OverrideKind::cooling_mode, mode, 0.0}; }
    static OverrideCommand cooling_absolute(double c) { return {OverrideKind::cooling_absolute, 0.0, c}; }
    static OverrideCommand heating_absolute(double c) { return {OverrideKind::heating_absolute, 0.0, c}; }
    static OverrideCommand schedule_start(double m) { return {OverrideKind::schedule_start, 0.0, m}; }
    static OverrideCommand schedule_end(double m) { return {OverrideKind::schedule_end, 0.0, m}; }
    static OverrideCommand clear_all() { return {}; }

    bool operator==(const OverrideCommand&) const = default;
};

struct CoolingOverride {
    bool absolute = false;
    double value = 0.0;  // offset in K, or absolute C

    bool operator==(const CoolingOverride&) const = default;
};

struct LedgerEntry {
    double t_min = 0.0;
    OverrideCommand command;

    bool operator==(const LedgerEntry&) const = default;
};

/// Active override per slot (latest wins) plus the accepted-command history.
struct OverrideLedger {
    std::optional<CoolingOverride> cooling;
    std::optional<double> heating_c;
    std::optional<double> start_min;
    std::optional<double> end_min;
    std::vector<LedgerEntry> history;

    bool empty() const noexcept { return !cooling && !heating_c && !start_min && !end_min; }
    bool operator==(const OverrideLedger&) const = default;
};

/// Applies one command at simulation time t_min. Commands whose effect would
/// break the ControlSettings invariants (against `baseline` and the other
/// active overrides) are rejected with a ValidationError and the input
/// ledger is left as it was.
OverrideLedger apply_override(const OverrideLedger& ledger, const OverrideCommand& cmd, double t_min,
                              const ControlSettings& baseline);

ControlSettings effective_settings(const ControlSettings& baseline, const OverrideLedger& ledger);

/// off outside the schedule. Inside it: cooling above the cooling setpoint
/// minus the hysteresis band, heating below the heating setpoint plus the
/// band, otherwise the previous mode is kept. Coming from off inside the
/// deadband, the nearer setpoint decides.
SystemMode system_mode(const ControlSettings& settings, double t_min, std::span<const double> zone_temps_c,
                       SystemMode previous = SystemMode::off);

/// One-sided demand error, always >= 0. Zero when mode is off.
double zone_error(const ControlSettings& settings, SystemMode mode, double zone_temp_c);

/// Signed tracking error fed to the PI loops: positive when the zone needs
/// more conditioning in the current mode, negative when it has overshot.
double tracking_error(const ControlSettings& settings, SystemMode mode, double zone_temp_c);

/// True when the controlled timeline operates differently from the baseline
/// at this tick: the on/off states differ, or the controlled system is on
/// with different setpoints.
bool dr_active(const ControlSettings& baseline, const ControlSettings& effective, bool baseline_on,
               bool controlled_on);

}  // namespace flexlab
