#include "flexlab/supervisory.hpp"

#include "flexlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flexlab {

bool is_cooling_mode(double mode) noexcept {
    return std::find(kCoolingModes.begin(), kCoolingModes.end(), mode) != kCoolingModes.end();
}

std::vector<std::string> ControlSettings::violations(const std::string& path) const {
    std::vector<std::string> out;
    if (!std::isfinite(cooling_setpoint_c) || !std::isfinite(heating_setpoint_c)) {
        out.push_back(path + ".cooling_setpoint_c: setpoints must be finite");
    } else if (heating_setpoint_c + kMinDeadbandK > cooling_setpoint_c) {
        out.push_back(path + ".cooling_setpoint_c: deadband violation, cooling setpoint must be >= heating setpoint + 0.5 K");
    }
    if (!std::isfinite(start_min) || start_min < 0.0) out.push_back(path + ".start_min: must be >= 0");
    if (!std::isfinite(end_min) || end_min > kDayMinutes) out.push_back(path + ".end_min: must be <= 1440");
    if (std::isfinite(start_min) && std::isfinite(end_min) && !(start_min < end_min))
        out.push_back(path + ".start_min: must be < end_min");
    return out;
}

bool schedule_on(const ControlSettings& settings, double t_min) noexcept {
    return settings.start_min <= t_min && t_min < settings.end_min;
}

std::string_view to_string(OverrideKind kind) noexcept {
    switch (kind) {
    case OverrideKind::cooling_mode: return "cooling_mode";
    case OverrideKind::cooling_absolute: return "cooling_absolute";
    case OverrideKind::heating_absolute: return "heating_absolute";
    case OverrideKind::schedule_start: return "schedule_start";
    case OverrideKind::schedule_end: return "schedule_end";
    case OverrideKind::clear_all: return "clear_all";
    }
    return "clear_all";
}

OverrideKind override_kind_from_string(std::string_view name) {
    for (auto kind : {OverrideKind::cooling_mode, OverrideKind::cooling_absolute, OverrideKind::heating_absolute,
                      OverrideKind::schedule_start, OverrideKind::schedule_end, OverrideKind::clear_all}) {
        if (to_string(kind) == name) return kind;
    }
    throw Error(ErrorCode::parse_error, "unknown override kind '" + std::string(name) + "'");
}

OverrideLedger apply_override(const OverrideLedger& ledger, const OverrideCommand& cmd, double t_min,
                              const ControlSettings& baseline) {
    const std::string kind{to_string(cmd.kind)};
    if (!std::isfinite(t_min)) throw ValidationError({kind + ": non-finite command time"});
    if (!ledger.history.empty() && t_min < ledger.history.back().t_min)
        throw ValidationError({kind + ": command time precedes the last accepted command"});

    OverrideLedger next = ledger;
    switch (cmd.kind) {
    case OverrideKind::cooling_mode:
        if (!is_cooling_mode(cmd.mode))
            throw ValidationError({"cooling_mode: mode must be one of -2, -1, -0.5, 0, 0.5, 1, 2"});
        next.cooling = CoolingOverride{false, cmd.mode};
        break;
    case OverrideKind::cooling_absolute:
        if (!std::isfinite(cmd.value)) throw ValidationError({"cooling_absolute: value must be finite"});
        next.cooling = CoolingOverride{true, cmd.value};
        break;
    case OverrideKind::heating_absolute:
        if (!std::isfinite(cmd.value)) throw ValidationError({"heating_absolute: value must be finite"});
        next.heating_c = cmd.value;
        break;
    case OverrideKind::schedule_start:
        if (!std::isfinite(cmd.value)) throw ValidationError({"schedule_start: value must be finite"});
        next.start_min = cmd.value;
        break;
    case OverrideKind::schedule_end:
        if (!std::isfinite(cmd.value)) throw ValidationError({"schedule_end: value must be finite"});
        next.end_min = cmd.value;
        break;
    case OverrideKind::clear_all:
        next.cooling.reset();
        next.heating_c.reset();
        next.start_min.reset();
        next.end_min.reset();
        break;
    }

    auto violations = effective_settings(baseline, next).violations(kind);
    if (!violations.empty()) throw ValidationError(std::move(violations));

    next.history.push_back({t_min, cmd});
    return next;
}

ControlSettings effective_settings(const ControlSettings& baseline, const OverrideLedger& ledger) {
    ControlSettings out = baseline;
    if (ledger.cooling) {
        out.cooling_setpoint_c =
            ledger.cooling->absolute ? ledger.cooling->value : baseline.cooling_setpoint_c + ledger.cooling->value;
    }
    if (ledger.heating_c) out.heating_setpoint_c = *ledger.heating_c;
    if (ledger.start_min) out.start_min = *ledger.start_min;
    if (ledger.end_min) out.end_min = *ledger.end_min;
    return out;
}

SystemMode system_mode(const ControlSettings& settings, double t_min, std::span<const double> zone_temps_c,
                       SystemMode previous) {
    if (!schedule_on(settings, t_min) || zone_temps_c.empty()) return SystemMode::off;
    const double mean =
        std::accumulate(zone_temps_c.begin(), zone_temps_c.end(), 0.0) / static_cast<double>(zone_temps_c.size());
    if (mean > settings.cooling_setpoint_c - kModeHysteresisK) return SystemMode::cooling;
    if (mean < settings.heating_setpoint_c + kModeHysteresisK) return SystemMode::heating;
    if (previous != SystemMode::off) return previous;
    const double midpoint = 0.5 * (settings.cooling_setpoint_c + settings.heating_setpoint_c);
    return mean >= midpoint ? SystemMode::cooling : SystemMode::heating;
}

double zone_error(const ControlSettings& settings, SystemMode mode, double zone_temp_c) {
    return std::max(0.0, tracking_error(settings, mode, zone_temp_c));
}

double tracking_error(const ControlSettings& settings, SystemMode mode, double zone_temp_c) {
    switch (mode) {
    case SystemMode::cooling: return zone_temp_c - settings.cooling_setpoint_c;
    case SystemMode::heating: return settings.heating_setpoint_c - zone_temp_c;
    case SystemMode::off: return 0.0;
    }
    return 0.0;
}

bool dr_active(const ControlSettings& baseline, const ControlSettings& effective, bool baseline_on,
               bool controlled_on) {
    if (baseline_on != controlled_on) return true;
    if (!controlled_on) return false;
    return baseline.cooling_setpoint_c != effective.cooling_setpoint_c ||
           baseline.heating_setpoint_c != effective.heating_setpoint_c;
}

}  // namespace flexlab
