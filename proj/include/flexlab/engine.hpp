#pragma once

#include "flexlab/hvac_plant.hpp"
#include "flexlab/supervisory.hpp"
#include "flexlab/thermal_zone.hpp"
#include "flexlab/weather.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flexlab {

struct SimConfig {
    double dt_s = 60.0;
    double day_length_min = kDayMinutes;
    std::vector<ZoneParams> zones;
    PlantParams plant;
    ControlSettings baseline;
    WeatherSeries weather;
    std::string weather_path;  // provenance only
    double initial_temp_c = 25.0;

    std::int64_t tick_count() const;
    std::vector<std::string> violations() const;
};

/// Four identical zones, the default plant and the baseline schedule, with
/// the given weather.
SimConfig default_config(WeatherSeries weather);

struct TimelineState {
    std::int64_t tick = 0;
    std::vector<ZoneState> zones;
    PlantState plant;
    OverrideLedger ledger;  // only ever non-empty on the controlled timeline
    std::vector<double> q_hvac_w;
    double power_kw = 0.0;
    double energy_kwh = 0.0;
    double energy_dr_kwh = 0.0;
    double energy_non_dr_kwh = 0.0;

    bool operator==(const TimelineState&) const = default;
};

TimelineState initial_timeline(const SimConfig& config);

struct TimelineFrame {
    std::vector<double> temps_c;
    ControlSettings settings;
    bool on = false;
    SystemMode mode = SystemMode::off;
    double power_kw = 0.0;
    double energy_kwh = 0.0;
    double energy_dr_kwh = 0.0;
    double energy_non_dr_kwh = 0.0;
    double unmet_w = 0.0;

    bool operator==(const TimelineFrame&) const = default;
};

/// One tick of both timelines. t_min is the start of the tick; temperatures
/// and cumulative energies are the values at its end, powers are the
/// (constant) power over the tick.
struct TelemetryFrame {
    std::int64_t tick = 0;
    double t_min = 0.0;
    double dt_s = 60.0;
    std::vector<std::string> zone_ids;
    TimelineFrame baseline;
    TimelineFrame controlled;
    bool dr_active = false;

    bool operator==(const TelemetryFrame&) const = default;
};

struct ScenarioEvent {
    double t_min = 0.0;
    OverrideCommand command;

    bool operator==(const ScenarioEvent&) const = default;
};

struct ScenarioScript {
    std::vector<ScenarioEvent> events;

    /// Events must be sorted by t_min and lie in [0, day_length_min).
    std::vector<std::string> violations(double day_length_min = kDayMinutes) const;
    bool operator==(const ScenarioScript&) const = default;
};

/// The accepted command log, as a script that replays it.
ScenarioScript script_from_log(std::span<const LedgerEntry> log);

struct RejectedCommand {
    OverrideCommand command;
    std::string reason;
};

struct TickResult {
    TimelineState baseline;
    TimelineState controlled;
    TelemetryFrame frame;
    std::vector<RejectedCommand> rejected;
};

/// Advances both timelines by one tick.
///
/// Order: queued commands go into the controlled ledger in arrival order,
/// effective settings and the mode are worked out per timeline, the plant
/// and then the zones are stepped, and energy is integrated into the DR or
/// non-DR bucket chosen by this tick's dr_active flag. The baseline never
/// reads the ledger. A command the ledger rejects is reported in `rejected`
/// and has no effect.
TickResult tick(const SimConfig& config, const TimelineState& baseline, const TimelineState& controlled,
                std::span<const OverrideCommand> pending);

struct Interval {
    double start_min = 0.0;
    double end_min = 0.0;

    bool operator==(const Interval&) const = default;
};

struct PeriodEnergy {
    double baseline_kwh = 0.0;
    double controlled_kwh = 0.0;
    double delta_kwh = 0.0;          // baseline - controlled
    std::optional<double> percent;   // saving relative to baseline; 0 when equal, empty if baseline is 0

    bool operator==(const PeriodEnergy&) const = default;
};

PeriodEnergy compare_energy(double baseline_kwh, double controlled_kwh);

struct RunSummary {
    PeriodEnergy dr;
    PeriodEnergy non_dr;
    PeriodEnergy total;
    std::vector<Interval> dr_intervals;

    bool operator==(const RunSummary&) const = default;
};

/// Reads the period energies off the last frame's counters and rebuilds the
/// DR intervals from runs of consecutive dr_active frames.
RunSummary summarize(std::span<const TelemetryFrame> frames);

/// Owns both timelines for one day. Not thread-safe; callers serialise.
class Engine {
public:
    /// Throws ValidationError if the config is invalid.
    explicit Engine(SimConfig config);

    const SimConfig& config() const noexcept { return config_; }
    std::int64_t tick_count() const noexcept { return tick_count_; }
    std::int64_t next_tick() const noexcept { return controlled_.tick; }
    double next_t_min() const noexcept;
    bool finished() const noexcept { return next_tick() >= tick_count_; }

    /// Queues a command for the next tick. Throws ValidationError if the
    /// command would be rejected given the commands already queued.
    void enqueue(const OverrideCommand& cmd);
    std::size_t pending() const noexcept { return pending_.size(); }

    /// Runs one tick and returns its frame. Throws ModelDivergence (with the
    /// tick attached) and Error(invalid_input) once the day is finished.
    const TelemetryFrame& step();

    std::span<const TelemetryFrame> frames() const noexcept { return frames_; }
    const TimelineState& baseline() const noexcept { return baseline_; }
    const TimelineState& controlled() const noexcept { return controlled_; }
    const std::vector<LedgerEntry>& command_log() const noexcept { return controlled_.ledger.history; }
    const std::vector<RejectedCommand>& rejected() const noexcept { return rejected_; }

private:
    SimConfig config_;
    std::int64_t tick_count_;
    TimelineState baseline_;
    TimelineState controlled_;
    std::vector<OverrideCommand> pending_;
    std::vector<TelemetryFrame> frames_;
    std::vector<RejectedCommand> rejected_;
};

struct RunResult {
    std::vector<TelemetryFrame> frames;
    RunSummary summary;
    std::vector<LedgerEntry> command_log;
};

/// Headless, unpaced day run. Script events are injected at the first tick
/// whose start time is at or after the event time. Throws ValidationError
/// before running if the config or the script is invalid.
RunResult run_day(const SimConfig& config, const ScenarioScript& script = {});

}  // namespace flexlab
