#include "flexlab/engine.hpp"

#include "flexlab/error.hpp"

#include <cmath>

namespace flexlab {

std::int64_t SimConfig::tick_count() const {
    return std::llround(day_length_min * 60.0 / dt_s);
}

std::vector<std::string> SimConfig::violations() const {
    std::vector<std::string> out;
    if (!std::isfinite(dt_s) || dt_s <= 0.0) {
        out.emplace_back("dt_s: must be > 0");
    } else {
        const double ticks = day_length_min * 60.0 / dt_s;
        if (std::abs(ticks - std::round(ticks)) > 1e-9 * ticks)
            out.emplace_back("dt_s: day length must be an integer multiple of dt_s");
    }
    if (!std::isfinite(day_length_min) || day_length_min <= 0.0 || day_length_min > kDayMinutes)
        out.emplace_back("day_length_min: must lie in (0, 1440]");
    if (zones.empty()) out.emplace_back("zones: at least one zone required");
    for (std::size_t i = 0; i < zones.size(); ++i) {
        const std::string path = "zones[" + std::to_string(i) + "]";
        auto v = zones[i].violations(path);
        out.insert(out.end(), v.begin(), v.end());
        for (std::size_t j = 0; j < i; ++j) {
            if (zones[j].id == zones[i].id) out.push_back(path + ".id: duplicate id '" + zones[i].id + "'");
        }
    }
    auto plant_v = plant.violations("plant");
    out.insert(out.end(), plant_v.begin(), plant_v.end());
    if (plant.vavs.size() != zones.size()) {
        out.emplace_back("plant.vav: expected one VAV box per zone");
    } else {
        for (std::size_t i = 0; i < zones.size(); ++i) {
            if (plant.vavs[i].zone_id != zones[i].id)
                out.push_back("plant.vav[" + std::to_string(i) + "].zone_id: does not match zone '" + zones[i].id + "'");
        }
    }
    auto base_v = baseline.violations("baseline");
    out.insert(out.end(), base_v.begin(), base_v.end());
    if (weather.empty()) out.emplace_back("weather_path: no weather samples loaded");
    if (!std::isfinite(initial_temp_c) || initial_temp_c < kGuardRailMinC || initial_temp_c > kGuardRailMaxC)
        out.emplace_back("initial_temp_c: must lie in [-20, 60]");
    return out;
}

SimConfig default_config(WeatherSeries weather) {
    SimConfig config;
    std::vector<std::string> ids;
    for (int floor = 1; floor <= 2; ++floor) {
        for (const char* side : {"north", "south"}) {
            ZoneParams zone;
            zone.id = "f" + std::to_string(floor) + "_" + side;
            ids.push_back(zone.id);
            config.zones.push_back(zone);
        }
    }
    config.plant = default_plant(ids);
    config.weather = std::move(weather);
    return config;
}

TimelineState initial_timeline(const SimConfig& config) {
    TimelineState state;
    state.zones.assign(config.zones.size(), ZoneState{config.initial_temp_c});
    state.plant = initial_plant_state(config.plant);
    state.q_hvac_w.assign(config.zones.size(), 0.0);
    return state;
}

ScenarioScript script_from_log(std::span<const LedgerEntry> log) {
    ScenarioScript script;
    for (const auto& entry : log) script.events.push_back({entry.t_min, entry.command});
    return script;
}

std::vector<std::string> ScenarioScript::violations(double day_length_min) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const std::string path = "events[" + std::to_string(i) + "].t_min";
        const double t = events[i].t_min;
        if (!std::isfinite(t) || t < 0.0 || t >= day_length_min)
            out.push_back(path + ": must lie in [0, 1440)");
        else if (i > 0 && t < events[i - 1].t_min)
            out.push_back(path + ": events must be sorted by t_min");
    }
    return out;
}

namespace {

struct TimelineStep {
    TimelineState state;
    TimelineFrame frame;
    double increment_kwh = 0.0;
};

TimelineStep advance_timeline(const SimConfig& config, const TimelineState& state, const ControlSettings& settings,
                              double t_min, const WeatherSample& weather, bool occupied) {
    TimelineStep out;
    out.state = state;
    const std::size_t n = config.zones.size();

    std::vector<double> temps(n);
    for (std::size_t i = 0; i < n; ++i) temps[i] = state.zones[i].temp_c;

    const SystemMode mode = system_mode(settings, t_min, temps, state.plant.mode);
    std::vector<double> errors(n);
    for (std::size_t i = 0; i < n; ++i) errors[i] = tracking_error(settings, mode, temps[i]);

    auto plant = plant_step(config.plant, state.plant, errors, temps, mode, weather.t_out_c, config.dt_s);

    for (std::size_t i = 0; i < n; ++i) {
        out.state.zones[i] =
            step_zone(config.zones[i], state.zones[i], weather, plant.q_hvac_w[i], occupied, config.dt_s);
    }

    out.state.plant = std::move(plant.state);
    out.state.q_hvac_w = std::move(plant.q_hvac_w);
    out.state.power_kw = plant.electrical_w / 1000.0;
    out.increment_kwh = out.state.power_kw * (config.dt_s / 3600.0);
    out.state.tick = state.tick + 1;

    out.frame.temps_c.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.frame.temps_c[i] = out.state.zones[i].temp_c;
    out.frame.settings = settings;
    out.frame.on = schedule_on(settings, t_min);
    out.frame.mode = mode;
    out.frame.power_kw = out.state.power_kw;
    out.frame.unmet_w = out.state.plant.unmet_w;
    return out;
}

void book_energy(TimelineStep& step, bool dr) {
    auto& s = step.state;
    s.energy_kwh += step.increment_kwh;
    if (dr)
        s.energy_dr_kwh += step.increment_kwh;
    else
        s.energy_non_dr_kwh += step.increment_kwh;
    step.frame.energy_kwh = s.energy_kwh;
    step.frame.energy_dr_kwh = s.energy_dr_kwh;
    step.frame.energy_non_dr_kwh = s.energy_non_dr_kwh;
}

}  // namespace

TickResult tick(const SimConfig& config, const TimelineState& baseline, const TimelineState& controlled,
                std::span<const OverrideCommand> pending) {
    if (baseline.tick != controlled.tick)
        throw Error(ErrorCode::invalid_input, "tick: timelines are not at the same tick");

    const std::int64_t k = controlled.tick;
    const double t_min = static_cast<double>(k) * config.dt_s / 60.0;

    TickResult result;
    OverrideLedger ledger = controlled.ledger;
    for (const auto& cmd : pending) {
        try {
            ledger = apply_override(ledger, cmd, t_min, config.baseline);
        } catch (const ValidationError& e) {
            result.rejected.push_back({cmd, e.what()});
        }
    }

    const ControlSettings& base_settings = config.baseline;
    const ControlSettings ctrl_settings = effective_settings(config.baseline, ledger);
    const WeatherSample weather = config.weather.at(t_min);
    const bool occupied = schedule_on(config.baseline, t_min);

    TimelineStep base;
    TimelineStep ctrl;
    try {
        base = advance_timeline(config, baseline, base_settings, t_min, weather, occupied);
        TimelineState ctrl_in = controlled;
        ctrl_in.ledger = ledger;
        ctrl = advance_timeline(config, ctrl_in, ctrl_settings, t_min, weather, occupied);
    } catch (const ModelDivergence& e) {
        throw e.with_tick(k);
    }

    const bool dr = dr_active(base_settings, ctrl_settings, base.frame.on, ctrl.frame.on);
    book_energy(base, dr);
    book_energy(ctrl, dr);

    result.frame.tick = k;
    result.frame.t_min = t_min;
    result.frame.dt_s = config.dt_s;
    result.frame.zone_ids.reserve(config.zones.size());
    for (const auto& z : config.zones) result.frame.zone_ids.push_back(z.id);
    result.frame.baseline = std::move(base.frame);
    result.frame.controlled = std::move(ctrl.frame);
    result.frame.dr_active = dr;
    result.baseline = std::move(base.state);
    result.controlled = std::move(ctrl.state);
    return result;
}

PeriodEnergy compare_energy(double baseline_kwh, double controlled_kwh) {
    PeriodEnergy p;
    p.baseline_kwh = baseline_kwh;
    p.controlled_kwh = controlled_kwh;
    p.delta_kwh = baseline_kwh - controlled_kwh;
    if (baseline_kwh == controlled_kwh)
        p.percent = 0.0;
    else if (baseline_kwh > 0.0)
        p.percent = p.delta_kwh / baseline_kwh * 100.0;
    return p;
}

RunSummary summarize(std::span<const TelemetryFrame> frames) {
    if (frames.empty()) throw Error(ErrorCode::invalid_input, "summarize: no frames");
    const auto& last = frames.back();
    RunSummary s;
    s.dr = compare_energy(last.baseline.energy_dr_kwh, last.controlled.energy_dr_kwh);
    s.non_dr = compare_energy(last.baseline.energy_non_dr_kwh, last.controlled.energy_non_dr_kwh);
    s.total = compare_energy(last.baseline.energy_kwh, last.controlled.energy_kwh);

    std::optional<Interval> open;
    for (const auto& f : frames) {
        const double end = f.t_min + f.dt_s / 60.0;
        if (f.dr_active) {
            if (open && open->end_min == f.t_min) {
                open->end_min = end;
            } else {
                if (open) s.dr_intervals.push_back(*open);
                open = Interval{f.t_min, end};
            }
        } else if (open) {
            s.dr_intervals.push_back(*open);
            open.reset();
        }
    }
    if (open) s.dr_intervals.push_back(*open);
    return s;
}

// ---------------------------------------------------------------------------

Engine::Engine(SimConfig config) : config_(std::move(config)) {
    auto violations = config_.violations();
    if (!violations.empty()) throw ValidationError(std::move(violations));
    tick_count_ = config_.tick_count();
    baseline_ = initial_timeline(config_);
    controlled_ = baseline_;
    frames_.reserve(static_cast<std::size_t>(tick_count_));
}

double Engine::next_t_min() const noexcept {
    return static_cast<double>(next_tick()) * config_.dt_s / 60.0;
}

void Engine::enqueue(const OverrideCommand& cmd) {
    if (finished()) throw Error(ErrorCode::not_running, "not running");
    const double t = next_t_min();
    OverrideLedger probe = controlled_.ledger;
    for (const auto& queued : pending_) probe = apply_override(probe, queued, t, config_.baseline);
    apply_override(probe, cmd, t, config_.baseline);
    pending_.push_back(cmd);
}

const TelemetryFrame& Engine::step() {
    if (finished()) throw Error(ErrorCode::invalid_input, "day already finished");
    auto result = tick(config_, baseline_, controlled_, pending_);
    pending_.clear();
    for (auto& r : result.rejected) rejected_.push_back(std::move(r));
    baseline_ = std::move(result.baseline);
    controlled_ = std::move(result.controlled);
    frames_.push_back(std::move(result.frame));
    return frames_.back();
}

RunResult run_day(const SimConfig& config, const ScenarioScript& script) {
    auto violations = config.violations();
    auto script_v = script.violations(config.day_length_min);
    violations.insert(violations.end(), script_v.begin(), script_v.end());
    if (violations.empty()) {
        // Dry-run the ledger so invalid command combinations fail up front.
        OverrideLedger probe;
        for (std::size_t i = 0; i < script.events.size(); ++i) {
            try {
                probe = apply_override(probe, script.events[i].command, script.events[i].t_min, config.baseline);
            } catch (const ValidationError& e) {
                for (const auto& v : e.violations()) violations.push_back("events[" + std::to_string(i) + "]: " + v);
            }
        }
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));

    Engine engine(config);
    std::size_t next_event = 0;
    while (!engine.finished()) {
        const double t = engine.next_t_min();
        while (next_event < script.events.size() && script.events[next_event].t_min <= t) {
            engine.enqueue(script.events[next_event].command);
            ++next_event;
        }
        engine.step();
    }

    RunResult out;
    out.frames.assign(engine.frames().begin(), engine.frames().end());
    out.summary = summarize(out.frames);
    out.command_log = engine.command_log();
    return out;
}

}  // namespace flexlab
