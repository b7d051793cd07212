#include "flexlab/codec.hpp"

#include "flexlab/error.hpp"

#include <cmath>

namespace flexlab {

Json json_number(double value) {
    constexpr double kExactIntegerLimit = 9007199254740992.0;  // 2^53
    if (std::isfinite(value) && value == std::trunc(value) && std::abs(value) < kExactIntegerLimit)
        return Json(static_cast<std::int64_t>(value));
    return Json(value);
}

double number_field(const Json& object, std::string_view key, const std::string& path) {
    const auto it = object.find(std::string(key));
    if (it == object.end()) throw Error(ErrorCode::parse_error, path + "." + std::string(key) + ": missing");
    if (!it->is_number()) throw Error(ErrorCode::parse_error, path + "." + std::string(key) + ": expected a number");
    return it->get<double>();
}

namespace {

const Json& require_object(const Json& j, const std::string& path) {
    if (!j.is_object()) throw Error(ErrorCode::parse_error, path + ": expected an object");
    return j;
}

const Json& member(const Json& j, std::string_view key, const std::string& path) {
    const auto it = j.find(std::string(key));
    if (it == j.end()) throw Error(ErrorCode::parse_error, path + "." + std::string(key) + ": missing");
    return *it;
}

bool bool_field(const Json& j, std::string_view key, const std::string& path) {
    const auto& v = member(j, key, path);
    if (!v.is_boolean()) throw Error(ErrorCode::parse_error, path + "." + std::string(key) + ": expected a boolean");
    return v.get<bool>();
}

std::string string_field(const Json& j, std::string_view key, const std::string& path) {
    const auto& v = member(j, key, path);
    if (!v.is_string()) throw Error(ErrorCode::parse_error, path + "." + std::string(key) + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> number_array(const Json& j, std::string_view key, const std::string& path) {
    const auto& v = member(j, key, path);
    if (!v.is_array()) throw Error(ErrorCode::parse_error, path + "." + std::string(key) + ": expected an array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw Error(ErrorCode::parse_error, path + "." + std::string(key) + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Json to_json(const TimelineFrame& t) {
    Json temps = Json::array();
    for (double v : t.temps_c) temps.push_back(json_number(v));
    Json j;
    j["temps_c"] = std::move(temps);
    j["settings"] = to_json(t.settings);
    j["on"] = t.on;
    j["mode"] = std::string(to_string(t.mode));
    j["power_kw"] = json_number(t.power_kw);
    j["energy_kwh"] = json_number(t.energy_kwh);
    j["energy_dr_kwh"] = json_number(t.energy_dr_kwh);
    j["energy_non_dr_kwh"] = json_number(t.energy_non_dr_kwh);
    j["unmet_w"] = json_number(t.unmet_w);
    return j;
}

ControlSettings settings_from_json(const Json& j, const std::string& path) {
    require_object(j, path);
    return {number_field(j, "cooling_setpoint_c", path), number_field(j, "heating_setpoint_c", path),
            number_field(j, "start_min", path), number_field(j, "end_min", path)};
}

TimelineFrame timeline_from_json(const Json& j, const std::string& path) {
    require_object(j, path);
    TimelineFrame t;
    t.temps_c = number_array(j, "temps_c", path);
    t.settings = settings_from_json(member(j, "settings", path), path + ".settings");
    t.on = bool_field(j, "on", path);
    t.mode = system_mode_from_string(string_field(j, "mode", path));
    t.power_kw = number_field(j, "power_kw", path);
    t.energy_kwh = number_field(j, "energy_kwh", path);
    t.energy_dr_kwh = number_field(j, "energy_dr_kwh", path);
    t.energy_non_dr_kwh = number_field(j, "energy_non_dr_kwh", path);
    t.unmet_w = number_field(j, "unmet_w", path);
    return t;
}

Json to_json(const PeriodEnergy& p) {
    Json j;
    j["baseline_kwh"] = json_number(p.baseline_kwh);
    j["controlled_kwh"] = json_number(p.controlled_kwh);
    j["delta_kwh"] = json_number(p.delta_kwh);
    j["percent"] = p.percent ? json_number(*p.percent) : Json(nullptr);
    return j;
}

PeriodEnergy period_from_json(const Json& j, const std::string& path) {
    require_object(j, path);
    PeriodEnergy p;
    p.baseline_kwh = number_field(j, "baseline_kwh", path);
    p.controlled_kwh = number_field(j, "controlled_kwh", path);
    p.delta_kwh = number_field(j, "delta_kwh", path);
    const auto& pct = member(j, "percent", path);
    if (!pct.is_null()) p.percent = number_field(j, "percent", path);
    return p;
}

ScenarioEvent event_from_json(const Json& j, const std::string& path) {
    require_object(j, path);
    return {number_field(j, "t_min", path), override_from_json(member(j, "command", path), path + ".command")};
}

Json to_json(const ScenarioEvent& e) {
    Json j;
    j["t_min"] = json_number(e.t_min);
    j["command"] = to_json(e.command);
    return j;
}

}  // namespace

Json to_json(const OverrideCommand& cmd) {
    Json j;
    j["kind"] = std::string(to_string(cmd.kind));
    switch (cmd.kind) {
    case OverrideKind::cooling_mode: j["mode"] = json_number(cmd.mode); break;
    case OverrideKind::clear_all: break;
    default: j["value"] = json_number(cmd.value); break;
    }
    return j;
}

OverrideCommand override_from_json(const Json& j, const std::string& path) {
    require_object(j, path);
    OverrideCommand cmd;
    cmd.kind = override_kind_from_string(string_field(j, "kind", path));
    switch (cmd.kind) {
    case OverrideKind::cooling_mode: cmd.mode = number_field(j, "mode", path); break;
    case OverrideKind::clear_all: break;
    default: cmd.value = number_field(j, "value", path); break;
    }
    return cmd;
}

Json to_json(const ControlSettings& s) {
    Json j;
    j["cooling_setpoint_c"] = json_number(s.cooling_setpoint_c);
    j["heating_setpoint_c"] = json_number(s.heating_setpoint_c);
    j["start_min"] = json_number(s.start_min);
    j["end_min"] = json_number(s.end_min);
    return j;
}

Json to_json(const ScenarioScript& script) {
    Json events = Json::array();
    for (const auto& e : script.events) events.push_back(to_json(e));
    Json j;
    j["events"] = std::move(events);
    return j;
}

ScenarioScript script_from_json(const Json& j) {
    require_object(j, "script");
    const auto& events = member(j, "events", "script");
    if (!events.is_array()) throw Error(ErrorCode::parse_error, "script.events: expected an array");
    ScenarioScript script;
    for (std::size_t i = 0; i < events.size(); ++i)
        script.events.push_back(event_from_json(events[i], "events[" + std::to_string(i) + "]"));
    return script;
}

ScenarioScript parse_script_text(std::string_view text) {
    if (auto whole = Json::parse(text, nullptr, false); !whole.is_discarded() && whole.is_object() &&
                                                        whole.contains("events")) {
        return script_from_json(whole);
    }
    ScenarioScript script;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        const std::string path = "line " + std::to_string(line_no);
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw Error(ErrorCode::parse_error, path + ": malformed JSON at byte " + std::to_string(e.byte));
        }
        script.events.push_back(event_from_json(j, path));
    }
    return script;
}

std::string format_command_log(std::span<const LedgerEntry> log) {
    std::string out;
    for (const auto& entry : log) {
        out += to_json(ScenarioEvent{entry.t_min, entry.command}).dump();
        out += '\n';
    }
    return out;
}

Json to_json(const TelemetryFrame& f) {
    Json ids = Json::array();
    for (const auto& id : f.zone_ids) ids.push_back(id);
    Json j;
    j["tick"] = f.tick;
    j["t_min"] = json_number(f.t_min);
    j["dt_s"] = json_number(f.dt_s);
    j["zone_ids"] = std::move(ids);
    j["dr_active"] = f.dr_active;
    j["baseline"] = to_json(f.baseline);
    j["controlled"] = to_json(f.controlled);
    return j;
}

TelemetryFrame frame_from_json(const Json& j) {
    require_object(j, "frame");
    TelemetryFrame f;
    const auto& tick = member(j, "tick", "frame");
    if (!tick.is_number_integer()) throw Error(ErrorCode::parse_error, "frame.tick: expected an integer");
    f.tick = tick.get<std::int64_t>();
    f.t_min = number_field(j, "t_min", "frame");
    f.dt_s = number_field(j, "dt_s", "frame");
    for (const auto& id : member(j, "zone_ids", "frame")) {
        if (!id.is_string()) throw Error(ErrorCode::parse_error, "frame.zone_ids: expected strings");
        f.zone_ids.push_back(id.get<std::string>());
    }
    f.dr_active = bool_field(j, "dr_active", "frame");
    f.baseline = timeline_from_json(member(j, "baseline", "frame"), "frame.baseline");
    f.controlled = timeline_from_json(member(j, "controlled", "frame"), "frame.controlled");
    return f;
}

Json to_json(const RunSummary& s) {
    Json intervals = Json::array();
    for (const auto& i : s.dr_intervals) {
        Json iv;
        iv["start_min"] = json_number(i.start_min);
        iv["end_min"] = json_number(i.end_min);
        intervals.push_back(std::move(iv));
    }
    Json j;
    j["dr"] = to_json(s.dr);
    j["non_dr"] = to_json(s.non_dr);
    j["total"] = to_json(s.total);
    j["dr_intervals"] = std::move(intervals);
    return j;
}

RunSummary summary_from_json(const Json& j) {
    require_object(j, "summary");
    RunSummary s;
    s.dr = period_from_json(member(j, "dr", "summary"), "summary.dr");
    s.non_dr = period_from_json(member(j, "non_dr", "summary"), "summary.non_dr");
    s.total = period_from_json(member(j, "total", "summary"), "summary.total");
    for (const auto& iv : member(j, "dr_intervals", "summary")) {
        s.dr_intervals.push_back(
            {number_field(iv, "start_min", "summary.dr_intervals"), number_field(iv, "end_min", "summary.dr_intervals")});
    }
    return s;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::pair<MessageType, std::string_view> kMessageNames[] = {
    {MessageType::configure, "configure"},
    {MessageType::start, "start"},
    {MessageType::pause, "pause"},
    {MessageType::resume, "resume"},
    {MessageType::set_speed, "set_speed"},
    {MessageType::override_command, "override"},
    {MessageType::reset, "reset"},
    {MessageType::ack, "ack"},
    {MessageType::error, "error"},
    {MessageType::telemetry, "telemetry"},
    {MessageType::summary, "summary"},
    {MessageType::phase, "phase"},
};

}  // namespace

std::string_view to_string(MessageType type) noexcept {
    for (const auto& [t, name] : kMessageNames) {
        if (t == type) return name;
    }
    return "unknown";
}

std::optional<MessageType> message_type_from_string(std::string_view name) noexcept {
    for (const auto& [t, n] : kMessageNames) {
        if (n == name) return t;
    }
    return std::nullopt;
}

bool is_client_message(MessageType type) noexcept {
    return static_cast<int>(type) <= static_cast<int>(MessageType::reset);
}

std::string encode(const WireMessage& msg) {
    Json j;
    j["type"] = std::string(to_string(msg.type));
    if (!msg.req.is_null()) j["req"] = msg.req;
    if (msg.body.is_object()) {
        for (const auto& [key, value] : msg.body.items()) j[key] = value;
    }
    return j.dump();
}

WireMessage decode(std::string_view text, Json* salvage_req) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::parse_error, "malformed JSON at byte " + std::to_string(e.byte));
    }
    if (!j.is_object()) throw Error(ErrorCode::parse_error, "message must be a JSON object");

    WireMessage msg;
    if (const auto it = j.find("req"); it != j.end()) {
        if (!it->is_string() && !it->is_number())
            throw Error(ErrorCode::parse_error, "req must be a string or a number");
        msg.req = *it;
        if (salvage_req) *salvage_req = *it;
    }
    const auto type_it = j.find("type");
    if (type_it == j.end() || !type_it->is_string()) throw Error(ErrorCode::parse_error, "missing message type");
    const auto type = message_type_from_string(type_it->get<std::string>());
    if (!type) throw Error(ErrorCode::parse_error, "unknown message type '" + type_it->get<std::string>() + "'");
    msg.type = *type;
    for (const auto& [key, value] : j.items()) {
        if (key != "type" && key != "req") msg.body[key] = value;
    }
    return msg;
}

WireMessage make_ack(const Json& req) {
    return {MessageType::ack, req, Json::object()};
}

WireMessage make_error(const Json& req, std::string_view code, std::string_view message) {
    WireMessage msg{MessageType::error, req, Json::object()};
    msg.body["code"] = std::string(code);
    msg.body["message"] = std::string(message);
    return msg;
}

WireMessage make_telemetry(const TelemetryFrame& frame) {
    WireMessage msg{MessageType::telemetry, nullptr, Json::object()};
    msg.body["frame"] = to_json(frame);
    return msg;
}

WireMessage make_summary(const RunSummary& summary) {
    WireMessage msg{MessageType::summary, nullptr, Json::object()};
    msg.body["summary"] = to_json(summary);
    return msg;
}

WireMessage make_phase(std::string_view phase) {
    WireMessage msg{MessageType::phase, nullptr, Json::object()};
    msg.body["phase"] = std::string(phase);
    return msg;
}

}  // namespace flexlab
