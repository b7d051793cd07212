#pragma once

#include "flexlab/engine.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace flexlab {

using Json = nlohmann::ordered_json;

/// Integral values inside the exact-integer range are written as JSON
/// integers, everything else as shortest round-trip doubles. Keeps encodings
/// stable across decode/encode cycles.
Json json_number(double value);

/// Throws Error(parse_error) with the offending field path.
double number_field(const Json& object, std::string_view key, const std::string& path);

Json to_json(const OverrideCommand& cmd);
OverrideCommand override_from_json(const Json& j, const std::string& path = "command");

Json to_json(const ControlSettings& settings);
Json to_json(const ScenarioScript& script);
ScenarioScript script_from_json(const Json& j);

/// Accepts either a `{"events":[...]}` document or a newline-delimited
/// command log (one `{"t_min":..,"command":..}` object per line).
ScenarioScript parse_script_text(std::string_view text);

std::string format_command_log(std::span<const LedgerEntry> log);

Json to_json(const TelemetryFrame& frame);
TelemetryFrame frame_from_json(const Json& j);

Json to_json(const RunSummary& summary);
RunSummary summary_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Wire protocol

enum class MessageType {
    // client -> server
    configure,
    start,
    pause,
    resume,
    set_speed,
    override_command,
    reset,
    // server -> client
    ack,
    error,
    telemetry,
    summary,
    phase,
};

std::string_view to_string(MessageType type) noexcept;
std::optional<MessageType> message_type_from_string(std::string_view name) noexcept;
bool is_client_message(MessageType type) noexcept;

/// A tagged message. `req` is the client-supplied request id (string or
/// number) and is null when absent. `body` holds the type-specific fields in
/// the order they were built or received.
struct WireMessage {
    MessageType type = MessageType::ack;
    Json req;
    Json body = Json::object();

    bool operator==(const WireMessage&) const = default;
};

/// Canonical encoding: `type`, then `req` when present, then body fields.
std::string encode(const WireMessage& msg);

/// Throws Error(parse_error); the message carries the byte position for
/// malformed JSON. When the text parses but the message is unusable,
/// `salvage_req` (if given) receives whatever request id could be read.
WireMessage decode(std::string_view text, Json* salvage_req = nullptr);

WireMessage make_ack(const Json& req);
WireMessage make_error(const Json& req, std::string_view code, std::string_view message);
WireMessage make_telemetry(const TelemetryFrame& frame);
WireMessage make_summary(const RunSummary& summary);
WireMessage make_phase(std::string_view phase);

}  // namespace flexlab
