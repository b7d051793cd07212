#include "flexlab/error.hpp"

#include <sstream>

namespace flexlab {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::validation: return "validation";
    case ErrorCode::model_divergence: return "model_divergence";
    case ErrorCode::not_running: return "not_running";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::run_incomplete: return "run_incomplete";
    }
    return "unknown";
}

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v;
    }
    return out;
}

std::string divergence_message(const std::string& zone_id, double temp_c, std::int64_t tick) {
    std::ostringstream os;
    os << "zone '" << zone_id << "' temperature " << temp_c << " C left the guard rail";
    if (tick >= 0) os << " at tick " << tick;
    return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(ErrorCode::validation, join_violations(violations)), violations_(std::move(violations)) {}

ModelDivergence::ModelDivergence(std::string zone_id, double temp_c, std::int64_t tick)
    : Error(ErrorCode::model_divergence, divergence_message(zone_id, temp_c, tick)),
      zone_id_(std::move(zone_id)),
      temp_c_(temp_c),
      tick_(tick) {}

}  // namespace flexlab
