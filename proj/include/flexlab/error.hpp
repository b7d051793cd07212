#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flexlab {

enum class ErrorCode {
    invalid_input,
    validation,
    model_divergence,
    not_running,
    parse_error,
    io_error,
    run_incomplete,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for everything the simulator reports. The code is stable
/// and machine-readable; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// A list of invariant violations, each prefixed with a field path such as
/// `zones[2].ua_w_per_k`.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Zone temperature left the guard-rail band. `tick` is -1 until the engine
/// attaches the tick context.
class ModelDivergence : public Error {
public:
    ModelDivergence(std::string zone_id, double temp_c, std::int64_t tick = -1);

    const std::string& zone_id() const noexcept { return zone_id_; }
    double temp_c() const noexcept { return temp_c_; }
    std::int64_t tick() const noexcept { return tick_; }

    ModelDivergence with_tick(std::int64_t tick) const {
        return ModelDivergence(zone_id_, temp_c_, tick);
    }

private:
    std::string zone_id_;
    double temp_c_;
    std::int64_t tick_;
};

}  // namespace flexlab
