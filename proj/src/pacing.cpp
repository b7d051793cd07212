#include "flexlab/pacing.hpp"

#include "flexlab/error.hpp"

#include <cmath>

namespace flexlab {

Pacer::Pacer(double speed_min_per_s, double dt_s) : speed_(1.0), dt_s_(dt_s) {
    if (!(dt_s > 0.0) || !std::isfinite(dt_s)) throw Error(ErrorCode::validation, "dt_s must be positive");
    set_speed(speed_min_per_s);
}

void Pacer::set_speed(double speed_min_per_s) {
    if (!(speed_min_per_s > 0.0) || !std::isfinite(speed_min_per_s))
        throw Error(ErrorCode::validation, "speed must be positive");
    speed_ = speed_min_per_s;
}

void Pacer::apply(PaceCommand cmd, double speed_min_per_s) {
    switch (cmd) {
    case PaceCommand::pause: pause(); break;
    case PaceCommand::resume: resume(); break;
    case PaceCommand::set_speed: set_speed(speed_min_per_s); break;
    }
}

double Pacer::ticks_per_second() const noexcept {
    return speed_ / (dt_s_ / 60.0);
}

std::chrono::nanoseconds Pacer::tick_interval() const {
    return std::chrono::nanoseconds(static_cast<std::int64_t>(std::llround(1e9 / ticks_per_second())));
}

}  // namespace flexlab
