#pragma once

#include <chrono>

namespace flexlab {

enum class PaceCommand { pause, resume, set_speed };

/// Wall-clock pacing for live runs. Pacing only decides when the next tick
/// is emitted; it never touches simulation values.
class Pacer {
public:
    /// speed is in simulated minutes per wall-clock second.
    /// Throws Error(validation) unless speed > 0 and dt_s > 0.
    Pacer(double speed_min_per_s, double dt_s);

    void pause() noexcept { paused_ = true; }
    void resume() noexcept { paused_ = false; }
    /// Throws Error(validation, "speed must be positive") for speed <= 0.
    void set_speed(double speed_min_per_s);
    void apply(PaceCommand cmd, double speed_min_per_s = 0.0);

    bool paused() const noexcept { return paused_; }
    double speed() const noexcept { return speed_; }
    double ticks_per_second() const noexcept;
    std::chrono::nanoseconds tick_interval() const;

private:
    double speed_;
    double dt_s_;
    bool paused_ = false;
};

}  // namespace flexlab
