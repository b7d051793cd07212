#pragma once

#include "flexlab/thermal_zone.hpp"

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace flexlab {

/// Ordered weather samples with linear interpolation in time. Queries before
/// the first or after the last sample clamp to that sample.
class WeatherSeries {
public:
    WeatherSeries() = default;
    /// Throws ValidationError unless samples are non-empty, finite, strictly
    /// increasing in t_min and within [0, 1440).
    explicit WeatherSeries(std::vector<WeatherSample> samples);

    WeatherSample at(double t_min) const;

    std::span<const WeatherSample> samples() const noexcept { return samples_; }
    bool empty() const noexcept { return samples_.empty(); }

private:
    std::vector<WeatherSample> samples_;
};

/// Parses `minute,t_out_c,solar_w_m2` CSV text. Every problem found is
/// reported with its line number in one ValidationError.
WeatherSeries parse_weather_csv(std::string_view text);

/// Throws Error(io_error) when the file cannot be read.
WeatherSeries load_weather_csv(const std::filesystem::path& path);

std::string format_weather_csv(const WeatherSeries& series);

/// Synthetic hot design day: outdoor temperature follows a half cosine from
/// 20 C at 05:00 up to 34 C at 15:00 and a second half cosine back down; the
/// irradiance is a half sine between 06:00 and 18:00 peaking at 800 W/m2.
WeatherSeries synthetic_hot_day(double step_min = 15.0);

}  // namespace flexlab
