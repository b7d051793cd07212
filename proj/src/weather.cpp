#include "flexlab/weather.hpp"

#include "flexlab/error.hpp"
#include "flexlab/export.hpp"
#include "flexlab/supervisory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

namespace flexlab {

namespace {

constexpr std::string_view kWeatherHeader = "minute,t_out_c,solar_w_m2";

std::vector<std::string> sample_violations(const std::vector<WeatherSample>& samples) {
    std::vector<std::string> out;
    if (samples.empty()) out.emplace_back("weather: no samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const std::string path = "weather[" + std::to_string(i) + "]";
        if (!std::isfinite(s.t_min) || !std::isfinite(s.t_out_c) || !std::isfinite(s.solar_w_m2)) {
            out.push_back(path + ": non-finite value");
            continue;
        }
        if (s.t_min < 0.0 || s.t_min >= kDayMinutes) out.push_back(path + ".t_min: must lie in [0, 1440)");
        if (s.solar_w_m2 < 0.0) out.push_back(path + ".solar_w_m2: must be >= 0");
        if (i > 0 && !(s.t_min > samples[i - 1].t_min))
            out.push_back(path + ".t_min: not strictly increasing");
    }
    return out;
}

std::optional<double> parse_double(std::string_view field) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    if (field.empty()) return std::nullopt;
    if (field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

}  // namespace

WeatherSeries::WeatherSeries(std::vector<WeatherSample> samples) : samples_(std::move(samples)) {
    auto violations = sample_violations(samples_);
    if (!violations.empty()) throw ValidationError(std::move(violations));
}

WeatherSample WeatherSeries::at(double t_min) const {
    if (samples_.empty()) throw Error(ErrorCode::invalid_input, "weather series is empty");
    if (t_min <= samples_.front().t_min) return {t_min, samples_.front().t_out_c, samples_.front().solar_w_m2};
    if (t_min >= samples_.back().t_min) return {t_min, samples_.back().t_out_c, samples_.back().solar_w_m2};
    const auto hi = std::upper_bound(samples_.begin(), samples_.end(), t_min,
                                     [](double t, const WeatherSample& s) { return t < s.t_min; });
    const auto lo = hi - 1;
    const double w = (t_min - lo->t_min) / (hi->t_min - lo->t_min);
    return {t_min, lo->t_out_c + w * (hi->t_out_c - lo->t_out_c),
            lo->solar_w_m2 + w * (hi->solar_w_m2 - lo->solar_w_m2)};
}

WeatherSeries parse_weather_csv(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    std::vector<std::string> problems;
    std::vector<WeatherSample> samples;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!header_seen) {
            header_seen = true;
            if (line != kWeatherHeader)
                problems.push_back("weather line 1: expected header '" + std::string(kWeatherHeader) + "'");
            continue;
        }
        if (line.empty()) continue;
        const std::string where = "weather line " + std::to_string(line_no);
        std::vector<std::string_view> fields;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (fields.size() != 3) {
            problems.push_back(where + ": expected 3 fields, got " + std::to_string(fields.size()));
            continue;
        }
        const auto minute = parse_double(fields[0]);
        const auto t_out = parse_double(fields[1]);
        const auto solar = parse_double(fields[2]);
        if (!minute || !t_out || !solar) {
            problems.push_back(where + ": unparsable number");
            continue;
        }
        if (!std::isfinite(*minute) || !std::isfinite(*t_out) || !std::isfinite(*solar)) {
            problems.push_back(where + ": non-finite value");
            continue;
        }
        if (*minute < 0.0 || *minute >= kDayMinutes) problems.push_back(where + ": minute outside [0, 1440)");
        if (*solar < 0.0) problems.push_back(where + ": solar_w_m2 must be >= 0");
        if (!samples.empty()) {
            if (*minute == samples.back().t_min)
                problems.push_back(where + ": duplicate minute " + format_number(*minute));
            else if (*minute < samples.back().t_min)
                problems.push_back(where + ": minute " + format_number(*minute) + " out of order (previous " +
                                   format_number(samples.back().t_min) + ")");
        }
        samples.push_back({*minute, *t_out, *solar});
    }
    if (!header_seen) problems.emplace_back("weather: empty document");
    else if (samples.empty() && problems.empty()) problems.emplace_back("weather: no samples");
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return WeatherSeries(std::move(samples));
}

WeatherSeries load_weather_csv(const std::filesystem::path& path) {
    return parse_weather_csv(read_file(path));
}

std::string format_weather_csv(const WeatherSeries& series) {
    std::string out(kWeatherHeader);
    out += '\n';
    for (const auto& s : series.samples()) {
        out += format_number(s.t_min) + ',' + format_number(s.t_out_c) + ',' + format_number(s.solar_w_m2) + '\n';
    }
    return out;
}

WeatherSeries synthetic_hot_day(double step_min) {
    constexpr double t_min_c = 20.0;
    constexpr double t_max_c = 34.0;
    constexpr double amp = (t_max_c - t_min_c) / 2.0;
    constexpr double pi = std::numbers::pi;
    std::vector<WeatherSample> samples;
    for (double t = 0.0; t < kDayMinutes; t += step_min) {
        const double h = t / 60.0;
        double t_out = 0.0;
        if (h >= 5.0 && h <= 15.0) {
            t_out = t_min_c + amp * (1.0 - std::cos(pi * (h - 5.0) / 10.0));
        } else {
            const double since_peak = std::fmod(h - 15.0 + 24.0, 24.0);
            t_out = t_max_c - amp * (1.0 - std::cos(pi * since_peak / 14.0));
        }
        const double solar = (h > 6.0 && h < 18.0) ? 800.0 * std::sin(pi * (h - 6.0) / 12.0) : 0.0;
        // Round to centi-units so the bundled CSV stays readable.
        samples.push_back({t, std::round(t_out * 100.0) / 100.0, std::round(solar * 10.0) / 10.0});
    }
    return WeatherSeries(std::move(samples));
}

}  // namespace flexlab
