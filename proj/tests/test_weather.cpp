#include "flexlab/error.hpp"
#include "flexlab/weather.hpp"
#include "support/paths.hpp"

#include <doctest.h>

#include <algorithm>

using namespace flexlab;

namespace {

bool any_contains(const std::vector<std::string>& v, std::string_view needle) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::vector<std::string> parse_problems(std::string_view text) {
    try {
        parse_weather_csv(text);
    } catch (const ValidationError& e) {
        return e.violations();
    }
    return {};
}

}  // namespace

TEST_CASE("interpolates linearly and clamps outside the samples") {
    WeatherSeries w({{60, 20.0, 0.0}, {120, 26.0, 300.0}});
    CHECK(w.at(90).t_out_c == doctest::Approx(23.0));
    CHECK(w.at(90).solar_w_m2 == doctest::Approx(150.0));
    CHECK(w.at(0).t_out_c == 20.0);
    CHECK(w.at(1439).t_out_c == 26.0);
    CHECK(w.at(120).solar_w_m2 == 300.0);
}

TEST_CASE("csv parse accepts CRLF, BOM and blank lines") {
    const auto w = parse_weather_csv("\xEF\xBB\xBFminute,t_out_c,solar_w_m2\r\n0,20,0\r\n\r\n60,21.5,10\r\n");
    REQUIRE(w.samples().size() == 2);
    CHECK(w.samples()[1].t_out_c == 21.5);
}

TEST_CASE("csv problems are named") {
    CHECK(any_contains(parse_problems("minute,t_out_c,solar_w_m2\n60,20,0\n0,21,0\n"), "out of order"));
    CHECK(any_contains(parse_problems("minute,t_out_c,solar_w_m2\n0,20,0\n0,21,0\n"), "duplicate"));
    CHECK(any_contains(parse_problems("minute,t_out_c,solar_w_m2\n0,abc,0\n"), "line 2"));
    CHECK(any_contains(parse_problems("minute,t_out_c,solar_w_m2\n0,20,-5\n"), "solar"));
    CHECK(any_contains(parse_problems("minute,temp\n0,20\n"), "header"));
    CHECK(!parse_problems("minute,t_out_c,solar_w_m2\n").empty());
}

TEST_CASE("csv format round-trips") {
    const auto w = synthetic_hot_day();
    const auto back = parse_weather_csv(format_weather_csv(w));
    CHECK(std::equal(w.samples().begin(), w.samples().end(), back.samples().begin(), back.samples().end()));
}

TEST_CASE("synthetic hot day shape") {
    const auto w = synthetic_hot_day();
    CHECK(w.at(300).t_out_c == doctest::Approx(20.0));
    CHECK(w.at(900).t_out_c == doctest::Approx(34.0));
    CHECK(w.at(720).solar_w_m2 == doctest::Approx(800.0));
    CHECK(w.at(120).solar_w_m2 == 0.0);
    for (const auto& s : w.samples()) {
        CHECK(s.t_out_c >= 20.0 - 1e-9);
        CHECK(s.t_out_c <= 34.0 + 1e-9);
    }
}

TEST_CASE("bundled weather file is the synthetic day") {
    const auto bundled = load_weather_csv(flexlab::testing::assets_dir() / "hot_day_weather.csv");
    const auto w = synthetic_hot_day();
    CHECK(std::equal(w.samples().begin(), w.samples().end(), bundled.samples().begin(), bundled.samples().end()));
}

TEST_CASE("missing file is an io error") {
    CHECK_THROWS_AS(load_weather_csv("/nonexistent/weather.csv"), Error);
}
