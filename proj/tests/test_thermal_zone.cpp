#include "flexlab/error.hpp"
#include "flexlab/thermal_zone.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace flexlab;
using flexlab::testing::Gen;

namespace {

ZoneParams zone(double ua = 800.0, double gains = 2000.0, double aperture = 4.0) {
    ZoneParams z;
    z.id = "z";
    z.ua_w_per_k = ua;
    z.internal_gain_w = gains;
    z.internal_gain_unocc_w = gains;
    z.solar_aperture_m2 = aperture;
    return z;
}

}  // namespace

TEST_CASE("heat balance hand examples") {
    // 800*(32-24) + 2000 + 0 - 8000
    CHECK(zone_heat_balance(zone(), {24.0}, {0, 32.0, 0.0}, -8000.0, true) == doctest::Approx(400.0).epsilon(1e-12));
    CHECK(zone_heat_balance(zone(800.0, 0.0), {22.0}, {0, 22.0, 0.0}, 0.0, true) == 0.0);
    CHECK(zone_heat_balance(zone(800.0, 1500.0), {22.0}, {0, 22.0, 0.0}, -1500.0, true) == 0.0);
}

TEST_CASE("heat balance uses the unoccupied gain outside occupancy") {
    ZoneParams z = zone();
    z.internal_gain_unocc_w = 500.0;
    CHECK(zone_heat_balance(z, {24.0}, {0, 24.0, 0.0}, 0.0, false) == 500.0);
    CHECK(zone_heat_balance(z, {24.0}, {0, 24.0, 0.0}, 0.0, true) == 2000.0);
}

TEST_CASE("heat balance matches the reference formula on random inputs") {
    Gen g(11);
    for (int i = 0; i < 500; ++i) {
        const double ua = g.uniform(10, 3000), tz = g.uniform(10, 35), to = g.uniform(-10, 40);
        const double gains = g.uniform(0, 5000), ap = g.uniform(0, 20), solar = g.uniform(0, 1000);
        const double q = g.uniform(-50000, 50000);
        const double got = zone_heat_balance(zone(ua, gains, ap), {tz}, {0, to, solar}, q, true);
        const double want = flexlab::testing::heat_balance_ref(ua, tz, to, gains, ap, solar, q);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("heat balance rejects non-finite input") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(zone_heat_balance(zone(), {nan}, {0, 30.0, 0.0}, 0.0, true), Error);
    CHECK_THROWS_AS(zone_heat_balance(zone(), {24.0}, {0, 30.0, 0.0}, INFINITY, true), Error);
}

TEST_CASE("single Euler step") {
    // net 400 W into 2e7 J/K for 60 s
    ZoneParams z = zone();
    const auto next = step_zone(z, {24.0}, {0, 32.0, 0.0}, -8000.0, true, 60.0);
    CHECK(next.temp_c == doctest::Approx(24.0012).epsilon(1e-12));
    CHECK(next.temp_c == doctest::Approx(flexlab::testing::euler_ref(24.0, 400.0, 2e7, 60.0)).epsilon(1e-15));
}

TEST_CASE("zero net heat is a fixed point") {
    ZoneParams z = zone(800.0, 0.0, 0.0);
    const ZoneState s{21.37};
    CHECK(step_zone(z, s, {0, 21.37, 0.0}, 0.0, true, 60.0) == s);
}

TEST_CASE("constant conditions converge to the closed-form steady state") {
    ZoneParams z = zone(800.0, 2000.0, 4.0);
    const WeatherSample w{0, 30.0, 250.0};
    const double q = -6000.0;
    // T_ss = T_out + (gains + solar + q) / UA
    const double t_ss = 30.0 + (2000.0 + 4.0 * 250.0 + q) / 800.0;
    ZoneState s{26.0};
    for (int i = 0; i < 60 * 24 * 20; ++i) s = step_zone(z, s, w, q, true, 60.0);
    CHECK(s.temp_c == doctest::Approx(t_ss).epsilon(1e-9));
}

TEST_CASE("step is monotone in outdoor temperature and linear in q") {
    Gen g(5);
    ZoneParams z = zone();
    for (int i = 0; i < 200; ++i) {
        const double t = g.uniform(15, 30), to = g.uniform(0, 40), q = g.uniform(-20000, 20000);
        const double d = g.uniform(0.1, 5);
        const auto a = step_zone(z, {t}, {0, to, 0.0}, q, true, 60.0).temp_c;
        const auto b = step_zone(z, {t}, {0, to + d, 0.0}, q, true, 60.0).temp_c;
        CHECK(b > a);
        const auto c = step_zone(z, {t}, {0, to, 0.0}, q + 1000.0, true, 60.0).temp_c;
        CHECK(c - a == doctest::Approx(1000.0 * 60.0 / 2e7).epsilon(1e-6));
    }
}

TEST_CASE("leaving the guard rail raises divergence") {
    ZoneParams z = zone();
    z.capacitance_j_per_k = 1.0;
    try {
        step_zone(z, {24.0}, {0, 30.0, 0.0}, 0.0, true, 60.0);
        FAIL("expected divergence");
    } catch (const ModelDivergence& e) {
        CHECK(e.code() == ErrorCode::model_divergence);
        CHECK(e.zone_id() == "z");
        CHECK(e.temp_c() > kGuardRailMaxC);
    }
}

TEST_CASE("zone parameter invariants") {
    ZoneParams z = zone();
    CHECK(z.violations().empty());
    z.capacitance_j_per_k = 0.0;
    z.ua_w_per_k = -1.0;
    const auto v = z.violations("zones[0]");
    REQUIRE(v.size() >= 2);
    CHECK(v[0].starts_with("zones[0]."));
}
