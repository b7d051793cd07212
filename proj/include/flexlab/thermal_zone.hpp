#pragma once

#include <string>
#include <vector>

namespace flexlab {

/// Lumped 1R1C parameters for one zone.
struct ZoneParams {
    std::string id;
    double capacitance_j_per_k = 2.0e7;
    double ua_w_per_k = 800.0;
    double internal_gain_w = 2000.0;        // occupied
    double internal_gain_unocc_w = 500.0;
    double solar_aperture_m2 = 4.0;         // gain = aperture * irradiance

    /// Field-path-prefixed invariant violations; empty when valid.
    std::vector<std::string> violations(const std::string& path = "zone") const;
};

struct ZoneState {
    double temp_c = 0.0;

    bool operator==(const ZoneState&) const = default;
};

struct WeatherSample {
    double t_min = 0.0;
    double t_out_c = 0.0;
    double solar_w_m2 = 0.0;

    bool operator==(const WeatherSample&) const = default;
};

inline constexpr double kGuardRailMinC = -20.0;
inline constexpr double kGuardRailMaxC = 60.0;

/// Net heat rate into the zone air in W. Throws Error(invalid_input) on any
/// non-finite input.
double zone_heat_balance(const ZoneParams& params, const ZoneState& state,
                         const WeatherSample& weather, double q_hvac_w, bool occupied);

/// One explicit-Euler step. Throws ModelDivergence when the result leaves
/// [kGuardRailMinC, kGuardRailMaxC].
ZoneState step_zone(const ZoneParams& params, const ZoneState& state,
                    const WeatherSample& weather, double q_hvac_w, bool occupied,
                    double dt_s);

}  // namespace flexlab
