#include "flexlab/thermal_zone.hpp"

#include "flexlab/error.hpp"

#include <cmath>

namespace flexlab {

std::vector<std::string> ZoneParams::violations(const std::string& path) const {
    std::vector<std::string> out;
    auto finite = [](double v) { return std::isfinite(v); };
    if (id.empty()) out.push_back(path + ".id: must not be empty");
    if (!finite(capacitance_j_per_k) || capacitance_j_per_k <= 0.0)
        out.push_back(path + ".capacitance_j_per_k: must be > 0");
    if (!finite(ua_w_per_k) || ua_w_per_k <= 0.0) out.push_back(path + ".ua_w_per_k: must be > 0");
    if (!finite(internal_gain_unocc_w) || internal_gain_unocc_w < 0.0)
        out.push_back(path + ".internal_gain_unocc_w: must be >= 0");
    if (!finite(internal_gain_w) || internal_gain_w < internal_gain_unocc_w)
        out.push_back(path + ".internal_gain_w: must be >= internal_gain_unocc_w");
    if (!finite(solar_aperture_m2) || solar_aperture_m2 < 0.0)
        out.push_back(path + ".solar_aperture_m2: must be >= 0");
    return out;
}

double zone_heat_balance(const ZoneParams& params, const ZoneState& state, const WeatherSample& weather,
                         double q_hvac_w, bool occupied) {
    if (!std::isfinite(state.temp_c) || !std::isfinite(weather.t_out_c) || !std::isfinite(weather.solar_w_m2) ||
        !std::isfinite(q_hvac_w)) {
        throw Error(ErrorCode::invalid_input, "zone '" + params.id + "': non-finite heat balance input");
    }
    const double gains = occupied ? params.internal_gain_w : params.internal_gain_unocc_w;
    return params.ua_w_per_k * (weather.t_out_c - state.temp_c) + gains +
           params.solar_aperture_m2 * weather.solar_w_m2 + q_hvac_w;
}

ZoneState step_zone(const ZoneParams& params, const ZoneState& state, const WeatherSample& weather,
                    double q_hvac_w, bool occupied, double dt_s) {
    if (!(dt_s > 0.0) || !std::isfinite(dt_s))
        throw Error(ErrorCode::invalid_input, "step_zone: dt_s must be > 0");
    const double net_w = zone_heat_balance(params, state, weather, q_hvac_w, occupied);
    if (net_w == 0.0) return state;
    const ZoneState next{state.temp_c + dt_s * net_w / params.capacitance_j_per_k};
    if (!std::isfinite(next.temp_c) || next.temp_c < kGuardRailMinC || next.temp_c > kGuardRailMaxC)
        throw ModelDivergence(params.id, next.temp_c);
    return next;
}

}  // namespace flexlab
