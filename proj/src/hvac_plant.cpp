#include "flexlab/hvac_plant.hpp"

#include "flexlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flexlab {

std::string_view to_string(SystemMode mode) noexcept {
    switch (mode) {
    case SystemMode::off: return "off";
    case SystemMode::cooling: return "cooling";
    case SystemMode::heating: return "heating";
    }
    return "off";
}

SystemMode system_mode_from_string(std::string_view name) {
    if (name == "off") return SystemMode::off;
    if (name == "cooling") return SystemMode::cooling;
    if (name == "heating") return SystemMode::heating;
    throw Error(ErrorCode::parse_error, "unknown system mode '" + std::string(name) + "'");
}

std::string_view to_string(HeatPumpKind kind) noexcept {
    return kind == HeatPumpKind::air_source ? "air_source" : "ground_source";
}

HeatPumpKind heat_pump_kind_from_string(std::string_view name) {
    if (name == "air_source") return HeatPumpKind::air_source;
    if (name == "ground_source") return HeatPumpKind::ground_source;
    throw Error(ErrorCode::parse_error, "unknown heat pump kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

std::vector<std::string> PiParams::violations(const std::string& path) const {
    std::vector<std::string> out;
    if (!std::isfinite(kp) || kp < 0.0) out.push_back(path + ".kp: must be >= 0");
    if (!std::isfinite(ki) || ki < 0.0) out.push_back(path + ".ki: must be >= 0");
    if (!std::isfinite(out_min) || !std::isfinite(out_max) || !(out_min < out_max))
        out.push_back(path + ".out_min: must be < out_max");
    return out;
}

PiResult pi_update(const PiParams& params, const PiState& state, double error_k, double dt_s) {
    if (!std::isfinite(error_k)) throw Error(ErrorCode::invalid_input, "pi_update: non-finite error");
    if (!(dt_s > 0.0) || !std::isfinite(dt_s)) throw Error(ErrorCode::invalid_input, "pi_update: dt_s must be > 0");

    const double p_term = params.kp * error_k;
    if (params.ki == 0.0) {
        return {state, std::clamp(p_term, params.out_min, params.out_max)};
    }

    const double integrated = state.integral + error_k * dt_s;
    const double candidate = p_term + params.ki * integrated;
    if (candidate > params.out_max) {
        const double back = (params.out_max - p_term) / params.ki;
        // Pushing further up: the integral may shrink, never grow.
        const double integral = error_k > 0.0 ? std::min(back, state.integral) : back;
        return {{integral}, params.out_max};
    }
    if (candidate < params.out_min) {
        const double back = (params.out_min - p_term) / params.ki;
        const double integral = error_k < 0.0 ? std::max(back, state.integral) : back;
        return {{integral}, params.out_min};
    }
    return {{integrated}, candidate};
}

// ---------------------------------------------------------------------------

std::vector<std::string> VavParams::violations(const std::string& path) const {
    std::vector<std::string> out;
    if (!std::isfinite(airflow_min_kg_s) || airflow_min_kg_s < 0.0)
        out.push_back(path + ".airflow_min_kg_s: must be >= 0");
    if (!std::isfinite(airflow_max_kg_s) || !(airflow_min_kg_s < airflow_max_kg_s))
        out.push_back(path + ".airflow_max_kg_s: must be > airflow_min_kg_s");
    if (!std::isfinite(supply_cool_c) || !std::isfinite(supply_heat_c) || !(supply_cool_c < supply_heat_c))
        out.push_back(path + ".supply_cool_c: must be < supply_heat_c");
    if (!std::isfinite(cp_j_per_kg_k) || cp_j_per_kg_k <= 0.0) out.push_back(path + ".cp_j_per_kg_k: must be > 0");
    return out;
}

VavResult vav_demand(const VavParams& params, double output, double zone_temp_c, SystemMode mode) {
    if (mode == SystemMode::off) return {};
    if (!std::isfinite(output) || !std::isfinite(zone_temp_c))
        throw Error(ErrorCode::invalid_input, "vav_demand: non-finite input");
    const double u = std::clamp(output, 0.0, 1.0);
    const double airflow = params.airflow_min_kg_s + u * (params.airflow_max_kg_s - params.airflow_min_kg_s);
    const double supply = mode == SystemMode::cooling ? params.supply_cool_c : params.supply_heat_c;
    return {airflow, airflow * params.cp_j_per_kg_k * (supply - zone_temp_c)};
}

// ---------------------------------------------------------------------------

std::vector<std::string> HeatPumpParams::violations(const std::string& path) const {
    std::vector<std::string> out;
    if (id.empty()) out.push_back(path + ".id: must not be empty");
    if (!std::isfinite(capacity_w) || capacity_w <= 0.0) out.push_back(path + ".capacity_w: must be > 0");
    if (!std::isfinite(cop_a) || !std::isfinite(cop_b)) out.push_back(path + ".cop_a: COP coefficients must be finite");
    if (!std::isfinite(cop_min) || cop_min < 1.0) out.push_back(path + ".cop_min: must be >= 1");
    if (!std::isfinite(ground_temp_c)) out.push_back(path + ".ground_temp_c: must be finite");
    return out;
}

double cop(const HeatPumpParams& unit, double source_temp_c, SystemMode mode) {
    if (!std::isfinite(source_temp_c)) throw Error(ErrorCode::invalid_input, "cop: non-finite source temperature");
    const double linear = mode == SystemMode::heating ? unit.cop_a + unit.cop_b * source_temp_c
                                                      : unit.cop_a - unit.cop_b * source_temp_c;
    return std::max(unit.cop_min, linear);
}

double source_temperature(const HeatPumpParams& unit, double outdoor_c) {
    return unit.kind == HeatPumpKind::ground_source ? unit.ground_temp_c : outdoor_c;
}

DispatchResult dispatch(std::span<const HeatPumpParams> units, double demand_w, double outdoor_c, SystemMode mode) {
    if (!std::isfinite(demand_w) || demand_w < 0.0)
        throw Error(ErrorCode::invalid_input, "dispatch: demand must be finite and >= 0");

    std::vector<std::size_t> order(units.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const bool ga = units[a].kind == HeatPumpKind::ground_source;
        const bool gb = units[b].kind == HeatPumpKind::ground_source;
        if (ga != gb) return ga;
        return units[a].id < units[b].id;
    });

    DispatchResult result;
    result.units.resize(units.size());
    double remaining = demand_w;
    for (const auto i : order) {
        const auto& unit = units[i];
        auto& out = result.units[i];
        out.cop = cop(unit, source_temperature(unit, outdoor_c), mode);
        out.thermal_w = std::min(remaining, unit.capacity_w);
        out.electrical_w = out.thermal_w / out.cop;
        remaining -= out.thermal_w;
    }
    result.unmet_w = remaining;
    return result;
}

// ---------------------------------------------------------------------------

std::vector<std::string> PlantParams::violations(const std::string& path) const {
    auto out = pi.violations(path + ".pi");
    for (std::size_t i = 0; i < vavs.size(); ++i) {
        auto v = vavs[i].violations(path + ".vav[" + std::to_string(i) + "]");
        out.insert(out.end(), v.begin(), v.end());
    }
    if (heat_pumps.empty()) out.push_back(path + ".heat_pumps: at least one unit required");
    for (std::size_t i = 0; i < heat_pumps.size(); ++i) {
        auto v = heat_pumps[i].violations(path + ".heat_pumps[" + std::to_string(i) + "]");
        out.insert(out.end(), v.begin(), v.end());
        for (std::size_t j = 0; j < i; ++j) {
            if (heat_pumps[j].id == heat_pumps[i].id)
                out.push_back(path + ".heat_pumps[" + std::to_string(i) + "].id: duplicate id '" + heat_pumps[i].id + "'");
        }
    }
    if (!std::isfinite(aux_power_w) || aux_power_w < 0.0) out.push_back(path + ".aux_power_w: must be >= 0");
    return out;
}

PlantParams default_plant(std::span<const std::string> zone_ids) {
    PlantParams plant;
    for (const auto& id : zone_ids) {
        VavParams vav;
        vav.zone_id = id;
        plant.vavs.push_back(vav);
    }
    plant.heat_pumps = {
        {"gshp1", HeatPumpKind::ground_source, 25000.0, 6.0, 0.1, 1.5, 18.0},
        {"gshp2", HeatPumpKind::ground_source, 25000.0, 6.0, 0.1, 1.5, 18.0},
        {"ashp", HeatPumpKind::air_source, 40000.0, 6.0, 0.1, 1.5, 18.0},
    };
    return plant;
}

PlantState initial_plant_state(const PlantParams& params) {
    PlantState state;
    state.pi.assign(params.vavs.size(), PiState{});
    state.pi_output.assign(params.vavs.size(), 0.0);
    state.airflow_kg_s.assign(params.vavs.size(), 0.0);
    state.units.assign(params.heat_pumps.size(), UnitOutput{});
    return state;
}

PlantStepResult plant_step(const PlantParams& params, const PlantState& state, std::span<const double> errors_k,
                           std::span<const double> zone_temps_c, SystemMode mode, double outdoor_c, double dt_s) {
    const std::size_t n = params.vavs.size();
    if (errors_k.size() != n || zone_temps_c.size() != n || state.pi.size() != n)
        throw Error(ErrorCode::invalid_input, "plant_step: zone count mismatch");

    PlantStepResult result;
    result.state = state;
    result.state.mode = mode;
    result.q_hvac_w.assign(n, 0.0);
    result.state.units.assign(params.heat_pumps.size(), UnitOutput{});
    result.state.unmet_w = 0.0;

    if (mode == SystemMode::off) {
        std::fill(result.state.pi_output.begin(), result.state.pi_output.end(), 0.0);
        std::fill(result.state.airflow_kg_s.begin(), result.state.airflow_kg_s.end(), 0.0);
        return result;
    }

    // A different active mode means a different error definition; start the
    // loops fresh.
    if (mode != state.mode) std::fill(result.state.pi.begin(), result.state.pi.end(), PiState{});

    double coil_demand_w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto pi = pi_update(params.pi, result.state.pi[i], errors_k[i], dt_s);
        const auto vav = vav_demand(params.vavs[i], pi.output, zone_temps_c[i], mode);
        result.state.pi[i] = pi.state;
        result.state.pi_output[i] = pi.output;
        result.state.airflow_kg_s[i] = vav.airflow_kg_s;
        result.q_hvac_w[i] = vav.q_hvac_w;
        coil_demand_w += std::abs(vav.q_hvac_w);
    }

    auto dispatched = dispatch(params.heat_pumps, coil_demand_w, outdoor_c, mode);
    double electrical = 0.0;
    for (const auto& u : dispatched.units) electrical += u.electrical_w;
    result.state.units = std::move(dispatched.units);
    result.state.unmet_w = dispatched.unmet_w;
    result.electrical_w = electrical + params.aux_power_w;
    return result;
}

}  // namespace flexlab
