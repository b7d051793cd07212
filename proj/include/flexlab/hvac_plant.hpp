#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flexlab {

enum class SystemMode { off, cooling, heating };

std::string_view to_string(SystemMode mode) noexcept;
/// Throws Error(parse_error) on an unknown name.
SystemMode system_mode_from_string(std::string_view name);

// ---------------------------------------------------------------------------
// PI control

struct PiParams {
    double kp = 1.0;      // per K
    double ki = 5.0e-4;   // per K.s
    double out_min = 0.0;
    double out_max = 1.0;

    std::vector<std::string> violations(const std::string& path = "pi") const;
};

struct PiState {
    double integral = 0.0;  // K.s

    bool operator==(const PiState&) const = default;
};

struct PiResult {
    PiState state;
    double output = 0.0;
};

/// One PI step with anti-windup.
///
/// The candidate output is kp*e + ki*(integral + e*dt). Inside the bounds
/// the integral simply accumulates. When the candidate saturates, the output
/// is the bound and the integral is back-calculated to the value that puts
/// kp*e + ki*integral exactly on the bound, except that while the error
/// pushes further into the saturated bound the integral is never moved in
/// the error's direction (it keeps its previous value if that is already
/// inside the bounds). With ki == 0 the integral is left untouched.
///
/// Throws Error(invalid_input) for a non-finite error or dt <= 0.
PiResult pi_update(const PiParams& params, const PiState& state, double error_k, double dt_s);

// ---------------------------------------------------------------------------
// VAV terminal

struct VavParams {
    std::string zone_id;
    double airflow_min_kg_s = 0.1;
    double airflow_max_kg_s = 1.5;
    double supply_cool_c = 13.0;
    double supply_heat_c = 35.0;
    double cp_j_per_kg_k = 1006.0;

    std::vector<std::string> violations(const std::string& path = "vav") const;
};

struct VavResult {
    double airflow_kg_s = 0.0;
    double q_hvac_w = 0.0;  // signed, positive heats the zone
};

VavResult vav_demand(const VavParams& params, double output, double zone_temp_c, SystemMode mode);

// ---------------------------------------------------------------------------
// Heat pumps

enum class HeatPumpKind { air_source, ground_source };

std::string_view to_string(HeatPumpKind kind) noexcept;
HeatPumpKind heat_pump_kind_from_string(std::string_view name);

struct HeatPumpParams {
    std::string id;
    HeatPumpKind kind = HeatPumpKind::ground_source;
    double capacity_w = 25000.0;
    double cop_a = 6.0;
    double cop_b = 0.1;        // per K of source temperature
    double cop_min = 1.5;
    double ground_temp_c = 18.0;

    std::vector<std::string> violations(const std::string& path = "heat_pump") const;
};

/// Linear COP in source temperature with a floor: cop_a - cop_b*T for
/// cooling, cop_a + cop_b*T for heating.
double cop(const HeatPumpParams& unit, double source_temp_c, SystemMode mode = SystemMode::cooling);

/// Source temperature seen by a unit: the fixed ground temperature for
/// ground-source units, the outdoor air otherwise.
double source_temperature(const HeatPumpParams& unit, double outdoor_c);

struct UnitOutput {
    double thermal_w = 0.0;
    double electrical_w = 0.0;
    double cop = 0.0;

    bool operator==(const UnitOutput&) const = default;
};

struct DispatchResult {
    std::vector<UnitOutput> units;  // same order as the input list
    double unmet_w = 0.0;
};

/// Ground-source units are filled first in id order, then air-source units
/// in id order. Load above the combined capacity is returned as unmet.
DispatchResult dispatch(std::span<const HeatPumpParams> units, double demand_w, double outdoor_c,
                        SystemMode mode = SystemMode::cooling);

// ---------------------------------------------------------------------------
// Plant composition

struct PlantParams {
    PiParams pi;
    std::vector<VavParams> vavs;  // one per zone, same order as the zones
    std::vector<HeatPumpParams> heat_pumps;
    double aux_power_w = 2000.0;  // fans and pumps while the system is on

    std::vector<std::string> violations(const std::string& path = "plant") const;
};

/// Default three-unit plant: two 25 kW ground-source units and one 40 kW
/// air-source unit, with one VAV box per zone id.
PlantParams default_plant(std::span<const std::string> zone_ids);

struct PlantState {
    std::vector<PiState> pi;
    std::vector<double> pi_output;
    std::vector<double> airflow_kg_s;
    std::vector<UnitOutput> units;
    double unmet_w = 0.0;
    SystemMode mode = SystemMode::off;

    bool operator==(const PlantState&) const = default;
};

PlantState initial_plant_state(const PlantParams& params);

struct PlantStepResult {
    PlantState state;
    std::vector<double> q_hvac_w;
    double electrical_w = 0.0;  // heat pumps plus auxiliary
};

/// Runs pi_update and vav_demand per zone, sums |q| into the coil demand and
/// dispatches it. `errors_k` are the signed tracking errors fed to the PI
/// loops (positive means more conditioning is needed). With mode off every
/// PI state is frozen and all outputs are zero.
PlantStepResult plant_step(const PlantParams& params, const PlantState& state,
                           std::span<const double> errors_k, std::span<const double> zone_temps_c,
                           SystemMode mode, double outdoor_c, double dt_s);

}  // namespace flexlab
