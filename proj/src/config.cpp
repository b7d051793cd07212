#include "flexlab/config.hpp"

#include "flexlab/error.hpp"
#include "flexlab/export.hpp"

#include <algorithm>

namespace flexlab {

namespace {

/// Reads optional typed fields, recording type problems instead of throwing.
class Reader {
public:
    static std::string field(const std::string& path, const char* key) {
        return path.empty() ? std::string(key) : path + "." + key;
    }

    explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

    void number(const Json& obj, const char* key, const std::string& path, double& out) {
        const auto it = obj.find(key);
        if (it == obj.end()) return;
        if (!it->is_number()) {
            problems_.push_back(field(path, key) + ": expected a number");
            return;
        }
        out = it->get<double>();
    }

    void string(const Json& obj, const char* key, const std::string& path, std::string& out) {
        const auto it = obj.find(key);
        if (it == obj.end()) return;
        if (!it->is_string()) {
            problems_.push_back(field(path, key) + ": expected a string");
            return;
        }
        out = it->get<std::string>();
    }

    const Json* object(const Json& obj, const char* key, const std::string& path, bool required) {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) problems_.push_back(field(path, key) + ": missing section");
            return nullptr;
        }
        if (!it->is_object()) {
            problems_.push_back(field(path, key) + ": expected an object");
            return nullptr;
        }
        return &*it;
    }

    const Json* array(const Json& obj, const char* key, const std::string& path, bool required) {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) problems_.push_back(field(path, key) + ": missing section");
            return nullptr;
        }
        if (!it->is_array()) {
            problems_.push_back(field(path, key) + ": expected an array");
            return nullptr;
        }
        return &*it;
    }

    void add(std::string problem) { problems_.push_back(std::move(problem)); }

private:
    std::vector<std::string>& problems_;
};

ZoneParams read_zone(Reader& r, const Json& j, const std::string& path) {
    ZoneParams z;
    if (!j.is_object()) {
        r.add(path + ": expected an object");
        return z;
    }
    if (!j.contains("id")) r.add(path + ".id: missing");
    r.string(j, "id", path, z.id);
    r.number(j, "capacitance_j_per_k", path, z.capacitance_j_per_k);
    r.number(j, "ua_w_per_k", path, z.ua_w_per_k);
    r.number(j, "internal_gain_w", path, z.internal_gain_w);
    r.number(j, "internal_gain_unocc_w", path, z.internal_gain_unocc_w);
    r.number(j, "solar_aperture_m2", path, z.solar_aperture_m2);
    return z;
}

HeatPumpParams read_heat_pump(Reader& r, const Json& j, const std::string& path) {
    HeatPumpParams hp;
    if (!j.is_object()) {
        r.add(path + ": expected an object");
        return hp;
    }
    r.string(j, "id", path, hp.id);
    std::string kind{to_string(hp.kind)};
    r.string(j, "kind", path, kind);
    try {
        hp.kind = heat_pump_kind_from_string(kind);
    } catch (const Error&) {
        r.add(path + ".kind: must be air_source or ground_source");
    }
    r.number(j, "capacity_w", path, hp.capacity_w);
    r.number(j, "cop_a", path, hp.cop_a);
    r.number(j, "cop_b", path, hp.cop_b);
    r.number(j, "cop_min", path, hp.cop_min);
    r.number(j, "ground_temp_c", path, hp.ground_temp_c);
    return hp;
}

}  // namespace

SimConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir) {
    std::vector<std::string> problems;
    Reader r(problems);
    SimConfig config;
    if (!doc.is_object()) throw ValidationError({"config: expected a JSON object"});

    r.number(doc, "dt_s", "", config.dt_s);
    r.number(doc, "initial_temp_c", "", config.initial_temp_c);

    std::vector<std::string> zone_ids;
    if (const auto* zones = r.array(doc, "zones", "", true)) {
        for (std::size_t i = 0; i < zones->size(); ++i) {
            config.zones.push_back(read_zone(r, (*zones)[i], "zones[" + std::to_string(i) + "]"));
            zone_ids.push_back(config.zones.back().id);
        }
    }

    config.plant = default_plant(zone_ids);
    if (const auto* plant = r.object(doc, "plant", "", true)) {
        if (const auto* pi = r.object(*plant, "pi", "plant", false)) {
            r.number(*pi, "kp", "plant.pi", config.plant.pi.kp);
            r.number(*pi, "ki", "plant.pi", config.plant.pi.ki);
            r.number(*pi, "out_min", "plant.pi", config.plant.pi.out_min);
            r.number(*pi, "out_max", "plant.pi", config.plant.pi.out_max);
        }
        if (const auto* vav = r.object(*plant, "vav", "plant", false)) {
            for (auto& box : config.plant.vavs) {
                r.number(*vav, "airflow_min_kg_s", "plant.vav", box.airflow_min_kg_s);
                r.number(*vav, "airflow_max_kg_s", "plant.vav", box.airflow_max_kg_s);
                r.number(*vav, "supply_cool_c", "plant.vav", box.supply_cool_c);
                r.number(*vav, "supply_heat_c", "plant.vav", box.supply_heat_c);
                r.number(*vav, "cp_j_per_kg_k", "plant.vav", box.cp_j_per_kg_k);
            }
        }
        if (const auto* hps = r.array(*plant, "heat_pumps", "plant", false)) {
            config.plant.heat_pumps.clear();
            for (std::size_t i = 0; i < hps->size(); ++i)
                config.plant.heat_pumps.push_back(
                    read_heat_pump(r, (*hps)[i], "plant.heat_pumps[" + std::to_string(i) + "]"));
        }
        r.number(*plant, "aux_power_w", "plant", config.plant.aux_power_w);
    }

    if (const auto* base = r.object(doc, "baseline", "", true)) {
        r.number(*base, "cooling_setpoint_c", "baseline", config.baseline.cooling_setpoint_c);
        r.number(*base, "heating_setpoint_c", "baseline", config.baseline.heating_setpoint_c);
        r.number(*base, "start_min", "baseline", config.baseline.start_min);
        r.number(*base, "end_min", "baseline", config.baseline.end_min);
    }

    const auto wp = doc.find("weather_path");
    if (wp == doc.end()) {
        problems.emplace_back("weather_path: missing");
    } else if (!wp->is_string()) {
        problems.emplace_back("weather_path: expected a string");
    } else {
        config.weather_path = wp->get<std::string>();
        std::filesystem::path path(config.weather_path);
        if (path.is_relative()) path = base_dir / path;
        if (!std::filesystem::is_regular_file(path)) {
            problems.push_back("weather_path: file not found: " + path.string());
        } else {
            try {
                config.weather = load_weather_csv(path);
            } catch (const ValidationError& e) {
                for (const auto& v : e.violations()) problems.push_back("weather_path: " + v);
            } catch (const Error& e) {
                problems.push_back(std::string("weather_path: ") + e.what());
            }
        }
    }

    const bool weather_reported = std::any_of(problems.begin(), problems.end(),
                                              [](const std::string& p) { return p.starts_with("weather_path:"); });
    for (auto& v : config.violations()) {
        if (weather_reported && v.starts_with("weather_path:")) continue;
        problems.push_back(std::move(v));
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return config;
}

SimConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError({"config: malformed JSON at byte " + std::to_string(e.byte)});
    }
    return config_from_json(doc, path.parent_path());
}

std::vector<std::string> validate_config_file(const std::filesystem::path& path) {
    try {
        load_config(path);
        return {};
    } catch (const ValidationError& e) {
        return e.violations();
    } catch (const Error& e) {
        return {std::string("config: ") + e.what()};
    }
}

Json config_to_json(const SimConfig& config) {
    Json zones = Json::array();
    for (const auto& z : config.zones) {
        Json j;
        j["id"] = z.id;
        j["capacitance_j_per_k"] = json_number(z.capacitance_j_per_k);
        j["ua_w_per_k"] = json_number(z.ua_w_per_k);
        j["internal_gain_w"] = json_number(z.internal_gain_w);
        j["internal_gain_unocc_w"] = json_number(z.internal_gain_unocc_w);
        j["solar_aperture_m2"] = json_number(z.solar_aperture_m2);
        zones.push_back(std::move(j));
    }
    Json pi;
    pi["kp"] = json_number(config.plant.pi.kp);
    pi["ki"] = json_number(config.plant.pi.ki);
    pi["out_min"] = json_number(config.plant.pi.out_min);
    pi["out_max"] = json_number(config.plant.pi.out_max);
    const VavParams vav_defaults = config.plant.vavs.empty() ? VavParams{} : config.plant.vavs.front();
    Json vav;
    vav["airflow_min_kg_s"] = json_number(vav_defaults.airflow_min_kg_s);
    vav["airflow_max_kg_s"] = json_number(vav_defaults.airflow_max_kg_s);
    vav["supply_cool_c"] = json_number(vav_defaults.supply_cool_c);
    vav["supply_heat_c"] = json_number(vav_defaults.supply_heat_c);
    vav["cp_j_per_kg_k"] = json_number(vav_defaults.cp_j_per_kg_k);
    Json hps = Json::array();
    for (const auto& hp : config.plant.heat_pumps) {
        Json j;
        j["id"] = hp.id;
        j["kind"] = std::string(to_string(hp.kind));
        j["capacity_w"] = json_number(hp.capacity_w);
        j["cop_a"] = json_number(hp.cop_a);
        j["cop_b"] = json_number(hp.cop_b);
        j["cop_min"] = json_number(hp.cop_min);
        j["ground_temp_c"] = json_number(hp.ground_temp_c);
        hps.push_back(std::move(j));
    }
    Json plant;
    plant["pi"] = std::move(pi);
    plant["vav"] = std::move(vav);
    plant["heat_pumps"] = std::move(hps);
    plant["aux_power_w"] = json_number(config.plant.aux_power_w);

    Json doc;
    doc["dt_s"] = json_number(config.dt_s);
    doc["initial_temp_c"] = json_number(config.initial_temp_c);
    doc["weather_path"] = config.weather_path;
    doc["baseline"] = to_json(config.baseline);
    doc["zones"] = std::move(zones);
    doc["plant"] = std::move(plant);
    return doc;
}

ScenarioScript load_script(const std::filesystem::path& path) {
    return parse_script_text(read_file(path));
}

}  // namespace flexlab
