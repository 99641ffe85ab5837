#include "pyrewatch/scenario.hpp"

#include "pyrewatch/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace pyrewatch {
namespace {

using nlohmann::json;

[[noreturn]] void reject(const std::string& field, const std::string& bound)
{
    throw ConfigError(field + ": " + bound);
}

void require_positive(const std::string& field, double value)
{
    if (!(value > 0.0) || !std::isfinite(value)) reject(field, "must be a finite value > 0");
}

double read_real(const json& obj, const std::string& key)
{
    const auto& v = obj.at(key);
    if (!v.is_number()) reject(key, "expected a number");
    return v.get<double>();
}

int read_int(const json& obj, const std::string& key)
{
    const auto& v = obj.at(key);
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 2.0e9) return static_cast<int>(d);
    }
    reject(key, "expected an integer");
}

link::ChannelParams read_channel(const json& obj)
{
    if (!obj.is_object()) reject("channel", "expected an object");
    link::ChannelParams c;
    for (const auto& [key, value] : obj.items()) {
        const std::string field = "channel." + key;
        if (key == "tx_power_dbm") c.tx_power_dbm = read_real(obj, key);
        else if (key == "noise_dbm") c.noise_dbm = read_real(obj, key);
        else if (key == "path_loss_exp") c.path_loss_exp = read_real(obj, key);
        else if (key == "eta_los_db") c.eta_los_db = read_real(obj, key);
        else if (key == "eta_nlos_db") c.eta_nlos_db = read_real(obj, key);
        else if (key == "env_a") c.env_a = read_real(obj, key);
        else if (key == "env_b") c.env_b = read_real(obj, key);
        else if (key == "repetitions") c.repetitions = read_int(obj, key);
        else if (key == "sensing_error") c.sensing_error = read_real(obj, key);
        else if (key == "target_edge_snr_db") c.target_edge_snr_db = read_real(obj, key);
        else reject(field, "unknown key");
    }
    return c;
}

json channel_to_json(const link::ChannelParams& c)
{
    return json{{"tx_power_dbm", c.tx_power_dbm},   {"noise_dbm", c.noise_dbm},
                {"path_loss_exp", c.path_loss_exp}, {"eta_los_db", c.eta_los_db},
                {"eta_nlos_db", c.eta_nlos_db},     {"env_a", c.env_a},
                {"env_b", c.env_b},                 {"repetitions", c.repetitions},
                {"sensing_error", c.sensing_error}, {"target_edge_snr_db", c.target_edge_snr_db}};
}

} // namespace

long long stable_floor(double x)
{
    return static_cast<long long>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x))));
}

Scenario::Scenario(ScenarioParams params) : params_(std::move(params))
{
    const auto& p = params_;
    require_positive("forest_area_km2", p.forest_area_km2);
    if (!(p.sensor_density_per_km2 >= 0.0) || !std::isfinite(p.sensor_density_per_km2))
        reject("sensor_density_per_km2", "must be a finite value >= 0");
    if (p.num_uavs < 0) reject("num_uavs", "must be >= 0");
    require_positive("fire_ros_m_per_min", p.fire_ros_m_per_min);
    require_positive("sensor_detect_radius_m", p.sensor_detect_radius_m);
    require_positive("uav_coverage_radius_m", p.uav_coverage_radius_m);
    if (!(p.collection_ratio > 0.0 && p.collection_ratio <= 1.0)) reject("collection_ratio", "must lie in (0, 1]");
    require_positive("obs_time_s", p.obs_time_s);
    require_positive("travel_time_min", p.travel_time_min);
    require_positive("verify_time_min", p.verify_time_min);
    require_positive("critical_time_min", p.critical_time_min);
    require_positive("fallback_time_min", p.fallback_time_min);
    if (p.flag_threshold < 1) reject("flag_threshold", "must be a positive integer");
    require_positive("sensor_cost", p.sensor_cost);
    require_positive("uav_cost", p.uav_cost);
    require_positive("budget", p.budget);
    require_positive("damage_coeff", p.damage_coeff);

    if (p.channel) link::validate(*p.channel);
    if (p.combined_error) {
        epsilon_ = *p.combined_error;
        if (p.channel)
            notices_.push_back("combined_error given directly; channel block ignored for the flag error");
    } else if (p.channel) {
        epsilon_ = link::edge_combined_error(*p.channel);
    } else {
        reject("combined_error", "missing and no channel block to derive it from");
    }
    if (!(epsilon_ >= 0.0 && epsilon_ <= 0.5)) reject("combined_error", "must lie in [0, 0.5]");

    const double r_km = p.uav_coverage_radius_m / 1000.0;
    const long long collected =
        stable_floor(p.collection_ratio * p.sensor_density_per_km2 * std::numbers::pi * r_km * r_km);
    if (collected > 1'000'000) reject("sensor_density_per_km2", "more than 10^6 observations per hovering location");
    collected_ = static_cast<int>(collected);
    if (collected_ < p.flag_threshold)
        reject("flag_threshold", "flag_threshold exceeds collectable observations (N = " + std::to_string(collected_) +
                                     ")");

    step_min_ = collected_ * p.obs_time_s / 60.0 + p.travel_time_min;
    steps_ = static_cast<int>(stable_floor(p.critical_time_min / step_min_));
    if (steps_ < 1) reject("critical_time_min", "shorter than one step T = " + std::to_string(step_min_) + " min");
    fallback_steps_ = static_cast<int>(stable_floor(p.fallback_time_min / step_min_));
    if (fallback_steps_ < 1)
        reject("fallback_time_min", "shorter than one step T = " + std::to_string(step_min_) + " min");
    if (p.verify_time_min < step_min_)
        reject("verify_time_min", "must be >= the step duration T = " + std::to_string(step_min_) + " min");
}

int derived_step_count(const Scenario& scenario, double horizon_min)
{
    if (!(horizon_min > 0.0)) throw ConfigError("horizon: must be > 0");
    const auto steps = stable_floor(horizon_min / scenario.step_min());
    if (steps < 1) throw ConfigError("horizon: shorter than one step");
    return static_cast<int>(steps);
}

Scenario load_scenario(std::string_view config_text)
{
    json doc;
    if (config_text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        doc = json::object();
    } else {
        try {
            doc = json::parse(config_text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config: parse error: ") + e.what());
        }
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");

    ScenarioParams p;
    const bool has_error = doc.contains("combined_error");
    for (const auto& [key, value] : doc.items()) {
        if (key == "forest_area_km2") p.forest_area_km2 = read_real(doc, key);
        else if (key == "sensor_density_per_km2") p.sensor_density_per_km2 = read_real(doc, key);
        else if (key == "num_uavs") p.num_uavs = read_int(doc, key);
        else if (key == "fire_ros_m_per_min") p.fire_ros_m_per_min = read_real(doc, key);
        else if (key == "sensor_detect_radius_m") p.sensor_detect_radius_m = read_real(doc, key);
        else if (key == "combined_error") p.combined_error = read_real(doc, key);
        else if (key == "channel") p.channel = read_channel(value);
        else if (key == "uav_coverage_radius_m") p.uav_coverage_radius_m = read_real(doc, key);
        else if (key == "collection_ratio") p.collection_ratio = read_real(doc, key);
        else if (key == "obs_time_s") p.obs_time_s = read_real(doc, key);
        else if (key == "travel_time_min") p.travel_time_min = read_real(doc, key);
        else if (key == "verify_time_min") p.verify_time_min = read_real(doc, key);
        else if (key == "critical_time_min") p.critical_time_min = read_real(doc, key);
        else if (key == "fallback_time_min") p.fallback_time_min = read_real(doc, key);
        else if (key == "flag_threshold") p.flag_threshold = read_int(doc, key);
        else if (key == "sensor_cost") p.sensor_cost = read_real(doc, key);
        else if (key == "uav_cost") p.uav_cost = read_real(doc, key);
        else if (key == "budget") p.budget = read_real(doc, key);
        else if (key == "damage_coeff") p.damage_coeff = read_real(doc, key);
        else reject(key, "unknown key");
    }
    if (p.channel && !has_error) p.combined_error.reset();
    return Scenario(std::move(p));
}

Scenario load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

std::string dump_scenario(const Scenario& scenario, int indent)
{
    const auto& p = scenario.params();
    json doc{{"forest_area_km2", p.forest_area_km2},
             {"sensor_density_per_km2", p.sensor_density_per_km2},
             {"num_uavs", p.num_uavs},
             {"fire_ros_m_per_min", p.fire_ros_m_per_min},
             {"sensor_detect_radius_m", p.sensor_detect_radius_m},
             {"uav_coverage_radius_m", p.uav_coverage_radius_m},
             {"collection_ratio", p.collection_ratio},
             {"obs_time_s", p.obs_time_s},
             {"travel_time_min", p.travel_time_min},
             {"verify_time_min", p.verify_time_min},
             {"critical_time_min", p.critical_time_min},
             {"fallback_time_min", p.fallback_time_min},
             {"flag_threshold", p.flag_threshold},
             {"sensor_cost", p.sensor_cost},
             {"uav_cost", p.uav_cost},
             {"budget", p.budget},
             {"damage_coeff", p.damage_coeff}};
    if (p.combined_error) doc["combined_error"] = *p.combined_error;
    if (p.channel) doc["channel"] = channel_to_json(*p.channel);
    return doc.dump(indent);
}

} // namespace pyrewatch
