#include "config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace spdcsim {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

std::optional<double> parse_filter(const json& j) {
    if (j.is_null()) return std::nullopt;
    const double bw = j.get<double>();
    if (!(bw > 0.0)) throw ConfigError("filter bandwidth must be positive or null");
    return bw;
}

std::vector<VisibilityTable::Entry> parse_vis_curve(const json& j, const std::string& name) {
    std::vector<VisibilityTable::Entry> curve;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != 2) {
            throw ConfigError("visibility_table." + name + ": each entry must be [diameter_mm, visibility]");
        }
        VisibilityTable::Entry e{row[0].get<double>(), row[1].get<double>()};
        if (!(e.diameter_mm > 0.0) || !(e.visibility >= 0.0 && e.visibility <= 1.0)) {
            throw ConfigError("visibility_table." + name + ": diameter must be > 0 and visibility in [0,1]");
        }
        if (!curve.empty() && e.diameter_mm <= curve.back().diameter_mm) {
            throw ConfigError("visibility_table." + name + ": diameters must be strictly increasing");
        }
        curve.push_back(e);
    }
    if (curve.empty()) {
        throw ConfigError("visibility_table." + name + ": empty curve");
    }
    return curve;
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string raw = buf.str();

    json j;
    try {
        j = json::parse(raw);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }

    ExperimentConfig cfg;
    cfg.config_hash = fnv1a64(raw);
    cfg.source_path = path;

    try {
        const auto& cj = j.at("crystal");
        cfg.crystal.length_mm = cj.at("length_mm").get<double>();
        cfg.crystal.grating_period_um = cj.at("grating_period_um").get<double>();
        cfg.crystal.pump_wavelength_nm = cj.at("pump_wavelength_nm").get<double>();
        cfg.crystal.temperature_offset_c = cj.at("temperature_offset_c").get<double>();
        const auto sell_rel = cj.at("sellmeier_file").get<std::string>();
        fs::path sell_path(sell_rel);
        if (sell_path.is_relative()) {
            sell_path = fs::path(path).parent_path() / sell_path;
        }
        cfg.sellmeier_file = sell_path.string();

        const auto& sj = j.at("source");
        cfg.source.pair_rate_per_mw = sj.at("pair_rate_per_mw").get<double>();
        cfg.source.pump_power_mw = sj.at("pump_power_mw").get<double>();
        cfg.source.eta1 = sj.at("eta1").get<double>();
        cfg.source.eta2 = sj.at("eta2").get<double>();
        cfg.source.dark1_per_s = sj.at("dark1_per_s").get<double>();
        cfg.source.dark2_per_s = sj.at("dark2_per_s").get<double>();
        cfg.source.window_s = sj.at("coincidence_window_s").get<double>();

        const auto& gj = j.at("collection");
        cfg.collection.iris_diameter_mm = gj.at("iris_diameter_mm").get<double>();
        cfg.collection.filter_bandwidth_nm = parse_filter(gj.at("filter_bandwidth_nm"));
        cfg.collection.solid_angle_per_mm2_sr = gj.at("solid_angle_per_mm2_sr").get<double>();
        cfg.collection.saturation_diameter_mm = gj.at("saturation_diameter_mm").get<double>();
        cfg.collection.calibration_diameter_mm = gj.at("calibration_diameter_mm").get<double>();

        const auto& vt = j.at("visibility_table");
        cfg.visibility_table.no_filter = parse_vis_curve(vt.at("no_filter"), "no_filter");
        cfg.visibility_table.with_filter = parse_vis_curve(vt.at("with_filter"), "with_filter");

        const auto& ij = j.at("interferometer");
        cfg.interferometer.pump_arm_a_m = ij.at("pump_arm_a_m").get<double>();
        cfg.interferometer.pump_arm_b_m = ij.at("pump_arm_b_m").get<double>();
        cfg.interferometer.out_arm_a_m = ij.at("out_arm_a_m").get<double>();
        cfg.interferometer.out_arm_b_m = ij.at("out_arm_b_m").get<double>();
        cfg.interferometer.hwp_retardance_rad = ij.at("hwp_retardance_rad").get<double>();
        cfg.interferometer.plate_offset_rad = ij.at("plate_offset_rad").get<double>();

        const auto& lj = j.at("lock");
        cfg.lock.loop.sample_rate_hz = lj.at("sample_rate_hz").get<double>();
        cfg.lock.loop.gain_m_per_unit = lj.at("gain_m_per_unit").get<double>();
        cfg.lock.loop.phase_noise_rad_per_sqrt_s = lj.at("phase_noise_rad_per_sqrt_s").get<double>();
        cfg.lock.loop.setpoint_fraction = lj.at("setpoint_fraction").get<double>();
        cfg.lock.loop.actuator_travel_m = lj.at("actuator_travel_m").get<double>();
        cfg.lock.loop.pump_tap = lj.at("pump_tap").get<double>();
        cfg.lock.loop.pump_power_mw = j.at("source").at("pump_power_mw").get<double>();
        cfg.lock.loop.fringe_visibility = lj.at("fringe_visibility").get<double>();
        cfg.lock.loop.initial_phase_offset_rad = lj.at("initial_phase_offset_rad").get<double>();
        cfg.lock.duration_s = lj.at("duration_s").get<double>();
        cfg.lock.residual_rms_threshold_rad = lj.at("residual_rms_threshold_rad").get<double>();

        cfg.target_phi_rad = j.at("target_phi_rad").get<double>();

        const auto& fj = j.at("fringe_scan");
        cfg.fringe.theta1_deg = fj.at("theta1_deg").get<std::vector<double>>();
        cfg.fringe.theta2_start_deg = fj.at("theta2_start_deg").get<double>();
        cfg.fringe.theta2_stop_deg = fj.at("theta2_stop_deg").get<double>();
        cfg.fringe.theta2_step_deg = fj.at("theta2_step_deg").get<double>();
        cfg.fringe.duration_per_point_s = fj.at("duration_per_point_s").get<double>();

        const auto& irj = j.at("iris_sweep");
        cfg.iris.diameters_mm = irj.at("diameters_mm").get<std::vector<double>>();
        cfg.iris.filters_nm.clear();
        for (const auto& f : irj.at("filters_nm")) {
            cfg.iris.filters_nm.push_back(parse_filter(f));
        }
        cfg.iris.theta1_deg = irj.at("theta1_deg").get<double>();
        cfg.iris.scan_points = irj.at("scan_points").get<int>();
        cfg.iris.duration_per_point_s = irj.at("duration_per_point_s").get<double>();

        const auto& tj = j.at("tuning_sweep");
        cfg.tuning.t_start_c = tj.at("t_start_c").get<double>();
        cfg.tuning.t_stop_c = tj.at("t_stop_c").get<double>();
        cfg.tuning.t_step_c = tj.at("t_step_c").get<double>();
        cfg.tuning.iris_diameter_mm = tj.at("iris_diameter_mm").get<double>();
        cfg.tuning.filter_nm = parse_filter(tj.at("filter_nm"));
        cfg.tuning.theta1_deg = tj.at("theta1_deg").get<double>();
        cfg.tuning.scan_points = tj.at("scan_points").get<int>();
        cfg.tuning.duration_per_point_s = tj.at("duration_per_point_s").get<double>();

        const auto& bj = j.at("bell");
        cfg.bell.visibility = bj.at("visibility").get<double>();
        cfg.bell.noise_model = bj.at("noise_model").get<std::string>();
        cfg.bell.a_deg = bj.at("a_deg").get<double>();
        cfg.bell.a_alt_deg = bj.at("a_alt_deg").get<double>();
        cfg.bell.b_deg = bj.at("b_deg").get<double>();
        cfg.bell.b_alt_deg = bj.at("b_alt_deg").get<double>();
        cfg.bell.duration_per_setting_s = bj.at("duration_per_setting_s").get<double>();

        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.output_dir = j.value("output_dir", std::string("out"));
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }

    // Validate up front so commands can assume a consistent configuration.
    try {
        cfg.crystal.validate();
        cfg.source.validate();
        cfg.collection.validate();
        cfg.interferometer.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    if (!fs::exists(cfg.sellmeier_file)) {
        throw ConfigError("config '" + path + "': sellmeier file not found: " + cfg.sellmeier_file);
    }
    if (!std::isfinite(cfg.target_phi_rad)) {
        throw ConfigError("config '" + path + "': target_phi_rad must be finite");
    }
    if (cfg.bell.noise_model != "isotropic" && cfg.bell.noise_model != "dephasing") {
        throw ConfigError("config '" + path + "': bell.noise_model must be 'isotropic' or 'dephasing'");
    }
    if (!(cfg.bell.visibility >= 0.0 && cfg.bell.visibility <= 1.0)) {
        throw ConfigError("config '" + path + "': bell.visibility must lie in [0,1]");
    }
    if (cfg.fringe.theta1_deg.empty() || !(cfg.fringe.theta2_step_deg > 0.0) ||
        cfg.fringe.theta2_stop_deg < cfg.fringe.theta2_start_deg) {
        throw ConfigError("config '" + path + "': malformed fringe_scan block");
    }
    if (cfg.iris.diameters_mm.empty() || cfg.iris.filters_nm.empty() || cfg.iris.scan_points < 5) {
        throw ConfigError("config '" + path + "': malformed iris_sweep block");
    }
    if (!(cfg.tuning.t_step_c > 0.0) || cfg.tuning.t_stop_c < cfg.tuning.t_start_c ||
        cfg.tuning.scan_points < 5) {
        throw ConfigError("config '" + path + "': malformed tuning_sweep block");
    }
    const double durations[] = {cfg.fringe.duration_per_point_s, cfg.iris.duration_per_point_s,
                                cfg.tuning.duration_per_point_s, cfg.bell.duration_per_setting_s,
                                cfg.lock.duration_s};
    for (double d : durations) {
        if (!(d > 0.0)) {
            throw ConfigError("config '" + path + "': all durations must be positive");
        }
    }
    return cfg;
}

} // namespace spdcsim
