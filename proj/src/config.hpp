#ifndef SPDCSIM_CONFIG_HPP
#define SPDCSIM_CONFIG_HPP

// Experiment configuration: one JSON file wiring the crystal, source,
// collection, interferometer and per-experiment parameters together.
// Angles appear in degrees here and on every CLI/CSV surface; conversion
// to radians happens at the module boundaries.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detection.hpp"
#include "interferometer.hpp"
#include "phasematching.hpp"

namespace spdcsim {

struct FringeScanConfig {
    std::vector<double> theta1_deg{0.0, 45.0};
    double theta2_start_deg = 0.0;
    double theta2_stop_deg = 360.0;
    double theta2_step_deg = 10.0;
    double duration_per_point_s = 1.0;
};

struct IrisSweepConfig {
    std::vector<double> diameters_mm;
    std::vector<std::optional<double>> filters_nm;  // nullopt = no filter
    double theta1_deg = 45.0;
    int scan_points = 13;
    double duration_per_point_s = 0.2;
};

struct TuningSweepConfig {
    double t_start_c = 20.0;
    double t_stop_c = 50.0;
    double t_step_c = 1.0;
    double iris_diameter_mm = 2.2;
    std::optional<double> filter_nm;
    double theta1_deg = 45.0;
    int scan_points = 13;
    double duration_per_point_s = 0.2;
};

struct BellConfig {
    double visibility = 0.919;
    std::string noise_model = "isotropic";  // "isotropic" | "dephasing"
    double a_deg = 0.0;
    double a_alt_deg = 45.0;
    double b_deg = 22.5;
    double b_alt_deg = 67.5;
    double duration_per_setting_s = 2.0;
};

struct LockSimConfig {
    LockConfig loop;
    double duration_s = 1.0;
    double residual_rms_threshold_rad = 0.1;
};

struct ExperimentConfig {
    CrystalSpec crystal;
    std::string sellmeier_file;  // resolved against the config file location
    SourceRates source;
    CollectionGeometry collection;
    VisibilityTable visibility_table;
    PathGeometry interferometer;
    LockSimConfig lock;
    double target_phi_rad = 0.0;
    FringeScanConfig fringe;
    IrisSweepConfig iris;
    TuningSweepConfig tuning;
    BellConfig bell;
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    std::uint64_t config_hash = 0;  // FNV-1a 64 of the raw file bytes
    std::string source_path;
};

/// Parses and validates a config file. Every referenced file must exist;
/// all parameters must satisfy the module-level invariants.
/// Throws ConfigError on any problem.
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);

} // namespace spdcsim

#endif
