#ifndef SPDCSIM_EXPERIMENTS_HPP
#define SPDCSIM_EXPERIMENTS_HPP

// Experiment engine: wires the state, phase-matching, interferometer and
// detection layers into the five canned experiments and writes their
// CSV/JSON datasets. Every command is deterministic given (config, seed);
// Monte Carlo points draw from per-point generators seeded base + index,
// so results do not depend on evaluation order.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "detection.hpp"
#include "phasematching.hpp"
#include "state.hpp"

namespace spdcsim {

struct FringeFit {
    double theta1_deg = 0.0;
    double visibility_analytic = 0.0;
    double visibility_analytic_err = 0.0;
    std::optional<double> visibility_mc;
    std::optional<double> visibility_mc_err;
    std::string csv_file;
};

struct FringeScanSummary {
    double model_visibility = 0.0;
    std::vector<FringeFit> scans;
};

struct IrisSweepRow {
    double diameter_mm = 0.0;
    std::optional<double> filter_nm;
    double visibility = 0.0;
    double visibility_err = 0.0;
    double pairs_per_s_per_mw = 0.0;
    bool extrapolated = false;
};

struct IrisSweepSummary {
    std::vector<IrisSweepRow> rows;
};

struct TuningSweepRow {
    TuningPoint point;
    double visibility = 0.0;
    double visibility_err = 0.0;
};

struct TuningSweepSummary {
    std::vector<TuningSweepRow> rows;
    double degenerate_temperature_c = 0.0;
    double lambda_span_nm = 0.0;
    bool all_converged = true;
};

struct BellSummary {
    double s_analytic = 0.0;
    std::optional<double> s_mc;
    std::optional<double> s_mc_err;
    std::optional<double> sigma_from_classical;
};

struct LockSummary {
    double residual_rms_rad = 0.0;
    double mean_phi_rad = 0.0;
    double plate_offset_rad = 0.0;
    double target_phi_rad = 0.0;
    bool lock_failure = false;
};

class ExperimentEngine {
public:
    /// Loads the Sellmeier file referenced by the config.
    explicit ExperimentEngine(ExperimentConfig cfg);

    void set_seed(std::uint64_t seed) { seed_ = seed; }
    void set_analytic_only(bool enabled) { analytic_only_ = enabled; }

    FringeScanSummary run_fringe_scan(const std::string& out_dir);
    IrisSweepSummary run_iris_sweep(const std::string& out_dir);
    TuningSweepSummary run_tuning_sweep(const std::string& out_dir);
    BellSummary run_bell_test(const std::string& out_dir);
    /// Writes outputs, then throws LockFailureError if the loop lost the fringe.
    LockSummary run_lock_sim(const std::string& out_dir);

    /// JSON text of the most recent command's summary.
    const std::string& last_summary_json() const { return last_summary_json_; }

    const ExperimentConfig& config() const { return cfg_; }
    const SellmeierSet& sellmeier() const { return sellmeier_; }

    /// Distinguishability-degraded output state for a collection geometry.
    BiphotonState collection_state(const CollectionGeometry& geom) const;

private:
    struct McFitResult {
        double visibility;
        double visibility_err;
    };
    McFitResult mc_scan_visibility(const BiphotonState& state, double theta1_deg,
                                   const CollectionGeometry& geom, int scan_points,
                                   double duration_s, std::uint64_t& counter) const;

    ExperimentConfig cfg_;
    SellmeierSet sellmeier_;
    std::uint64_t seed_ = 0;
    bool analytic_only_ = false;
    std::string last_summary_json_;
};

} // namespace spdcsim

#endif
