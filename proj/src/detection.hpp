#ifndef SPDCSIM_DETECTION_HPP
#define SPDCSIM_DETECTION_HPP

// Photon-counting layer: expected singles/coincidence rates from a
// two-photon state, an event-level Monte Carlo of the detection chain with
// an AND-gate coincidence window, accidental-coincidence estimation, and
// the parametric iris/filter collection model.

#include <cstdint>
#include <optional>
#include <vector>

#include "state.hpp"

namespace spdcsim {

struct SourceRates {
    double pair_rate_per_mw = 0.0;   // generated pairs / s / mW, before collection & detection
    double pump_power_mw = 0.0;
    double eta1 = 1.0;               // arm-1 detection efficiency
    double eta2 = 1.0;
    double dark1_per_s = 0.0;
    double dark2_per_s = 0.0;
    double window_s = 39.4e-9;       // AND-gate coincidence window tau

    void validate() const;
};

struct CountRecord {
    double duration_s = 0.0;
    std::uint64_t singles1 = 0;
    std::uint64_t singles2 = 0;
    std::uint64_t raw_coincidences = 0;
    double accidental_estimate = 0.0;
    double corrected_coincidences = 0.0;
    bool corrected_clamped = false;  // set when raw - estimate < 0 was clamped
    std::uint64_t seed = 0;
};

struct CollectionGeometry {
    double iris_diameter_mm = 4.0;
    std::optional<double> filter_bandwidth_nm;  // nullopt = no interference filter
    double solid_angle_per_mm2_sr = 3.5e-5;     // internal solid angle at 1 mm diameter
    double saturation_diameter_mm = 10.0;
    double calibration_diameter_mm = 4.0;       // flux_scale is 1 here

    void validate() const;
};

/// Uncorrelated-stream coincidence rate R1 * R2 * tau.
double accidental_rate(double r1_per_s, double r2_per_s, double tau_s);

/// Fills accidental_estimate = singles1 * singles2 * tau / duration and the
/// corrected count (clamped at zero with a flag). Consumes raw records.
CountRecord correct_accidentals(CountRecord rec, double tau_s);

struct ExpectedRates {
    double r1_per_s = 0.0;
    double r2_per_s = 0.0;
    double rc_per_s = 0.0;
};

/// Analytic rates: R_pair = pair_rate_per_mw * power * flux_scale(geom);
/// R1 = R_pair eta1 P1(theta1) + dark1, Rc = R_pair eta1 eta2 P(theta1,theta2).
ExpectedRates expected_rates(const SourceRates& src, const BiphotonState& state,
                             const AnalyzerSetting& s, const CollectionGeometry& geom);

/// Event-level Monte Carlo of the counting chain. Pair emissions are a
/// Poisson process; each pair draws a joint analyzer outcome from the
/// state, each transmitted photon is detected with its arm efficiency,
/// dark counts are independent Poisson streams, and coincidences are
/// scored by an AND gate overlapping two tau/2 pulses (|t1 - t2| < tau/2,
/// each event consumable once). Bitwise reproducible for a fixed seed.
CountRecord simulate_counts(const SourceRates& src, const BiphotonState& state,
                            const AnalyzerSetting& s, const CollectionGeometry& geom,
                            double duration_s, std::uint64_t seed);

/// Relative collected-pair fraction: min(d^2, d_sat^2), normalized to 1 at
/// the calibration diameter.
double flux_scale(const CollectionGeometry& geom);

/// Distinguishability-visibility lookup table, one curve per filter choice.
struct VisibilityTable {
    struct Entry {
        double diameter_mm;
        double visibility;
    };
    std::vector<Entry> no_filter;     // sorted by diameter
    std::vector<Entry> with_filter;   // interference filter in front of the detectors
};

struct VisibilityQuery {
    double visibility = 0.0;
    bool extrapolated = false;  // geometry outside the table; value clamped to the edge
};

/// Interpolates the table at the geometry's iris diameter, picking the
/// curve matching its filter choice.
VisibilityQuery visibility_model(const CollectionGeometry& geom, const VisibilityTable& table);

} // namespace spdcsim

#endif
