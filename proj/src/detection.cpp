#include "detection.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace spdcsim {

void SourceRates::validate() const {
    if (!(pair_rate_per_mw >= 0.0) || !(pump_power_mw >= 0.0) ||
        !(dark1_per_s >= 0.0) || !(dark2_per_s >= 0.0)) {
        throw std::invalid_argument("SourceRates: rates and power must be nonnegative");
    }
    if (!(eta1 >= 0.0 && eta1 <= 1.0) || !(eta2 >= 0.0 && eta2 <= 1.0)) {
        throw std::invalid_argument("SourceRates: efficiencies must lie in [0,1]");
    }
    if (!(window_s > 0.0)) {
        throw std::invalid_argument("SourceRates: coincidence window must be positive");
    }
}

void CollectionGeometry::validate() const {
    if (!(iris_diameter_mm > 0.0)) {
        throw std::invalid_argument("CollectionGeometry: iris diameter must be positive");
    }
    if (filter_bandwidth_nm && !(*filter_bandwidth_nm > 0.0)) {
        throw std::invalid_argument("CollectionGeometry: filter bandwidth must be positive");
    }
    if (!(saturation_diameter_mm > 0.0) || !(calibration_diameter_mm > 0.0)) {
        throw std::invalid_argument("CollectionGeometry: saturation/calibration diameters must be positive");
    }
}

double accidental_rate(double r1_per_s, double r2_per_s, double tau_s) {
    if (!(r1_per_s >= 0.0) || !(r2_per_s >= 0.0) || !(tau_s >= 0.0)) {
        throw std::invalid_argument("accidental_rate: inputs must be nonnegative");
    }
    return r1_per_s * r2_per_s * tau_s;
}

CountRecord correct_accidentals(CountRecord rec, double tau_s) {
    if (!(rec.duration_s > 0.0)) {
        throw std::invalid_argument("correct_accidentals: duration must be positive");
    }
    rec.accidental_estimate =
        static_cast<double>(rec.singles1) * static_cast<double>(rec.singles2) * tau_s / rec.duration_s;
    const double corrected = static_cast<double>(rec.raw_coincidences) - rec.accidental_estimate;
    rec.corrected_clamped = corrected < 0.0;
    rec.corrected_coincidences = rec.corrected_clamped ? 0.0 : corrected;
    return rec;
}

double flux_scale(const CollectionGeometry& geom) {
    geom.validate();
    const double d2 = geom.iris_diameter_mm * geom.iris_diameter_mm;
    const double sat2 = geom.saturation_diameter_mm * geom.saturation_diameter_mm;
    const double cal2 = geom.calibration_diameter_mm * geom.calibration_diameter_mm;
    return std::min(d2, sat2) / std::min(cal2, sat2);
}

ExpectedRates expected_rates(const SourceRates& src, const BiphotonState& state,
                             const AnalyzerSetting& s, const CollectionGeometry& geom) {
    src.validate();
    const double r_pair = src.pair_rate_per_mw * src.pump_power_mw * flux_scale(geom);
    ExpectedRates out;
    out.r1_per_s = r_pair * src.eta1 * singles_probability_arm1(state, s.theta1_rad) + src.dark1_per_s;
    out.r2_per_s = r_pair * src.eta2 * singles_probability_arm2(state, s.theta2_rad) + src.dark2_per_s;
    out.rc_per_s = r_pair * src.eta1 * src.eta2 * coincidence_probability(state, s);
    return out;
}

namespace {

// Poisson stream as sorted arrival times over [0, duration).
std::vector<double> poisson_stream(double rate_per_s, double duration_s, std::mt19937_64& rng) {
    std::vector<double> times;
    if (rate_per_s <= 0.0) return times;
    times.reserve(static_cast<std::size_t>(rate_per_s * duration_s * 1.1) + 16);
    std::exponential_distribution<double> gap(rate_per_s);
    double t = gap(rng);
    while (t < duration_s) {
        times.push_back(t);
        t += gap(rng);
    }
    return times;
}

void merge_sorted(std::vector<double>& into, const std::vector<double>& other) {
    std::vector<double> merged;
    merged.reserve(into.size() + other.size());
    std::merge(into.begin(), into.end(), other.begin(), other.end(), std::back_inserter(merged));
    into = std::move(merged);
}

// AND gate: two pulse trains of width tau/2 each; a coincidence is scored
// when a pulse from each arm overlaps, i.e. |t1 - t2| < tau/2, and both
// events are consumed. Greedy in time order.
std::uint64_t count_coincidences(const std::vector<double>& arm1, const std::vector<double>& arm2,
                                 double tau_s) {
    const double half = tau_s / 2.0;
    std::uint64_t n = 0;
    std::size_t i = 0, j = 0;
    while (i < arm1.size() && j < arm2.size()) {
        const double dt = arm1[i] - arm2[j];
        if (std::abs(dt) < half) {
            ++n;
            ++i;
            ++j;
        } else if (dt < 0.0) {
            ++i;
        } else {
            ++j;
        }
    }
    return n;
}

} // namespace

CountRecord simulate_counts(const SourceRates& src, const BiphotonState& state,
                            const AnalyzerSetting& s, const CollectionGeometry& geom,
                            double duration_s, std::uint64_t seed) {
    src.validate();
    if (!(duration_s > 0.0)) {
        throw std::invalid_argument("simulate_counts: duration must be positive");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // Joint analyzer outcome probabilities for one pair.
    const double p_tt = coincidence_probability(state, s);
    const double p_t1 = singles_probability_arm1(state, s.theta1_rad);
    const double p_t2 = singles_probability_arm2(state, s.theta2_rad);
    const double p_tf = std::max(0.0, p_t1 - p_tt);
    const double p_ft = std::max(0.0, p_t2 - p_tt);

    const double r_pair = src.pair_rate_per_mw * src.pump_power_mw * flux_scale(geom);

    std::vector<double> arm1;
    std::vector<double> arm2;
    for (double t : poisson_stream(r_pair, duration_s, rng)) {
        const double u = uni(rng);
        bool pass1, pass2;
        if (u < p_tt) {
            pass1 = pass2 = true;
        } else if (u < p_tt + p_tf) {
            pass1 = true;
            pass2 = false;
        } else if (u < p_tt + p_tf + p_ft) {
            pass1 = false;
            pass2 = true;
        } else {
            pass1 = pass2 = false;
        }
        if (pass1 && uni(rng) < src.eta1) arm1.push_back(t);
        if (pass2 && uni(rng) < src.eta2) arm2.push_back(t);
    }

    merge_sorted(arm1, poisson_stream(src.dark1_per_s, duration_s, rng));
    merge_sorted(arm2, poisson_stream(src.dark2_per_s, duration_s, rng));

    CountRecord rec;
    rec.duration_s = duration_s;
    rec.singles1 = arm1.size();
    rec.singles2 = arm2.size();
    rec.raw_coincidences = count_coincidences(arm1, arm2, src.window_s);
    rec.seed = seed;
    return rec;
}

VisibilityQuery visibility_model(const CollectionGeometry& geom, const VisibilityTable& table) {
    geom.validate();
    const auto& curve = geom.filter_bandwidth_nm ? table.with_filter : table.no_filter;
    if (curve.empty()) {
        throw std::invalid_argument("visibility_model: table has no entries for the requested filter choice");
    }
    const double d = geom.iris_diameter_mm;
    VisibilityQuery q;
    if (d <= curve.front().diameter_mm) {
        q.visibility = curve.front().visibility;
        q.extrapolated = d < curve.front().diameter_mm;
        return q;
    }
    if (d >= curve.back().diameter_mm) {
        q.visibility = curve.back().visibility;
        q.extrapolated = d > curve.back().diameter_mm;
        return q;
    }
    for (std::size_t k = 1; k < curve.size(); ++k) {
        if (d <= curve[k].diameter_mm) {
            const auto& a = curve[k - 1];
            const auto& b = curve[k];
            const double w = (d - a.diameter_mm) / (b.diameter_mm - a.diameter_mm);
            q.visibility = a.visibility + w * (b.visibility - a.visibility);
            return q;
        }
    }
    q.visibility = curve.back().visibility;
    return q;
}

} // namespace spdcsim
