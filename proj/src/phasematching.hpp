#ifndef SPDCSIM_PHASEMATCHING_HPP
#define SPDCSIM_PHASEMATCHING_HPP

// Dispersion and quasi-phase-matching for a periodically poled KTP crystal
// pumped along its X axis: refractive indices n(lambda, T), the collinear
// type-II mismatch Delta-k, the degenerate operating temperature and the
// signal/idler temperature-tuning curve.
//
// Axis convention: the pump and the signal are polarized along the crystal
// Y axis (the "H" photon at the output), the idler along Z ("V").

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace spdcsim {

enum class CrystalAxis { Y, Z };

struct ValidityWindow {
    double lambda_min_um = 0.0;
    double lambda_max_um = 0.0;
    double t_min_c = 0.0;
    double t_max_c = 0.0;
};

/// One pole of the Sellmeier rational form b*l2/(l2 - c), l2 = lambda^2 in um^2.
struct SellmeierPole {
    double b = 0.0;
    double c_um2 = 0.0;
};

struct AxisDispersion {
    // n^2(lambda) = constant + sum_j b_j l2/(l2 - c_j) + lambda2_coeff * l2
    double constant = 0.0;
    std::vector<SellmeierPole> poles;
    double lambda2_coeff = 0.0;
    // dn/dT(lambda) = scale * sum_m poly[m] / lambda^m   (lambda in um)
    double dndt_scale = 1e-6;
    std::vector<double> dndt_inv_lambda_poly;
};

/// Dispersion coefficient set loaded from a versioned data file. The file
/// must declare its validity window; evaluations outside it are rejected.
class SellmeierSet {
public:
    static SellmeierSet load(const std::string& json_path);
    static SellmeierSet from_json(const nlohmann::json& j, const std::string& origin);

    /// n(lambda, T) = sellmeier(lambda) + (T - t_ref) * dn/dT(lambda).
    /// Throws std::out_of_range naming the violated bound when (lambda, T)
    /// falls outside the validity window.
    double index(CrystalAxis axis, double lambda_nm, double t_c) const;

    const ValidityWindow& window() const { return window_; }
    const std::string& provenance() const { return provenance_; }
    double t_ref_c() const { return t_ref_c_; }

private:
    AxisDispersion y_;
    AxisDispersion z_;
    ValidityWindow window_;
    double t_ref_c_ = 25.0;
    std::string provenance_;
};

/// PPKTP geometry and operating constants.
struct CrystalSpec {
    double length_mm = 10.0;
    double grating_period_um = 9.0;
    double pump_wavelength_nm = 398.5;
    /// Calibration shift added to a requested temperature before the
    /// dispersion evaluation; anchors the solved degeneracy to the bench
    /// value without touching the published coefficients.
    double temperature_offset_c = 0.0;

    void validate() const;
};

/// One solved point of the temperature-tuning curve.
struct TuningPoint {
    double temperature_c = 0.0;
    double lambda_s_nm = 0.0;
    double lambda_i_nm = 0.0;
    double residual_mismatch_rad_per_m = 0.0;
    bool converged = false;
};

double refractive_index(const SellmeierSet& s, CrystalAxis axis, double lambda_nm, double t_c);

/// Energy-conserving partner wavelength: 1/li = 1/lp - 1/ls. Requires ls > lp.
double conjugate_wavelength(double lambda_p_nm, double lambda_s_nm);

/// Collinear type-II quasi-phase-matching residual in rad/m:
/// 2pi [ n_y(lp)/lp - n_y(ls)/ls - n_z(li)/li ] - 2pi/Lambda.
double qpm_mismatch(const CrystalSpec& c, const SellmeierSet& s, double lambda_s_nm, double t_c);

/// Mismatch of the degenerate reverse process (two fundamental photons on
/// Y and Z combine into one harmonic on Y); coincides with the
/// downconversion residual at the degenerate wavelength.
double shg_mismatch(const CrystalSpec& c, const SellmeierSet& s, double lambda_fund_nm, double t_c);

/// Temperature at which the degenerate process (ls = li = 2 lp) phase
/// matches, solved by bisection on [10, 60] C. Throws NoPhaseMatchError
/// when the residual does not change sign over the bracket.
double solve_degenerate_temperature(const CrystalSpec& c, const SellmeierSet& s);

/// temperature_offset_c value that places the solved degeneracy at
/// target_c for this coefficient set (searched over the declared window).
double calibrate_temperature_offset(const CrystalSpec& c, const SellmeierSet& s, double target_c);

/// Root-finds lambda_s(T) with Delta-k = 0 for each temperature in
/// [t_start, t_stop] stepped by t_step. Non-converged points are returned
/// flagged, never dropped.
std::vector<TuningPoint> tuning_curve(const CrystalSpec& c, const SellmeierSet& s,
                                      double t_start_c, double t_stop_c, double t_step_c);

} // namespace spdcsim

#endif
