#include "phasematching.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace spdcsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// |Delta-k| * L convergence target for the root finders, in radians.
constexpr double kResidualPhaseTol = 1e-4;
constexpr int kMaxIterations = 200;

AxisDispersion parse_axis(const nlohmann::json& j, const std::string& axis_name) {
    AxisDispersion d;
    const auto& sell = j.at("sellmeier");
    d.constant = sell.at("constant").get<double>();
    for (const auto& p : sell.at("poles")) {
        d.poles.push_back({p.at("b").get<double>(), p.at("c_um2").get<double>()});
    }
    d.lambda2_coeff = sell.at("lambda2_um2").get<double>();
    const auto& dndt = j.at("dndt_per_c");
    d.dndt_scale = dndt.at("scale").get<double>();
    d.dndt_inv_lambda_poly = dndt.at("inv_lambda_poly").get<std::vector<double>>();
    if (d.poles.empty()) {
        throw ConfigError("sellmeier axis '" + axis_name + "': at least one pole required");
    }
    return d;
}

double sellmeier_n(const AxisDispersion& d, double lambda_um) {
    const double l2 = lambda_um * lambda_um;
    double n2 = d.constant + d.lambda2_coeff * l2;
    for (const auto& p : d.poles) {
        n2 += p.b * l2 / (l2 - p.c_um2);
    }
    if (!(n2 > 0.0)) {
        throw std::out_of_range("sellmeier evaluation produced non-physical n^2 at lambda = " +
                                std::to_string(lambda_um) + " um");
    }
    return std::sqrt(n2);
}

double dndt(const AxisDispersion& d, double lambda_um) {
    double acc = 0.0;
    double inv_pow = 1.0;
    for (double c : d.dndt_inv_lambda_poly) {
        acc += c * inv_pow;
        inv_pow /= lambda_um;
    }
    return d.dndt_scale * acc;
}

} // namespace

SellmeierSet SellmeierSet::load(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) {
        throw ConfigError("cannot open sellmeier file: " + json_path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("sellmeier file '" + json_path + "' is not valid JSON: " + e.what());
    }
    return from_json(j, json_path);
}

SellmeierSet SellmeierSet::from_json(const nlohmann::json& j, const std::string& origin) {
    SellmeierSet s;
    try {
        if (!j.contains("validity")) {
            throw ConfigError("sellmeier data '" + origin + "': missing validity window");
        }
        const auto& w = j.at("validity");
        s.window_.lambda_min_um = w.at("lambda_min_um").get<double>();
        s.window_.lambda_max_um = w.at("lambda_max_um").get<double>();
        s.window_.t_min_c = w.at("t_min_c").get<double>();
        s.window_.t_max_c = w.at("t_max_c").get<double>();
        if (!(s.window_.lambda_min_um < s.window_.lambda_max_um) ||
            !(s.window_.t_min_c < s.window_.t_max_c)) {
            throw ConfigError("sellmeier data '" + origin + "': degenerate validity window");
        }
        s.provenance_ = j.value("provenance", std::string{});
        s.t_ref_c_ = j.value("t_ref_c", 25.0);
        const auto& axes = j.at("axes");
        s.y_ = parse_axis(axes.at("y"), "y");
        s.z_ = parse_axis(axes.at("z"), "z");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("sellmeier data '" + origin + "': " + e.what());
    }
    return s;
}

double SellmeierSet::index(CrystalAxis axis, double lambda_nm, double t_c) const {
    const double lambda_um = lambda_nm * 1e-3;
    if (lambda_um < window_.lambda_min_um || lambda_um > window_.lambda_max_um) {
        std::ostringstream msg;
        msg << "wavelength " << lambda_nm << " nm outside validity window ["
            << window_.lambda_min_um * 1e3 << ", " << window_.lambda_max_um * 1e3 << "] nm";
        throw std::out_of_range(msg.str());
    }
    if (t_c < window_.t_min_c || t_c > window_.t_max_c) {
        std::ostringstream msg;
        msg << "temperature " << t_c << " C outside validity window ["
            << window_.t_min_c << ", " << window_.t_max_c << "] C";
        throw std::out_of_range(msg.str());
    }
    const AxisDispersion& d = (axis == CrystalAxis::Y) ? y_ : z_;
    return sellmeier_n(d, lambda_um) + (t_c - t_ref_c_) * dndt(d, lambda_um);
}

void CrystalSpec::validate() const {
    if (!(length_mm > 0.0) || !(grating_period_um > 0.0) || !(pump_wavelength_nm > 0.0)) {
        throw std::invalid_argument("CrystalSpec: length, grating period and pump wavelength must be positive");
    }
    if (!std::isfinite(temperature_offset_c)) {
        throw std::invalid_argument("CrystalSpec: non-finite temperature offset");
    }
}

double refractive_index(const SellmeierSet& s, CrystalAxis axis, double lambda_nm, double t_c) {
    return s.index(axis, lambda_nm, t_c);
}

double conjugate_wavelength(double lambda_p_nm, double lambda_s_nm) {
    if (!(lambda_p_nm > 0.0) || !(lambda_s_nm > lambda_p_nm)) {
        throw std::invalid_argument("conjugate_wavelength: requires lambda_s > lambda_p > 0");
    }
    return 1.0 / (1.0 / lambda_p_nm - 1.0 / lambda_s_nm);
}

double qpm_mismatch(const CrystalSpec& c, const SellmeierSet& s, double lambda_s_nm, double t_c) {
    c.validate();
    const double lambda_p = c.pump_wavelength_nm;
    const double lambda_i = conjugate_wavelength(lambda_p, lambda_s_nm);
    const double t_eff = t_c + c.temperature_offset_c;
    const double n_p = s.index(CrystalAxis::Y, lambda_p, t_eff);
    const double n_s = s.index(CrystalAxis::Y, lambda_s_nm, t_eff);
    const double n_i = s.index(CrystalAxis::Z, lambda_i, t_eff);
    // n/lambda terms in 1/nm, converted to 1/m; grating term from um.
    const double dk = kTwoPi * 1e9 * (n_p / lambda_p - n_s / lambda_s_nm - n_i / lambda_i) -
                      kTwoPi * 1e6 / c.grating_period_um;
    return dk;
}

double shg_mismatch(const CrystalSpec& c, const SellmeierSet& s, double lambda_fund_nm, double t_c) {
    c.validate();
    const double lambda_h = lambda_fund_nm / 2.0;
    const double t_eff = t_c + c.temperature_offset_c;
    const double n_h = s.index(CrystalAxis::Y, lambda_h, t_eff);
    const double n_fy = s.index(CrystalAxis::Y, lambda_fund_nm, t_eff);
    const double n_fz = s.index(CrystalAxis::Z, lambda_fund_nm, t_eff);
    return kTwoPi * 1e9 * (n_h / lambda_h - (n_fy + n_fz) / lambda_fund_nm) -
           kTwoPi * 1e6 / c.grating_period_um;
}

namespace {

// Bisection on f over [lo, hi]; f(lo) and f(hi) must differ in sign.
// Converges on |f| * length_m < kResidualPhaseTol.
template <typename F>
double bisect(F&& f, double lo, double hi, double f_lo, double length_m, const char* what) {
    double f_best = f_lo;
    double best = lo;
    for (int i = 0; i < kMaxIterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (std::abs(f_mid) < std::abs(f_best)) {
            best = mid;
            f_best = f_mid;
        }
        if (std::abs(f_mid) * length_m < kResidualPhaseTol) {
            return mid;
        }
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    throw NotConvergedError(std::string(what) + ": bisection exhausted " +
                            std::to_string(kMaxIterations) + " iterations (best residual " +
                            std::to_string(f_best) + " rad/m at " + std::to_string(best) + ")");
}

} // namespace

double solve_degenerate_temperature(const CrystalSpec& c, const SellmeierSet& s) {
    c.validate();
    const double lambda_deg = 2.0 * c.pump_wavelength_nm;
    const double t_lo = 10.0, t_hi = 60.0;
    auto f = [&](double t) { return qpm_mismatch(c, s, lambda_deg, t); };
    const double f_lo = f(t_lo);
    const double f_hi = f(t_hi);
    if ((f_lo < 0.0) == (f_hi < 0.0)) {
        std::ostringstream msg;
        msg << "no phase match: degenerate mismatch does not change sign on [" << t_lo << ", "
            << t_hi << "] C (dk(" << t_lo << ")=" << f_lo << ", dk(" << t_hi << ")=" << f_hi
            << " rad/m)";
        throw NoPhaseMatchError(msg.str());
    }
    return bisect(f, t_lo, t_hi, f_lo, c.length_mm * 1e-3, "degenerate temperature solve");
}

double calibrate_temperature_offset(const CrystalSpec& c, const SellmeierSet& s, double target_c) {
    CrystalSpec raw = c;
    raw.temperature_offset_c = 0.0;
    raw.validate();
    const double lambda_deg = 2.0 * raw.pump_wavelength_nm;
    // Search the full declared temperature window, slightly inset so the
    // evaluations stay legal.
    const double t_lo = s.window().t_min_c + 1e-6;
    const double t_hi = s.window().t_max_c - 1e-6;
    auto f = [&](double t) { return qpm_mismatch(raw, s, lambda_deg, t); };
    const double f_lo = f(t_lo);
    const double f_hi = f(t_hi);
    if ((f_lo < 0.0) == (f_hi < 0.0)) {
        throw NoPhaseMatchError("calibration: degenerate mismatch has no root inside the declared temperature window");
    }
    const double t_raw = bisect(f, t_lo, t_hi, f_lo, raw.length_mm * 1e-3, "calibration solve");
    return t_raw - target_c;
}

std::vector<TuningPoint> tuning_curve(const CrystalSpec& c, const SellmeierSet& s,
                                      double t_start_c, double t_stop_c, double t_step_c) {
    c.validate();
    if (!(t_step_c > 0.0) || t_stop_c < t_start_c) {
        throw std::invalid_argument("tuning_curve: requires t_stop >= t_start and t_step > 0");
    }
    const double lambda_deg = 2.0 * c.pump_wavelength_nm;
    const double length_m = c.length_mm * 1e-3;

    std::vector<TuningPoint> out;
    const int n_points = static_cast<int>(std::floor((t_stop_c - t_start_c) / t_step_c + 0.5)) + 1;
    for (int k = 0; k < n_points; ++k) {
        const double t = t_start_c + k * t_step_c;
        TuningPoint pt;
        pt.temperature_c = t;

        auto f = [&](double ls) { return qpm_mismatch(c, s, ls, t); };
        // Signal branch stays within a few nm of degeneracy over any sane
        // temperature range; bracket generously and widen once if needed.
        double lo = lambda_deg - 20.0, hi = lambda_deg + 20.0;
        double f_lo = f(lo), f_hi = f(hi);
        if ((f_lo < 0.0) == (f_hi < 0.0)) {
            lo = lambda_deg - 40.0;
            hi = lambda_deg + 40.0;
            f_lo = f(lo);
            f_hi = f(hi);
        }
        if ((f_lo < 0.0) == (f_hi < 0.0)) {
            pt.lambda_s_nm = lambda_deg;
            pt.lambda_i_nm = conjugate_wavelength(c.pump_wavelength_nm, lambda_deg);
            pt.residual_mismatch_rad_per_m = f(lambda_deg);
            pt.converged = false;
            out.push_back(pt);
            continue;
        }
        try {
            const double ls = bisect(f, lo, hi, f_lo, length_m, "tuning point solve");
            pt.lambda_s_nm = ls;
            pt.lambda_i_nm = conjugate_wavelength(c.pump_wavelength_nm, ls);
            pt.residual_mismatch_rad_per_m = f(ls);
            pt.converged = true;
        } catch (const NotConvergedError&) {
            pt.lambda_s_nm = lambda_deg;
            pt.lambda_i_nm = conjugate_wavelength(c.pump_wavelength_nm, lambda_deg);
            pt.residual_mismatch_rad_per_m = f(lambda_deg);
            pt.converged = false;
        }
        out.push_back(pt);
    }
    return out;
}

} // namespace spdcsim
