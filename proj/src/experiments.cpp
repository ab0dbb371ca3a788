#include "experiments.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "interferometer.hpp"
#include "sinefit.hpp"

namespace spdcsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// Shortest round-trip representation; locale independent by construction.
std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt_hash(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string filter_label(const std::optional<double>& bw_nm) {
    if (!bw_nm) return "none";
    return fmt_double(*bw_nm) + "nm";
}

class CsvFile {
public:
    CsvFile(const fs::path& path, std::uint64_t config_hash, std::uint64_t seed,
            const std::string& header) {
        out_.open(path, std::ios::binary);
        if (!out_) {
            throw ConfigError("cannot open output file for writing: " + path.string());
        }
        out_ << "# config_hash=" << fmt_hash(config_hash) << " seed=" << seed << "\n";
        out_ << header << "\n";
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

fs::path prepare_out_dir(const std::string& out_dir) {
    fs::path dir(out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot open output file for writing: " + path.string());
    }
    out << text;
}

// Statistical error assigned to an accidental-corrected count.
double corrected_count_sigma(const CountRecord& rec) {
    return std::sqrt(std::max(1.0, static_cast<double>(rec.raw_coincidences)));
}

} // namespace

ExperimentEngine::ExperimentEngine(ExperimentConfig cfg)
    : cfg_(std::move(cfg)), sellmeier_(SellmeierSet::load(cfg_.sellmeier_file)), seed_(cfg_.seed) {}

BiphotonState ExperimentEngine::collection_state(const CollectionGeometry& geom) const {
    const double v = visibility_model(geom, cfg_.visibility_table).visibility;
    return apply_distinguishability(build_output_state(cfg_.target_phi_rad), v);
}

ExperimentEngine::McFitResult ExperimentEngine::mc_scan_visibility(
    const BiphotonState& state, double theta1_deg, const CollectionGeometry& geom,
    int scan_points, double duration_s, std::uint64_t& counter) const {
    std::vector<double> theta(scan_points), y(scan_points), sigma(scan_points);
    for (int k = 0; k < scan_points; ++k) {
        const double theta2_deg = 180.0 * k / scan_points;
        const AnalyzerSetting setting = AnalyzerSetting::from_degrees(theta1_deg, theta2_deg);
        CountRecord rec =
            simulate_counts(cfg_.source, state, setting, geom, duration_s, seed_ + counter++);
        rec = correct_accidentals(rec, cfg_.source.window_s);
        theta[k] = deg_to_rad(theta2_deg);
        y[k] = rec.corrected_coincidences;
        sigma[k] = corrected_count_sigma(rec);
    }
    const SineFit fit = fit_fringe(theta, y, sigma);
    return {fit.visibility, fit.visibility_err};
}

FringeScanSummary ExperimentEngine::run_fringe_scan(const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    const BiphotonState state = collection_state(cfg_.collection);
    const double model_v = visibility_model(cfg_.collection, cfg_.visibility_table).visibility;

    FringeScanSummary summary;
    summary.model_visibility = model_v;

    std::uint64_t counter = 0;
    for (double theta1_deg : cfg_.fringe.theta1_deg) {
        const std::string csv_name = "fringe_scan_theta1_" + fmt_double(theta1_deg) + ".csv";
        CsvFile csv(dir / csv_name, cfg_.config_hash, seed_, "theta2_deg,coinc_analytic,coinc_mc,err");

        std::vector<double> theta, y_analytic, y_mc, sig_mc;
        for (double theta2_deg = cfg_.fringe.theta2_start_deg;
             theta2_deg <= cfg_.fringe.theta2_stop_deg + 1e-9;
             theta2_deg += cfg_.fringe.theta2_step_deg) {
            const AnalyzerSetting setting = AnalyzerSetting::from_degrees(theta1_deg, theta2_deg);
            const ExpectedRates rates = expected_rates(cfg_.source, state, setting, cfg_.collection);
            const double analytic = rates.rc_per_s * cfg_.fringe.duration_per_point_s;

            double mc = analytic;
            double err = 0.0;
            if (!analytic_only_) {
                CountRecord rec = simulate_counts(cfg_.source, state, setting, cfg_.collection,
                                                  cfg_.fringe.duration_per_point_s, seed_ + counter++);
                rec = correct_accidentals(rec, cfg_.source.window_s);
                mc = rec.corrected_coincidences;
                err = corrected_count_sigma(rec);
            }

            theta.push_back(deg_to_rad(theta2_deg));
            y_analytic.push_back(analytic);
            y_mc.push_back(mc);
            sig_mc.push_back(err > 0.0 ? err : 1.0);
            csv.row({fmt_double(theta2_deg), fmt_double(analytic), fmt_double(mc), fmt_double(err)});
        }

        const SineFit fit_a = fit_fringe(theta, y_analytic, std::vector<double>(theta.size(), 1.0));
        FringeFit entry;
        entry.theta1_deg = theta1_deg;
        entry.visibility_analytic = fit_a.visibility;
        entry.visibility_analytic_err = fit_a.visibility_err;
        entry.csv_file = csv_name;
        if (!analytic_only_) {
            const SineFit fit_mc = fit_fringe(theta, y_mc, sig_mc);
            entry.visibility_mc = fit_mc.visibility;
            entry.visibility_mc_err = fit_mc.visibility_err;
        }
        summary.scans.push_back(entry);
    }

    json j;
    j["command"] = "fringe-scan";
    j["config_hash"] = fmt_hash(cfg_.config_hash);
    j["seed"] = seed_;
    j["analytic_only"] = analytic_only_;
    j["model_visibility"] = model_v;
    j["target_phi_rad"] = cfg_.target_phi_rad;
    j["scans"] = json::array();
    for (const auto& s : summary.scans) {
        json e;
        e["theta1_deg"] = s.theta1_deg;
        e["csv"] = s.csv_file;
        e["visibility_analytic_fit"] = s.visibility_analytic;
        e["visibility_analytic_err"] = s.visibility_analytic_err;
        if (s.visibility_mc) {
            e["visibility_mc_fit"] = *s.visibility_mc;
            e["visibility_mc_err"] = *s.visibility_mc_err;
        }
        j["scans"].push_back(e);
    }
    last_summary_json_ = j.dump(2) + "\n";
    write_text(dir / "fringe_scan_summary.json", last_summary_json_);
    return summary;
}

IrisSweepSummary ExperimentEngine::run_iris_sweep(const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    CsvFile csv(dir / "iris_sweep.csv", cfg_.config_hash, seed_,
                "d_mm,filter,vis,vis_err,pairs_per_s_per_mw");

    IrisSweepSummary summary;
    std::uint64_t counter = 0;
    for (const auto& filter : cfg_.iris.filters_nm) {
        for (double d : cfg_.iris.diameters_mm) {
            CollectionGeometry geom = cfg_.collection;
            geom.iris_diameter_mm = d;
            geom.filter_bandwidth_nm = filter;

            const VisibilityQuery q = visibility_model(geom, cfg_.visibility_table);
            const BiphotonState state =
                apply_distinguishability(build_output_state(cfg_.target_phi_rad), q.visibility);

            const double r_pair =
                cfg_.source.pair_rate_per_mw * cfg_.source.pump_power_mw * flux_scale(geom);
            const double theta1_rad = deg_to_rad(cfg_.iris.theta1_deg);
            const double rc_max =
                r_pair * cfg_.source.eta1 * cfg_.source.eta2 * fringe_extrema(state, theta1_rad).p_max;
            const double flux_per_mw = rc_max / cfg_.source.pump_power_mw;

            IrisSweepRow row;
            row.diameter_mm = d;
            row.filter_nm = filter;
            row.extrapolated = q.extrapolated;
            row.pairs_per_s_per_mw = flux_per_mw;
            if (analytic_only_) {
                row.visibility = q.visibility;
                row.visibility_err = 0.0;
            } else {
                const McFitResult fit = mc_scan_visibility(state, cfg_.iris.theta1_deg, geom,
                                                           cfg_.iris.scan_points,
                                                           cfg_.iris.duration_per_point_s, counter);
                row.visibility = fit.visibility;
                row.visibility_err = fit.visibility_err;
            }
            summary.rows.push_back(row);
            csv.row({fmt_double(d), filter_label(filter), fmt_double(row.visibility),
                     fmt_double(row.visibility_err), fmt_double(flux_per_mw)});
        }
    }

    json j;
    j["command"] = "iris-sweep";
    j["config_hash"] = fmt_hash(cfg_.config_hash);
    j["seed"] = seed_;
    j["analytic_only"] = analytic_only_;
    j["csv"] = "iris_sweep.csv";
    j["rows"] = json::array();
    for (const auto& r : summary.rows) {
        json e;
        e["diameter_mm"] = r.diameter_mm;
        e["filter"] = filter_label(r.filter_nm);
        e["visibility"] = r.visibility;
        e["visibility_err"] = r.visibility_err;
        e["pairs_per_s_per_mw"] = r.pairs_per_s_per_mw;
        e["extrapolated"] = r.extrapolated;
        j["rows"].push_back(e);
    }
    last_summary_json_ = j.dump(2) + "\n";
    write_text(dir / "iris_sweep_summary.json", last_summary_json_);
    return summary;
}

TuningSweepSummary ExperimentEngine::run_tuning_sweep(const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);

    CollectionGeometry geom = cfg_.collection;
    geom.iris_diameter_mm = cfg_.tuning.iris_diameter_mm;
    geom.filter_bandwidth_nm = cfg_.tuning.filter_nm;

    const VisibilityQuery q = visibility_model(geom, cfg_.visibility_table);
    const BiphotonState state =
        apply_distinguishability(build_output_state(cfg_.target_phi_rad), q.visibility);

    TuningSweepSummary summary;
    summary.degenerate_temperature_c = solve_degenerate_temperature(cfg_.crystal, sellmeier_);

    const std::vector<TuningPoint> curve = tuning_curve(
        cfg_.crystal, sellmeier_, cfg_.tuning.t_start_c, cfg_.tuning.t_stop_c, cfg_.tuning.t_step_c);

    CsvFile csv(dir / "tuning_sweep.csv", cfg_.config_hash, seed_,
                "T_C,lambda_s_nm,lambda_i_nm,vis,vis_err,converged");

    double ls_min = 1e30, ls_max = -1e30;
    std::uint64_t counter = 0;
    for (const TuningPoint& pt : curve) {
        TuningSweepRow row;
        row.point = pt;
        if (analytic_only_) {
            row.visibility = q.visibility;
            row.visibility_err = 0.0;
        } else {
            // The distinguishability model is wavelength independent across
            // the tuning band, so each temperature re-measures the same
            // state with fresh statistics.
            const McFitResult fit =
                mc_scan_visibility(state, cfg_.tuning.theta1_deg, geom, cfg_.tuning.scan_points,
                                   cfg_.tuning.duration_per_point_s, counter);
            row.visibility = fit.visibility;
            row.visibility_err = fit.visibility_err;
        }
        summary.rows.push_back(row);
        summary.all_converged = summary.all_converged && pt.converged;
        if (pt.converged) {
            ls_min = std::min(ls_min, pt.lambda_s_nm);
            ls_max = std::max(ls_max, pt.lambda_s_nm);
        }
        csv.row({fmt_double(pt.temperature_c), fmt_double(pt.lambda_s_nm),
                 fmt_double(pt.lambda_i_nm), fmt_double(row.visibility),
                 fmt_double(row.visibility_err), pt.converged ? "1" : "0"});
    }
    summary.lambda_span_nm = (ls_max > ls_min) ? ls_max - ls_min : 0.0;

    json j;
    j["command"] = "tuning-sweep";
    j["config_hash"] = fmt_hash(cfg_.config_hash);
    j["seed"] = seed_;
    j["analytic_only"] = analytic_only_;
    j["csv"] = "tuning_sweep.csv";
    j["model_visibility"] = q.visibility;
    j["degenerate_temperature_c"] = summary.degenerate_temperature_c;
    j["lambda_span_nm"] = summary.lambda_span_nm;
    j["all_converged"] = summary.all_converged;
    last_summary_json_ = j.dump(2) + "\n";
    write_text(dir / "tuning_sweep_summary.json", last_summary_json_);
    return summary;
}

BellSummary ExperimentEngine::run_bell_test(const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    const BellConfig& bc = cfg_.bell;

    const PolarizationKet ket = build_output_state(cfg_.target_phi_rad);
    const BiphotonState state = (bc.noise_model == "dephasing")
                                    ? apply_distinguishability(ket, bc.visibility)
                                    : apply_depolarization(ket, bc.visibility);

    const double a = deg_to_rad(bc.a_deg);
    const double ap = deg_to_rad(bc.a_alt_deg);
    const double b = deg_to_rad(bc.b_deg);
    const double bp = deg_to_rad(bc.b_alt_deg);

    BellSummary summary;
    summary.s_analytic = chsh_S(state, a, ap, b, bp);

    json settings = json::array();
    std::optional<double> s_mc, s_mc_err;
    if (!analytic_only_) {
        std::uint64_t counter = 0;
        // E(a,b) from the four corrected counts at (a,b), (a,b+90), ...
        struct Pair { double a_deg, b_deg; };
        const Pair groups[4] = {{bc.a_deg, bc.b_deg},
                                {bc.a_deg, bc.b_alt_deg},
                                {bc.a_alt_deg, bc.b_deg},
                                {bc.a_alt_deg, bc.b_alt_deg}};
        double e_val[4], e_var[4];
        for (int gi = 0; gi < 4; ++gi) {
            const double ga = groups[gi].a_deg;
            const double gb = groups[gi].b_deg;
            const double combos[4][2] = {
                {ga, gb}, {ga, gb + 90.0}, {ga + 90.0, gb}, {ga + 90.0, gb + 90.0}};
            // signs: ++, +-, -+, -- -> E = (c0 - c1 - c2 + c3) / sum
            double counts[4];
            double raws[4];
            for (int k = 0; k < 4; ++k) {
                const AnalyzerSetting setting =
                    AnalyzerSetting::from_degrees(combos[k][0], combos[k][1]);
                CountRecord rec = simulate_counts(cfg_.source, state, setting, cfg_.collection,
                                                  bc.duration_per_setting_s, seed_ + counter++);
                rec = correct_accidentals(rec, cfg_.source.window_s);
                counts[k] = rec.corrected_coincidences;
                raws[k] = static_cast<double>(rec.raw_coincidences);

                json srec;
                srec["a_deg"] = combos[k][0];
                srec["b_deg"] = combos[k][1];
                srec["duration_s"] = rec.duration_s;
                srec["singles1"] = rec.singles1;
                srec["singles2"] = rec.singles2;
                srec["raw_coinc"] = rec.raw_coincidences;
                srec["accidental_est"] = rec.accidental_estimate;
                srec["corrected_coinc"] = rec.corrected_coincidences;
                srec["seed"] = rec.seed;
                settings.push_back(srec);
            }
            const double total = counts[0] + counts[1] + counts[2] + counts[3];
            if (total <= 0.0) {
                throw UndefinedResultError("bell test: no coincidences recorded for one analyzer group");
            }
            const double e = (counts[0] - counts[1] - counts[2] + counts[3]) / total;
            double var = 0.0;
            const double signs[4] = {1.0, -1.0, -1.0, 1.0};
            for (int k = 0; k < 4; ++k) {
                const double deriv = (signs[k] - e) / total;
                var += deriv * deriv * std::max(1.0, raws[k]);
            }
            e_val[gi] = e;
            e_var[gi] = var;
        }
        const double s = std::abs(e_val[0] - e_val[1]) + std::abs(e_val[2] + e_val[3]);
        const double err = std::sqrt(e_var[0] + e_var[1] + e_var[2] + e_var[3]);
        s_mc = s;
        s_mc_err = err;
        summary.s_mc = s;
        summary.s_mc_err = err;
        summary.sigma_from_classical = err > 0.0 ? (s - 2.0) / err : 0.0;
    }

    json j;
    j["command"] = "bell-test";
    j["config_hash"] = fmt_hash(cfg_.config_hash);
    j["seed"] = seed_;
    j["analytic_only"] = analytic_only_;
    j["noise_model"] = bc.noise_model;
    j["visibility"] = bc.visibility;
    j["target_phi_rad"] = cfg_.target_phi_rad;
    j["angles_deg"] = {{"a", bc.a_deg}, {"a_alt", bc.a_alt_deg}, {"b", bc.b_deg}, {"b_alt", bc.b_alt_deg}};
    j["S_analytic"] = summary.s_analytic;
    if (s_mc) {
        j["S_mc"] = *s_mc;
        j["S_mc_err"] = *s_mc_err;
        j["sigma_from_classical"] = *summary.sigma_from_classical;
        j["settings"] = settings;
    }
    last_summary_json_ = j.dump(2) + "\n";
    write_text(dir / "bell_test.json", last_summary_json_);
    return summary;
}

LockSummary ExperimentEngine::run_lock_sim(const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);

    const double lambda_p_nm = cfg_.crystal.pump_wavelength_nm;
    const double k_p = 2.0 * kPi * 1e9 / lambda_p_nm;
    const double k_half = k_p / 2.0;  // degenerate signal/idler in air

    const LockResult res = simulate_lock(cfg_.interferometer, cfg_.lock.loop, k_p, k_half, k_half,
                                         cfg_.target_phi_rad, cfg_.lock.duration_s, seed_);

    CsvFile csv(dir / "lock_sim.csv", cfg_.config_hash, seed_, "t_s,phi_p_rad,phi_rad,signal");
    for (const LockSample& s : res.series) {
        csv.row({fmt_double(s.t_s), fmt_double(s.phi_p_rad), fmt_double(s.phi_rad),
                 fmt_double(s.signal)});
    }

    LockSummary summary;
    summary.residual_rms_rad = res.residual_rms_rad;
    summary.mean_phi_rad = res.mean_phi_rad;
    summary.plate_offset_rad = res.plate_offset_rad;
    summary.target_phi_rad = cfg_.target_phi_rad;
    summary.lock_failure = res.lock_failure;

    json j;
    j["command"] = "lock-sim";
    j["config_hash"] = fmt_hash(cfg_.config_hash);
    j["seed"] = seed_;
    j["csv"] = "lock_sim.csv";
    j["target_phi_rad"] = cfg_.target_phi_rad;
    j["plate_offset_rad"] = res.plate_offset_rad;
    j["residual_rms_rad"] = res.residual_rms_rad;
    j["mean_phi_rad"] = res.mean_phi_rad;
    j["residual_rms_threshold_rad"] = cfg_.lock.residual_rms_threshold_rad;
    j["lock_failure"] = res.lock_failure;
    last_summary_json_ = j.dump(2) + "\n";
    write_text(dir / "lock_sim.json", last_summary_json_);

    if (res.lock_failure) {
        throw LockFailureError("lock failure: residual RMS " + fmt_double(res.residual_rms_rad) +
                               " rad (fringe wander exceeded one period)");
    }
    return summary;
}

} // namespace spdcsim
