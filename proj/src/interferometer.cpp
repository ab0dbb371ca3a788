#include "interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace spdcsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_two_pi(double angle_rad) {
    double r = std::fmod(angle_rad, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

double wrap_diff(double a_rad, double b_rad) {
    double d = wrap_two_pi(a_rad - b_rad);
    if (d > std::numbers::pi) d -= kTwoPi;
    return d;
}

void PathGeometry::validate() const {
    const double lengths[] = {pump_arm_a_m, pump_arm_b_m, out_arm_a_m, out_arm_b_m};
    for (double l : lengths) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            throw std::invalid_argument("PathGeometry: arm lengths must be positive and finite");
        }
    }
    if (!std::isfinite(hwp_retardance_rad) || !std::isfinite(plate_offset_rad)) {
        throw std::invalid_argument("PathGeometry: non-finite phase offset");
    }
}

double output_phase(const PathGeometry& g, double k_p, double k_s, double k_i) {
    g.validate();
    if (!(k_p > 0.0) || !(k_s > 0.0) || !(k_i > 0.0)) {
        throw std::invalid_argument("output_phase: wavevectors must be positive");
    }
    const double phi = k_p * (g.pump_arm_b_m - g.pump_arm_a_m) +
                       (k_s + k_i) * (g.out_arm_b_m - g.out_arm_a_m) -
                       2.0 * g.hwp_retardance_rad + g.plate_offset_rad;
    return wrap_two_pi(phi);
}

double pump_fringe_signal(double phi_p_rad, double fringe_visibility, double power_mw, double tap) {
    if (!(fringe_visibility >= 0.0 && fringe_visibility <= 1.0)) {
        throw std::invalid_argument("pump_fringe_signal: visibility must lie in [0,1]");
    }
    if (!(power_mw >= 0.0) || !(tap >= 0.0 && tap <= 1.0)) {
        throw std::invalid_argument("pump_fringe_signal: power must be >= 0 and tap in [0,1]");
    }
    return tap * power_mw / 2.0 * (1.0 + fringe_visibility * std::cos(phi_p_rad));
}

namespace {

// Fringe phase on the positive slope matching a detected signal level.
double positive_slope_phase(double signal, double fringe_visibility, double power_mw, double tap) {
    const double denom = tap * power_mw;
    double c = (denom > 0.0) ? (2.0 * signal / denom - 1.0) / fringe_visibility : 0.0;
    c = std::clamp(c, -1.0, 1.0);
    return kTwoPi - std::acos(c);
}

} // namespace

LockState side_lock_step(const LockState& s, double measured_signal, double dt_s) {
    if (!(dt_s > 0.0)) {
        throw std::invalid_argument("side_lock_step: dt must be positive");
    }
    LockState next = s;
    next.actuator_position_m += s.gain_m_per_unit * (s.setpoint - measured_signal);
    next.saturated = false;
    if (s.travel_limit_m > 0.0 && std::abs(next.actuator_position_m) > s.travel_limit_m) {
        next.actuator_position_m = std::copysign(s.travel_limit_m, next.actuator_position_m);
        next.saturated = true;
    }
    next.phase_estimate_rad =
        positive_slope_phase(measured_signal, s.fringe_visibility, s.pump_power_mw, s.tap);
    return next;
}

LockResult simulate_lock(const PathGeometry& g, const LockConfig& cfg,
                         double k_p, double k_s, double k_i,
                         double target_phi_rad, double duration_s, std::uint64_t seed) {
    g.validate();
    if (!(duration_s > 0.0)) {
        throw std::invalid_argument("simulate_lock: duration must be positive");
    }
    if (!(cfg.sample_rate_hz > 0.0)) {
        throw std::invalid_argument("simulate_lock: sample rate must be positive");
    }
    if (!(cfg.fringe_visibility > 0.0)) {
        throw std::invalid_argument("simulate_lock: fringe visibility must be positive to lock");
    }

    const double dt = 1.0 / cfg.sample_rate_hz;
    const auto n_samples = static_cast<std::size_t>(std::llround(duration_s * cfg.sample_rate_hz));

    const double i_max = cfg.pump_tap * cfg.pump_power_mw / 2.0 * (1.0 + cfg.fringe_visibility);
    const double setpoint = cfg.setpoint_fraction * i_max;
    const double cos_lock =
        (cfg.setpoint_fraction * (1.0 + cfg.fringe_visibility) - 1.0) / cfg.fringe_visibility;
    if (cos_lock <= -1.0 || cos_lock >= 1.0) {
        throw std::invalid_argument("simulate_lock: setpoint lies at or beyond a fringe extremum");
    }
    const double phi_lock = kTwoPi - std::acos(cos_lock); // positive fringe slope

    const double phi_base = k_p * (g.pump_arm_b_m - g.pump_arm_a_m);
    const double phi_static = (k_s + k_i) * (g.out_arm_b_m - g.out_arm_a_m) -
                              2.0 * g.hwp_retardance_rad;
    const double plate = wrap_two_pi(target_phi_rad - phi_lock - phi_static);

    LockState state;
    state.setpoint = setpoint;
    state.gain_m_per_unit = cfg.gain_m_per_unit;
    state.noise_rms_rad = cfg.phase_noise_rad_per_sqrt_s * std::sqrt(dt);
    state.travel_limit_m = cfg.actuator_travel_m;
    state.fringe_visibility = cfg.fringe_visibility;
    state.pump_power_mw = cfg.pump_power_mw;
    state.tap = cfg.pump_tap;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Disturbance initialized so the loop starts initial_phase_offset_rad
    // away from the lock point, independent of the geometry.
    double disturbance = phi_lock + cfg.initial_phase_offset_rad - phi_base;

    LockResult result;
    result.series.reserve(n_samples);
    result.plate_offset_rad = plate;

    const std::size_t settle_start = n_samples / 2;
    double sum_sq = 0.0, sum_cos = 0.0, sum_sin = 0.0;
    std::size_t n_settled = 0;

    for (std::size_t i = 0; i < n_samples; ++i) {
        const double phi_p_total = phi_base + k_p * state.actuator_position_m + disturbance;
        const double signal =
            pump_fringe_signal(phi_p_total, cfg.fringe_visibility, cfg.pump_power_mw, cfg.pump_tap);
        const double phi_total = phi_p_total + phi_static + plate;

        result.series.push_back({i * dt, wrap_two_pi(phi_p_total), wrap_two_pi(phi_total), signal});

        if (i >= settle_start) {
            const double dev = wrap_diff(phi_total, target_phi_rad);
            sum_sq += dev * dev;
            sum_cos += std::cos(phi_total);
            sum_sin += std::sin(phi_total);
            ++n_settled;
        }

        state = side_lock_step(state, signal, dt);
        if (state.noise_rms_rad > 0.0) {
            disturbance += state.noise_rms_rad * gauss(rng);
        }
    }

    result.residual_rms_rad = n_settled ? std::sqrt(sum_sq / n_settled) : 0.0;
    result.mean_phi_rad = n_settled ? wrap_two_pi(std::atan2(sum_sin, sum_cos)) : 0.0;
    // Persistently unlocked runs wander over the whole fringe; their
    // wrapped deviation RMS approaches pi/sqrt(3), far above any servo
    // residual of interest.
    result.lock_failure = result.residual_rms_rad > std::numbers::pi / 2.0;
    return result;
}

} // namespace spdcsim
