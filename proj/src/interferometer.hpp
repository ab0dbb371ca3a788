#ifndef SPDCSIM_INTERFEROMETER_HPP
#define SPDCSIM_INTERFEROMETER_HPP

// Pump Mach-Zehnder phase bookkeeping. The output-state phase is
//
//   phi = k_p (L_B - L_A) + (k_s + k_i) (L'_B - L'_A)
//         - hwp(omega_s) - hwp(omega_i) + plate_offset
//
// reduced to [0, 2pi). Under collinear phase matching k_s + k_i = k_p, so
// phi follows the pump interferometer alone up to fixed offsets; the
// side-lock loop below stabilizes it by servoing the detected pump fringe
// to a setpoint on the fringe slope.

#include <cstdint>
#include <vector>

namespace spdcsim {

struct PathGeometry {
    double pump_arm_a_m = 0.0;   // BS -> crystal, arm A
    double pump_arm_b_m = 0.0;   // BS -> crystal, arm B
    double out_arm_a_m = 0.0;    // crystal -> PBS, arm A
    double out_arm_b_m = 0.0;    // crystal -> PBS, arm B
    // Half-wave-plate phase difference, applied at both the signal and the
    // idler frequency (ideal broadband plate: frequency independent).
    double hwp_retardance_rad = 0.0;
    // Dispersive-plate contribution; shifts the output phase relative to
    // the pump fringe and thereby selects the locked output state.
    double plate_offset_rad = 0.0;

    void validate() const;
};

/// Output-state phase for the given wavevectors, in [0, 2pi).
double output_phase(const PathGeometry& g, double k_p, double k_s, double k_i);

/// Detected pump fringe: I = tap * power/2 * (1 + v cos phi_p).
/// `tap` models the fraction of pump light reaching the photodiode.
double pump_fringe_signal(double phi_p_rad, double fringe_visibility, double power_mw, double tap);

/// State of the side-lock servo between samples.
struct LockState {
    double actuator_position_m = 0.0;  // path-length offset added to arm B
    double setpoint = 0.0;             // detector-signal units
    double gain_m_per_unit = 0.0;      // actuator step per unit of signal error
    double noise_rms_rad = 0.0;        // per-sample phase random-walk step
    double phase_estimate_rad = 0.0;   // fringe phase inferred from the signal
    double travel_limit_m = 0.0;       // |actuator| clamp; <= 0 disables
    double fringe_visibility = 1.0;
    double pump_power_mw = 1.0;
    double tap = 0.2;
    bool saturated = false;
};

/// One proportional-control step: moves the actuator by
/// gain * (setpoint - measured), clamped to the travel range (clamping is
/// flagged, not thrown), and refreshes the phase estimate.
LockState side_lock_step(const LockState& s, double measured_signal, double dt_s);

struct LockConfig {
    double sample_rate_hz = 10000.0;
    double gain_m_per_unit = 3.2e-7;
    double phase_noise_rad_per_sqrt_s = 5.0;
    double setpoint_fraction = 0.5;    // of the fringe maximum
    double actuator_travel_m = 5e-6;
    double pump_tap = 0.2;
    double pump_power_mw = 1.0;
    double fringe_visibility = 1.0;
    double initial_phase_offset_rad = 0.3;
};

struct LockSample {
    double t_s;
    double phi_p_rad;   // pump fringe phase, wrapped to [0, 2pi)
    double phi_rad;     // output-state phase, wrapped to [0, 2pi)
    double signal;      // detected fringe signal
};

struct LockResult {
    std::vector<LockSample> series;
    double residual_rms_rad = 0.0;  // RMS of phi - target over the settled half
    double mean_phi_rad = 0.0;      // circular mean of phi over the settled half
    double plate_offset_rad = 0.0;  // offset used to place phi at the target
    bool lock_failure = false;
};

/// Runs the servo for `duration_s` with a Gaussian random-walk phase
/// disturbance. The requested output phase is reached by choosing the
/// dispersive-plate offset; the pump fringe itself always locks to the
/// setpoint on the positive fringe slope. Reproducible for a fixed seed.
LockResult simulate_lock(const PathGeometry& g, const LockConfig& cfg,
                         double k_p, double k_s, double k_i,
                         double target_phi_rad, double duration_s, std::uint64_t seed);

/// Wraps an angle to [0, 2pi).
double wrap_two_pi(double angle_rad);

/// Signed difference a-b wrapped to (-pi, pi].
double wrap_diff(double a_rad, double b_rad);

} // namespace spdcsim

#endif
