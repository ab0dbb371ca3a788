#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "interferometer.hpp"

using namespace spdcsim;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLambdaP = 398.5e-9;
const double kKp = 2.0 * kPi / kLambdaP;

PathGeometry balanced() {
    PathGeometry g;
    g.pump_arm_a_m = 0.35;
    g.pump_arm_b_m = 0.35;
    g.out_arm_a_m = 0.25;
    g.out_arm_b_m = 0.25;
    g.hwp_retardance_rad = 0.0;
    g.plate_offset_rad = 0.0;
    return g;
}

LockConfig default_loop() {
    return LockConfig{};
}

} // namespace

TEST_CASE("output phase: symmetric interferometer gives zero") {
    CHECK(output_phase(balanced(), kKp, kKp / 2, kKp / 2) == doctest::Approx(0.0).epsilon(1e-12));

    // An ideal broadband half-wave plate contributes -2 pi, invisible mod 2 pi.
    PathGeometry g = balanced();
    g.hwp_retardance_rad = kPi;
    const double phi = output_phase(g, kKp, kKp / 2, kKp / 2);
    CHECK((phi < 1e-9 || phi > 2.0 * kPi - 1e-9));
}

TEST_CASE("output phase invariant under the signal/idler split at fixed pump wavevector") {
    std::mt19937 rng(404);
    std::uniform_real_distribution<double> len(0.05, 0.8);
    std::uniform_real_distribution<double> frac(0.2, 0.8);
    std::uniform_real_distribution<double> off(-kPi, kPi);
    for (int i = 0; i < 1000; ++i) {
        PathGeometry g;
        g.pump_arm_a_m = len(rng);
        g.pump_arm_b_m = len(rng);
        g.out_arm_a_m = len(rng);
        g.out_arm_b_m = len(rng);
        g.hwp_retardance_rad = off(rng);
        g.plate_offset_rad = off(rng);
        // Non-degenerate split with the sum pinned exactly: at k ~ 1.6e7
        // rad/m and metre-scale arms, a one-ulp drift of the sum already
        // costs ~1e-9 rad, so the comparison state shares the sum bitwise.
        const double f = frac(rng);
        const double ks = f * kKp;
        const double ki = kKp - ks;
        const double sum = ks + ki;
        const double phi_a = output_phase(g, kKp, ks, ki);
        const double phi_b = output_phase(g, kKp, sum / 2.0, sum / 2.0);
        CHECK(std::abs(wrap_diff(phi_a, phi_b)) < 1e-12);
        // Exchange symmetry of k_s and k_i.
        const double phi_c = output_phase(g, kKp, ki, ks);
        CHECK(std::abs(wrap_diff(phi_a, phi_c)) < 1e-12);
    }
}

TEST_CASE("half a pump wavelength on arm B shifts the phase by pi") {
    PathGeometry g = balanced();
    const double phi0 = output_phase(g, kKp, kKp / 2, kKp / 2);
    g.pump_arm_b_m += kLambdaP / 2.0;
    const double phi1 = output_phase(g, kKp, kKp / 2, kKp / 2);
    CHECK(std::abs(wrap_diff(phi1, phi0 + kPi)) < 1e-6);
}

TEST_CASE("output phase is periodic in the arm difference with period lambda_p") {
    PathGeometry g = balanced();
    const double phi0 = output_phase(g, kKp, kKp / 2, kKp / 2);
    for (int n = 1; n <= 5; ++n) {
        PathGeometry shifted = g;
        shifted.pump_arm_b_m += n * kLambdaP;
        const double phi = output_phase(shifted, kKp, kKp / 2, kKp / 2);
        CHECK(std::abs(wrap_diff(phi, phi0)) < 1e-7);  // fp-limited at k ~ 1.6e7
    }
}

TEST_CASE("output phase validates inputs") {
    PathGeometry g = balanced();
    g.pump_arm_a_m = -1.0;
    CHECK_THROWS_AS(output_phase(g, kKp, kKp / 2, kKp / 2), std::invalid_argument);
    CHECK_THROWS_AS(output_phase(balanced(), -kKp, kKp / 2, kKp / 2), std::invalid_argument);
}

TEST_CASE("pump fringe signal values") {
    CHECK(pump_fringe_signal(0.0, 1.0, 1.0, 0.2) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(pump_fringe_signal(kPi, 1.0, 1.0, 0.2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pump_fringe_signal(kPi / 2.0, 1.0, 1.0, 0.2) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(pump_fringe_signal(0.0, 1.5, 1.0, 0.2), std::invalid_argument);
}

TEST_CASE("side lock step: zero error leaves the actuator in place") {
    LockState s;
    s.setpoint = 0.1;
    s.gain_m_per_unit = 3.2e-7;
    s.travel_limit_m = 5e-6;
    const LockState next = side_lock_step(s, 0.1, 1e-4);
    CHECK(next.actuator_position_m == s.actuator_position_m);
    CHECK_FALSE(next.saturated);
    CHECK_THROWS_AS(side_lock_step(s, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("side lock step: saturation is flagged, not thrown") {
    LockState s;
    s.setpoint = 0.1;
    s.gain_m_per_unit = 1.0;  // huge on purpose
    s.travel_limit_m = 1e-6;
    const LockState next = side_lock_step(s, 0.0, 1e-4);
    CHECK(next.actuator_position_m == doctest::Approx(1e-6));
    CHECK(next.saturated);
}

TEST_CASE("proportional loop: constant disturbance leaves error ~ disturbance/gain") {
    // Discrete loop e_{n+1} = (1-K) e_n + d has steady state d / K.
    const LockConfig cfg = default_loop();
    const double dt = 1.0 / cfg.sample_rate_hz;
    const double slope = cfg.pump_tap * cfg.pump_power_mw * cfg.fringe_visibility / 2.0;
    const double big_k = kKp * cfg.gain_m_per_unit * slope;

    const double d = 0.001;  // rad per step
    double e = 0.0;
    LockState s;
    s.setpoint = cfg.setpoint_fraction * cfg.pump_tap * cfg.pump_power_mw / 2.0 *
                 (1.0 + cfg.fringe_visibility);
    s.gain_m_per_unit = cfg.gain_m_per_unit;
    s.travel_limit_m = cfg.actuator_travel_m;
    s.fringe_visibility = cfg.fringe_visibility;
    s.pump_power_mw = cfg.pump_power_mw;
    s.tap = cfg.pump_tap;

    const double phi_lock = 2.0 * kPi - std::acos(0.0);  // 3 pi / 2 at half maximum
    double x_prev = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const double signal = pump_fringe_signal(phi_lock + e, cfg.fringe_visibility,
                                                 cfg.pump_power_mw, cfg.pump_tap);
        const LockState next = side_lock_step(s, signal, dt);
        e += kKp * (next.actuator_position_m - x_prev) + d;
        x_prev = next.actuator_position_m;
        s = next;
    }
    CHECK(std::abs(e) < 1.5 * d / big_k);
    CHECK(std::abs(e - d / big_k) < 0.2 * d / big_k);
}

TEST_CASE("simulate lock: zero noise converges to zero residual") {
    LockConfig cfg = default_loop();
    cfg.phase_noise_rad_per_sqrt_s = 0.0;
    const auto res = simulate_lock(balanced(), cfg, kKp, kKp / 2, kKp / 2, kPi, 1.0, 7);
    CHECK_FALSE(res.lock_failure);
    CHECK(res.residual_rms_rad < 1e-10);
    CHECK(std::abs(wrap_diff(res.mean_phi_rad, kPi)) < 1e-10);
}

TEST_CASE("simulate lock: default configuration stays under the residual budget") {
    const auto res = simulate_lock(balanced(), default_loop(), kKp, kKp / 2, kKp / 2, kPi, 1.0, 7);
    CHECK_FALSE(res.lock_failure);
    CHECK(res.residual_rms_rad < 0.1);
    CHECK(res.residual_rms_rad > 0.0);
}

TEST_CASE("simulate lock: deterministic for a fixed seed") {
    const auto a = simulate_lock(balanced(), default_loop(), kKp, kKp / 2, kKp / 2, kPi, 0.3, 99);
    const auto b = simulate_lock(balanced(), default_loop(), kKp, kKp / 2, kKp / 2, kPi, 0.3, 99);
    REQUIRE(a.series.size() == b.series.size());
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        CHECK(a.series[i].phi_p_rad == b.series[i].phi_p_rad);
        CHECK(a.series[i].signal == b.series[i].signal);
    }
    CHECK(a.residual_rms_rad == b.residual_rms_rad);
}

TEST_CASE("simulate lock: open loop random walk is flagged as failure") {
    LockConfig cfg = default_loop();
    cfg.gain_m_per_unit = 0.0;
    cfg.phase_noise_rad_per_sqrt_s = 20.0;
    const auto res = simulate_lock(balanced(), cfg, kKp, kKp / 2, kKp / 2, kPi, 1.0, 3);
    CHECK(res.lock_failure);
}

TEST_CASE("doubling the noise at fixed gain at most doubles the residual (3 sigma)") {
    const LockConfig base = default_loop();
    LockConfig loud = base;
    loud.phase_noise_rad_per_sqrt_s *= 2.0;

    std::vector<double> ratio;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto a = simulate_lock(balanced(), base, kKp, kKp / 2, kKp / 2, kPi, 0.5, seed);
        const auto b = simulate_lock(balanced(), loud, kKp, kKp / 2, kKp / 2, kPi, 0.5, seed + 1000);
        ratio.push_back(b.residual_rms_rad / a.residual_rms_rad);
    }
    double mean = 0.0;
    for (double r : ratio) mean += r;
    mean /= ratio.size();
    double var = 0.0;
    for (double r : ratio) var += (r - mean) * (r - mean);
    var /= ratio.size() * (ratio.size() - 1);
    CHECK(mean - 3.0 * std::sqrt(var) < 2.0);
    CHECK(mean > 1.0);  // noise does degrade the lock
}
