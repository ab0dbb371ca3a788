#include "state.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "errors.hpp"

namespace spdcsim {

namespace {

constexpr double kPi = std::numbers::pi;

bool all_finite(const Vec4c& v) {
    for (int i = 0; i < 4; ++i) {
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
    }
    return true;
}

double reduce_mod_pi(double theta) {
    double r = std::fmod(theta, kPi);
    if (r < 0.0) r += kPi;
    return r;
}

} // namespace

PolarizationKet::PolarizationKet(const Vec4c& amplitudes) : amps_(amplitudes) {
    if (!all_finite(amps_)) {
        throw std::invalid_argument("PolarizationKet: non-finite amplitude");
    }
    const double n2 = amps_.squaredNorm();
    if (std::abs(n2 - 1.0) > kNormTol) {
        throw std::invalid_argument("PolarizationKet: squared norm deviates from 1 by more than 1e-12");
    }
}

DualPathKet::DualPathKet(const Eigen::Vector2cd& amplitudes, double pump_phase_rad)
    : amps_(amplitudes), pump_phase_rad_(pump_phase_rad) {
    if (!std::isfinite(pump_phase_rad)) {
        throw std::invalid_argument("DualPathKet: non-finite pump phase");
    }
    for (int i = 0; i < 2; ++i) {
        if (!std::isfinite(amps_[i].real()) || !std::isfinite(amps_[i].imag())) {
            throw std::invalid_argument("DualPathKet: non-finite amplitude");
        }
    }
    if (std::abs(amps_.squaredNorm() - 1.0) > kNormTol) {
        throw std::invalid_argument("DualPathKet: squared norm deviates from 1 by more than 1e-12");
    }
}

BiphotonState::BiphotonState(const Mat4c& rho) : rho_(rho) {
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("BiphotonState: matrix not Hermitian within 1e-12");
    }
    if (std::abs(rho_.trace().real() - 1.0) > 1e-12 || std::abs(rho_.trace().imag()) > 1e-12) {
        throw std::invalid_argument("BiphotonState: trace deviates from 1 by more than 1e-12");
    }
    Eigen::SelfAdjointEigenSolver<Mat4c> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw std::invalid_argument("BiphotonState: matrix not positive semidefinite (eigenvalue < -1e-10)");
    }
}

BiphotonState BiphotonState::pure(const PolarizationKet& ket) {
    BiphotonState s;
    s.rho_ = ket.amplitudes() * ket.amplitudes().adjoint();
    return s;
}

BiphotonState BiphotonState::from_matrix_unchecked(const Mat4c& rho) {
    BiphotonState s;
    s.rho_ = rho;
    return s;
}

AnalyzerSetting::AnalyzerSetting(double t1_rad, double t2_rad)
    : theta1_rad(reduce_mod_pi(t1_rad)), theta2_rad(reduce_mod_pi(t2_rad)) {
    if (!std::isfinite(t1_rad) || !std::isfinite(t2_rad)) {
        throw std::invalid_argument("AnalyzerSetting: non-finite angle");
    }
}

AnalyzerSetting AnalyzerSetting::from_degrees(double t1_deg, double t2_deg) {
    return AnalyzerSetting(t1_deg * kPi / 180.0, t2_deg * kPi / 180.0);
}

Mat2c polarizer_projector(double theta_rad) {
    const double c = std::cos(theta_rad);
    const double s = std::sin(theta_rad);
    Mat2c p;
    p << c * c, c * s,
         c * s, s * s;
    return p;
}

DualPathKet build_dual_path_state(double phi_p_rad) {
    if (!std::isfinite(phi_p_rad)) {
        throw std::invalid_argument("build_dual_path_state: non-finite pump phase");
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Eigen::Vector2cd a;
    a << complexd(inv_sqrt2, 0.0),
         std::polar(inv_sqrt2, phi_p_rad);
    return DualPathKet(a, phi_p_rad);
}

PolarizationKet build_output_state(double phi_rad) {
    if (!std::isfinite(phi_rad)) {
        throw std::invalid_argument("build_output_state: non-finite phase");
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Vec4c a;
    a << complexd(0.0, 0.0),
         complexd(inv_sqrt2, 0.0),
         std::polar(inv_sqrt2, phi_rad),
         complexd(0.0, 0.0);
    return PolarizationKet(a);
}

BiphotonState apply_distinguishability(const PolarizationKet& ket, double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw std::invalid_argument("apply_distinguishability: visibility must lie in [0,1]");
    }
    Mat4c rho = visibility * (ket.amplitudes() * ket.amplitudes().adjoint());
    rho(1, 1) += (1.0 - visibility) * 0.5; // H1V2 population
    rho(2, 2) += (1.0 - visibility) * 0.5; // V1H2 population
    return BiphotonState(rho);
}

BiphotonState apply_depolarization(const PolarizationKet& ket, double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw std::invalid_argument("apply_depolarization: visibility must lie in [0,1]");
    }
    Mat4c rho = visibility * (ket.amplitudes() * ket.amplitudes().adjoint());
    rho += (1.0 - visibility) * 0.25 * Mat4c::Identity();
    return BiphotonState(rho);
}

namespace {

Mat4c kron2(const Mat2c& a, const Mat2c& b) {
    Mat4c out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

double expectation(const BiphotonState& state, const Mat4c& op) {
    return (state.rho() * op).trace().real();
}

} // namespace

double coincidence_probability(const BiphotonState& state, const AnalyzerSetting& s) {
    const Mat4c op = kron2(polarizer_projector(s.theta1_rad), polarizer_projector(s.theta2_rad));
    return expectation(state, op);
}

double singles_probability_arm1(const BiphotonState& state, double theta1_rad) {
    return expectation(state, kron2(polarizer_projector(theta1_rad), Mat2c::Identity()));
}

double singles_probability_arm2(const BiphotonState& state, double theta2_rad) {
    return expectation(state, kron2(Mat2c::Identity(), polarizer_projector(theta2_rad)));
}

namespace {

// P(theta2) = (A + B cos 2theta2 + C sin 2theta2) / 2 with
//   A = Tr[rho (Pi1 x I)], B = Tr[rho (Pi1 x Z)], C = Tr[rho (Pi1 x X)].
struct FringeCoefficients {
    double mean;       // A
    double amplitude;  // hypot(B, C)
};

FringeCoefficients fringe_coefficients(const BiphotonState& state, double theta1_rad) {
    Mat2c z; z << 1, 0, 0, -1;
    Mat2c x; x << 0, 1, 1, 0;
    const Mat2c pi1 = polarizer_projector(theta1_rad);
    const double a = expectation(state, kron2(pi1, Mat2c::Identity()));
    const double b = expectation(state, kron2(pi1, z));
    const double c = expectation(state, kron2(pi1, x));
    return {a, std::hypot(b, c)};
}

} // namespace

double fringe_visibility(const BiphotonState& state, double theta1_rad) {
    const FringeCoefficients f = fringe_coefficients(state, theta1_rad);
    if (f.mean <= 0.0) {
        throw UndefinedResultError("fringe_visibility: Pmax + Pmin = 0, visibility undefined");
    }
    return f.amplitude / f.mean;
}

FringeExtrema fringe_extrema(const BiphotonState& state, double theta1_rad) {
    const FringeCoefficients f = fringe_coefficients(state, theta1_rad);
    return {(f.mean + f.amplitude) / 2.0, (f.mean - f.amplitude) / 2.0};
}

double correlation_E(const BiphotonState& state, double a_rad, double b_rad) {
    const double half_pi = kPi / 2.0;
    const double p_pp = coincidence_probability(state, AnalyzerSetting(a_rad, b_rad));
    const double p_oo = coincidence_probability(state, AnalyzerSetting(a_rad + half_pi, b_rad + half_pi));
    const double p_po = coincidence_probability(state, AnalyzerSetting(a_rad, b_rad + half_pi));
    const double p_op = coincidence_probability(state, AnalyzerSetting(a_rad + half_pi, b_rad));
    const double sum = p_pp + p_oo + p_po + p_op;
    if (sum <= 0.0) {
        throw UndefinedResultError("correlation_E: all four coincidence probabilities vanish");
    }
    return (p_pp + p_oo - p_po - p_op) / sum;
}

double chsh_S(const BiphotonState& state, double a_rad, double a_alt_rad,
              double b_rad, double b_alt_rad) {
    const double e_ab = correlation_E(state, a_rad, b_rad);
    const double e_abp = correlation_E(state, a_rad, b_alt_rad);
    const double e_apb = correlation_E(state, a_alt_rad, b_rad);
    const double e_apbp = correlation_E(state, a_alt_rad, b_alt_rad);
    return std::abs(e_ab - e_abp) + std::abs(e_apb + e_apbp);
}

} // namespace spdcsim
