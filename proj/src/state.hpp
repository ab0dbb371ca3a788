#ifndef SPDCSIM_STATE_HPP
#define SPDCSIM_STATE_HPP

// Two-photon polarization states of a dual-path downconversion source and
// the analyzer-resolved quantities derived from them: coincidence
// probabilities, fringe visibilities, correlation functions and the CHSH
// statistic.
//
// Basis ordering used everywhere in this library:
//     index 0: H1 H2
//     index 1: H1 V2
//     index 2: V1 H2
//     index 3: V1 V2
// where 1/2 label the two output ports and H/V the linear polarizations.

#include <complex>

#include <Eigen/Dense>

namespace spdcsim {

using complexd = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;
using Mat4c = Eigen::Matrix4cd;
using Vec4c = Eigen::Vector4cd;

inline constexpr double kNormTol = 1e-12;

/// Pure two-photon polarization ket over (H1H2, H1V2, V1H2, V1V2).
class PolarizationKet {
public:
    /// Validates finiteness and unit norm (within 1e-12).
    explicit PolarizationKet(const Vec4c& amplitudes);

    const Vec4c& amplitudes() const { return amps_; }

private:
    Vec4c amps_;
};

/// Pre-recombination superposition over the two pump arms,
/// basis (H_A V_A, H_B V_B). Signal/idler frequency labels are carried by
/// the phase-matching layer, not by this amplitude pair.
class DualPathKet {
public:
    DualPathKet(const Eigen::Vector2cd& amplitudes, double pump_phase_rad);

    const Eigen::Vector2cd& amplitudes() const { return amps_; }
    double pump_phase_rad() const { return pump_phase_rad_; }

private:
    Eigen::Vector2cd amps_;
    double pump_phase_rad_;
};

/// Two-photon polarization density matrix. Construction enforces
/// hermiticity (1e-12 elementwise), unit trace (1e-12) and positive
/// semidefiniteness (eigenvalues >= -1e-10).
class BiphotonState {
public:
    explicit BiphotonState(const Mat4c& rho);

    static BiphotonState pure(const PolarizationKet& ket);

    /// Bypasses the invariant checks. Intended for tests probing the
    /// behaviour of downstream operations on degenerate inputs.
    static BiphotonState from_matrix_unchecked(const Mat4c& rho);

    const Mat4c& rho() const { return rho_; }

private:
    BiphotonState() = default;
    Mat4c rho_;
};

/// Transmission-axis angles of the two polarization analyzers, stored
/// reduced modulo pi (the projector period).
struct AnalyzerSetting {
    double theta1_rad;
    double theta2_rad;

    AnalyzerSetting(double t1_rad, double t2_rad);
    static AnalyzerSetting from_degrees(double t1_deg, double t2_deg);
};

/// Projector onto linear polarization at angle theta from horizontal.
Mat2c polarizer_projector(double theta_rad);

/// Equal-amplitude superposition of the two crystal paths with pump phase
/// phi_p: amplitudes (1/sqrt2, e^{i phi_p}/sqrt2).
DualPathKet build_dual_path_state(double phi_p_rad);

/// Post-recombination state (0, 1/sqrt2, e^{i phi}/sqrt2, 0).
/// phi = 0 gives the triplet |psi+>, phi = pi the singlet |psi->.
PolarizationKet build_output_state(double phi_rad);

/// Path-distinguishability decoherence: keeps the HV/VH populations intact
/// and scales the coherence between them by `visibility`.
///   rho = V |ket><ket| + (1-V)/2 (|H1V2><H1V2| + |V1H2><V1H2|)
/// Fringes in the H/V basis stay at full contrast; the 45-degree fringe
/// visibility of the phase-phi states equals V.
BiphotonState apply_distinguishability(const PolarizationKet& ket, double visibility);

/// Isotropic admixture: rho = V |ket><ket| + (1-V) I/4.
/// For phase-phi states all correlation functions scale by V, so the CHSH
/// statistic at the optimal angles is 2*sqrt(2)*V.
BiphotonState apply_depolarization(const PolarizationKet& ket, double visibility);

/// P = Tr[rho (Pi(theta1) x Pi(theta2))].
double coincidence_probability(const BiphotonState& state, const AnalyzerSetting& s);

/// Marginal transmission probability of the arm-1 (arm-2) analyzer.
double singles_probability_arm1(const BiphotonState& state, double theta1_rad);
double singles_probability_arm2(const BiphotonState& state, double theta2_rad);

/// (Pmax - Pmin)/(Pmax + Pmin) over theta2 at fixed theta1, computed from
/// the closed sinusoidal form of P(theta2) rather than a numeric scan.
/// Throws UndefinedResultError when Pmax + Pmin = 0.
double fringe_visibility(const BiphotonState& state, double theta1_rad);

/// Analytic extrema of P(theta2) at fixed theta1.
struct FringeExtrema {
    double p_max;
    double p_min;
};
FringeExtrema fringe_extrema(const BiphotonState& state, double theta1_rad);

/// E(a,b) = [P(a,b) + P(a+90,b+90) - P(a,b+90) - P(a+90,b)] / (sum of the four).
double correlation_E(const BiphotonState& state, double a_rad, double b_rad);

/// S = |E(a,b) - E(a,b')| + |E(a',b) + E(a',b')|.
double chsh_S(const BiphotonState& state, double a_rad, double a_alt_rad,
              double b_rad, double b_alt_rad);

} // namespace spdcsim

#endif
