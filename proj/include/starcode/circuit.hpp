#pragma once

// Linearized three-node circuit (two transmons joined by a SQUID coupler):
// normal modes, adiabatic couplings and parametric sideband rates.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "starcode/operators.hpp"

namespace starcode {

/// Capacitances in fF, Josephson energies in GHz.
struct CircuitParams {
  double c_q1 = 165.9;
  double c_q2 = 123.4;
  double c_c = 178.3;
  double c_q12 = 2.0;
  double e_j1 = 12.4;
  double e_j2 = 12.1;
  double e_jc = 1106.0;

  void validate() const {
    const std::pair<const char*, double> fields[] = {{"circuit.c_q1", c_q1}, {"circuit.c_q2", c_q2},
                                                     {"circuit.c_c", c_c},   {"circuit.c_q12", c_q12},
                                                     {"circuit.e_j1", e_j1}, {"circuit.e_j2", e_j2},
                                                     {"circuit.e_jc", e_jc}};
    for (const auto& [name, v] : fields) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name, "must be positive and finite");
    }
  }
};

/// 2 e^2 / h in GHz * fF: the charging matrix is kCharge * C^-1.
inline constexpr double kCharge = 2.0 * 1.602176634e-19 * 1.602176634e-19 / 6.62607015e-34 * 1e-9 * 1e15;

/// Node capacitance matrix in the order (q1, q2, c).
inline Eigen::Matrix3d capacitance_matrix(const CircuitParams& p) {
  Eigen::Matrix3d c;
  c << p.c_q1 + p.c_q12, -p.c_q12, 0.0,  //
      -p.c_q12, p.c_q2 + p.c_q12, 0.0,   //
      0.0, 0.0, p.c_q1 + p.c_q2 + p.c_c;
  return c;
}

namespace detail {

inline double flux_cos(double phi) {
  const double c = std::cos(kPi * phi);
  if (std::abs(c) <= 1e-6) throw ArgumentError("flux too close to half a flux quantum");
  return c;
}

}  // namespace detail

/// Hessian of the quadratic inductive energy (GHz) in phases (q1, q2, c).
inline Eigen::Matrix3d inductive_hessian(const CircuitParams& p, double phi_ext) {
  const double cj = p.e_jc * detail::flux_cos(phi_ext);
  Eigen::Matrix3d k;
  k << p.e_j1, 0.0, -p.e_j1,  //
      0.0, p.e_j2, -p.e_j2,   //
      -p.e_j1, -p.e_j2, p.e_j1 + p.e_j2 + cj;
  return k;
}

struct NormalModes {
  Eigen::Vector3d frequencies;  ///< GHz, ascending
  Eigen::Matrix3d U;            ///< columns: mode shapes, phi = U phi~, U^T C U / kCharge = I
  int coupler = 2;              ///< column with the largest coupler-node weight
};

/// H0 = n^T T n + phi^T K phi / 2 with T = kCharge C^-1. Mode frequencies are
/// sqrt(2 lambda) for the generalized problem K u = lambda T^-1 u.
inline NormalModes normal_modes(const CircuitParams& p, double phi_ext) {
  p.validate();
  const Eigen::Matrix3d c = capacitance_matrix(p);
  if (std::abs(c.determinant()) < 1e-12) throw ArgumentError("normal_modes: singular capacitance matrix");
  const Eigen::Matrix3d k = inductive_hessian(p, phi_ext);
  const Eigen::Matrix3d tinv = c / kCharge;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> es(k, tinv);
  if (es.info() != Eigen::Success) throw ArgumentError("normal_modes: eigen decomposition failed");
  if (es.eigenvalues().minCoeff() <= 0.0) throw ArgumentError("normal_modes: potential is not confining");
  NormalModes out;
  out.frequencies = (2.0 * es.eigenvalues().array()).sqrt().matrix();
  out.U = es.eigenvectors();
  double best = -1.0;
  for (int i = 0; i < 3; ++i) {
    const double w = std::abs(out.U(2, i)) / out.U.col(i).norm();
    if (w > best) {
      best = w;
      out.coupler = i;
    }
  }
  return out;
}

struct AdiabaticCouplings {
  double g1 = 0.0;  ///< inductive, flux tunable (GHz)
  double g2 = 0.0;  ///< capacitive (GHz)
};

/// g1 = sqrt(Ej1 Ej2) / (2 Ejc cos(pi phi)) sqrt(w1 w2); g2 = Cq12 / (2 sqrt(Cq1 Cq2)) sqrt(w1 w2).
inline AdiabaticCouplings adiabatic_couplings(const CircuitParams& p, double phi_dc, double omega_q1,
                                              double omega_q2) {
  p.validate();
  if (!(omega_q1 > 0.0) || !(omega_q2 > 0.0)) throw ArgumentError("adiabatic_couplings: frequencies must be > 0");
  const double w = std::sqrt(omega_q1 * omega_q2);
  AdiabaticCouplings out;
  out.g1 = std::sqrt(p.e_j1 * p.e_j2) / (2.0 * p.e_jc * detail::flux_cos(phi_dc)) * w;
  out.g2 = p.c_q12 / (2.0 * std::sqrt(p.c_q1 * p.c_q2)) * w;
  return out;
}

/// <psi1| (a1^dagger + a1)(a2^dagger + a2) |psi2> on the two-qutrit space.
inline cplx bosonic_enhancement(const StateVector& psi1, const StateVector& psi2) {
  if (psi1.dims() != qutrit_pair_dims() || psi2.dims() != qutrit_pair_dims()) {
    throw DimensionError("bosonic_enhancement: expects two-qutrit states");
  }
  const Matrix x = destroy(3).data() + destroy(3).data().adjoint();
  return psi1.amplitudes().dot(kron(x, x) * psi2.amplitudes());
}

/// First-order flux-modulation sideband rate (MHz) between two transmon states;
/// eps is the modulation amplitude of pi Phi / Phi0 in radians.
inline double qq_sideband_rate(const CircuitParams& p, double phi_dc, double eps, const StateVector& psi1,
                               const StateVector& psi2, double omega_q1, double omega_q2) {
  p.validate();
  const double c = detail::flux_cos(phi_dc);
  const double t = std::tan(kPi * phi_dc);
  const double a12 = std::abs(bosonic_enhancement(psi1, psi2));
  const double ghz = std::sqrt(p.e_j1 * p.e_j2) / (2.0 * p.e_jc) * std::sqrt(omega_q1 * omega_q2) * eps * t / c * a12;
  return 1e3 * ghz;
}

/// Second-order QR sideband rate 16 g^3 eps^2 / delta^4 (all MHz).
inline double qr_sideband_rate(double g_qr, double eps_q, double delta) {
  if (delta == 0.0) throw ArgumentError("qr_sideband_rate: zero detuning");
  return 16.0 * g_qr * g_qr * g_qr * eps_q * eps_q / std::pow(delta, 4);
}

}  // namespace starcode
