#pragma once

// Star-code states, drive Hamiltonians in the lab, logical-static and fully
// rotated frames, and the Lindblad collapse-operator set.
//
// API units: ordinary frequencies in MHz, times in us. Every Hamiltonian
// matrix produced here is in angular units (rad/us); the 2*pi factor is
// applied once, while the HamiltonianSpec is assembled.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "starcode/operators.hpp"

namespace starcode {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct DeviceParams {
  double omega_q1 = 3204.9;  // MHz
  double omega_q2 = 3662.5;
  double alpha_1 = -116.4;
  double alpha_2 = -159.6;
  double omega_r1 = 4994.6;
  double omega_r2 = 5450.5;
  double chi_1 = -0.180;
  double chi_2 = -0.330;
  double zz_ff1 = -0.171;
  double zz_ff2 = -0.289;
  /// J[a-1][b-1] multiplies n_q1^a n_q2^b.
  std::array<std::array<double, 2>, 2> J{{{-0.312, -0.049}, {0.025, -0.043}}};

  /// Device frequencies without external drives (MHz).
  static DeviceParams measured() { return {}; }

  void validate() const {
    if (!(alpha_1 < 0.0)) throw ConfigError("device.alpha_1", "anharmonicity must be negative");
    if (!(alpha_2 < 0.0)) throw ConfigError("device.alpha_2", "anharmonicity must be negative");
    if (!(omega_r1 > omega_q1)) throw ConfigError("device.omega_r1", "resonator must sit above its transmon");
    if (!(omega_r2 > omega_q2)) throw ConfigError("device.omega_r2", "resonator must sit above its transmon");
  }
};

struct DriveConfig {
  double w_r = 0.0;  ///< red QQ pair rate (MHz)
  double w_b = 0.0;  ///< blue QQ pair rate
  double nu_r = 0.0;
  double nu_b = 0.0;
  double omega_qr1 = 0.0;
  double omega_qr2 = 0.0;
  /// Phases of the |ee><gf|, |ee><fg|, |ee><gg|, |ee><ff| tones (rad).
  std::array<double, 4> phases{0.0, 0.0, 0.0, 0.0};

  void validate() const {
    const std::pair<const char*, double> rates[] = {
        {"drive.w_r", w_r}, {"drive.w_b", w_b}, {"drive.omega_qr1", omega_qr1}, {"drive.omega_qr2", omega_qr2}};
    for (const auto& [name, v] : rates) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(name, "rate must be finite and >= 0");
    }
  }
};

/// Lindblad channel timescales. Infinite times switch a channel off.
/// kappa is the resonator linewidth kappa/2pi in MHz, so the photon decay
/// rate entering the dissipator is 2*pi*kappa per us.
struct NoiseModel {
  double t1_ge_1 = kInf, t1_ge_2 = kInf;
  double t1_ef_1 = kInf, t1_ef_2 = kInf;
  double t_phi_1 = kInf, t_phi_2 = kInf;
  double t1_up_1 = kInf, t1_up_2 = kInf;
  double kappa_1 = 0.5, kappa_2 = 0.5;
  double n_res = 0.0;
  double t_phi_ff = kInf;

  void validate() const {
    const std::pair<const char*, double> times[] = {
        {"noise.t1_ge_1", t1_ge_1}, {"noise.t1_ge_2", t1_ge_2}, {"noise.t1_ef_1", t1_ef_1},
        {"noise.t1_ef_2", t1_ef_2}, {"noise.t_phi_1", t_phi_1}, {"noise.t_phi_2", t_phi_2},
        {"noise.t1_up_1", t1_up_1}, {"noise.t1_up_2", t1_up_2}, {"noise.t_phi_ff", t_phi_ff}};
    for (const auto& [name, v] : times) {
      if (!(v > 0.0)) throw ConfigError(name, "time must be > 0");
    }
    if (!(kappa_1 > 0.0) || !std::isfinite(kappa_1)) throw ConfigError("noise.kappa_1", "must be > 0");
    if (!(kappa_2 > 0.0) || !std::isfinite(kappa_2)) throw ConfigError("noise.kappa_2", "must be > 0");
    if (!(n_res >= 0.0 && n_res < 1.0)) throw ConfigError("noise.n_res", "must satisfy 0 <= n_res < 1");
  }
};

/// Experiment arms; the first three have a bundled parameter preset.
enum class Arm { FreeDecay, Echo4QQ, Aqec, IdealBreakeven };

inline const char* to_string(Arm a) {
  switch (a) {
    case Arm::FreeDecay: return "free_decay";
    case Arm::Echo4QQ: return "echo_4qq";
    case Arm::Aqec: return "aqec";
    case Arm::IdealBreakeven: return "ideal_breakeven";
  }
  return "?";
}

inline std::optional<Arm> parse_arm(const std::string& s) {
  if (s == "free_decay") return Arm::FreeDecay;
  if (s == "echo_4qq") return Arm::Echo4QQ;
  if (s == "aqec") return Arm::Aqec;
  if (s == "ideal_breakeven") return Arm::IdealBreakeven;
  return std::nullopt;
}

struct ArmParameters {
  DeviceParams device;
  DriveConfig drive;
  NoiseModel noise;
};

/// Master-equation parameter columns used to reproduce the three experiment arms.
inline ArmParameters arm_preset(Arm arm) {
  ArmParameters p;
  p.device.chi_1 = p.device.chi_2 = 0.0;
  p.device.zz_ff1 = p.device.zz_ff2 = 0.0;
  NoiseModel& n = p.noise;
  n.kappa_1 = 0.53;
  n.kappa_2 = 0.48;
  switch (arm) {
    case Arm::FreeDecay:
      n.t1_ge_1 = 18.0, n.t1_ge_2 = 8.0;
      n.t1_ef_1 = n.t1_ef_2 = 33.0;
      n.t_phi_1 = n.t_phi_2 = 15.0;
      n.t_phi_ff = 4.4;
      break;
    case Arm::Echo4QQ:
      n.t1_ge_1 = 21.0, n.t1_ge_2 = 9.0;
      n.t1_ef_1 = n.t1_ef_2 = 29.0;
      n.t_phi_1 = n.t_phi_2 = 23.0;
      n.t_phi_ff = 80.0;
      p.drive.w_r = 1.0, p.drive.w_b = 1.7;
      p.drive.nu_r = 1.5, p.drive.nu_b = 0.0;
      break;
    case Arm::Aqec:
      n.t1_ge_1 = 21.0, n.t1_ge_2 = 9.0;
      n.t1_ef_1 = n.t1_ef_2 = 23.0;
      n.t_phi_1 = n.t_phi_2 = 23.0;
      n.t1_up_1 = n.t1_up_2 = 600.0;
      n.t_phi_ff = 80.0;
      n.n_res = 0.03;
      p.device.chi_1 = p.device.chi_2 = -0.2;
      p.device.zz_ff1 = 0.6, p.device.zz_ff2 = 2.2;
      p.drive.w_r = 1.45, p.drive.w_b = 1.25;
      p.drive.nu_r = 0.8, p.drive.nu_b = -0.9;
      p.drive.omega_qr1 = p.drive.omega_qr2 = 0.39;
      break;
    case Arm::IdealBreakeven:
      // Photon loss only; f->e decays twice as fast as e->g.
      n.t1_ge_1 = n.t1_ge_2 = 10.0;
      n.t1_ef_1 = n.t1_ef_2 = 5.0;
      n.kappa_1 = n.kappa_2 = 0.5;
      p.drive.w_r = p.drive.w_b = 5.0;
      p.drive.nu_r = 2.5, p.drive.nu_b = -2.5;
      p.drive.omega_qr1 = p.drive.omega_qr2 = 1.0;
      break;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Two-transmon building blocks

/// |ab><cd| on the two-transmon factor.
inline LabeledOperator pair_op(int a, int b, int c, int d) {
  Matrix m = Matrix::Zero(9, 9);
  m(3 * a + b, 3 * c + d) = 1.0;
  return {qutrit_pair_dims(), m};
}
inline LabeledOperator pair_proj(int a, int b) { return pair_op(a, b, a, b); }

/// |ab><cd| tensored with the resonator identity.
inline LabeledOperator full_pair_op(int a, int b, int c, int d) { return extend(pair_op(a, b, c, d), full_dims()); }
inline LabeledOperator full_pair_proj(int a, int b) { return full_pair_op(a, b, a, b); }

inline LabeledOperator transmon_destroy(int site) { return embed(destroy(3), site, full_dims()); }
inline LabeledOperator resonator_destroy(int site) { return embed(destroy(2), site, full_dims()); }
inline LabeledOperator transmon_number(int site) { return embed(number(3), site, full_dims()); }
inline LabeledOperator resonator_number(int site) { return embed(number(2), site, full_dims()); }

enum class StateLabel { L0, L1, Lx, E01, E02, E11, E12 };

inline std::optional<StateLabel> parse_state_label(const std::string& s) {
  static const std::pair<const char*, StateLabel> table[] = {
      {"L0", StateLabel::L0},   {"L1", StateLabel::L1},   {"Lx", StateLabel::Lx},   {"E01", StateLabel::E01},
      {"E02", StateLabel::E02}, {"E11", StateLabel::E11}, {"E12", StateLabel::E12}};
  for (const auto& [name, label] : table) {
    if (s == name) return label;
  }
  return std::nullopt;
}

inline const char* to_string(StateLabel l) {
  switch (l) {
    case StateLabel::L0: return "L0";
    case StateLabel::L1: return "L1";
    case StateLabel::Lx: return "Lx";
    case StateLabel::E01: return "E01";
    case StateLabel::E02: return "E02";
    case StateLabel::E11: return "E11";
    case StateLabel::E12: return "E12";
  }
  return "?";
}

/// Two-transmon amplitudes (9 entries) of a logical or error state.
inline Vector pair_amplitudes(StateLabel label) {
  Vector v = Vector::Zero(9);
  const double r = 1.0 / std::sqrt(2.0);
  auto at = [&](int a, int b) -> cplx& { return v(3 * a + b); };
  switch (label) {
    case StateLabel::L0:
      at(g, f) = r, at(f, g) = -r;
      break;
    case StateLabel::L1:
      at(g, g) = r, at(f, f) = -r;
      break;
    case StateLabel::Lx:  // (L0 - L1)/sqrt2
      at(g, f) = 0.5, at(f, g) = -0.5, at(g, g) = -0.5, at(f, f) = 0.5;
      break;
    // E_jk: logical state j after transmon k lost a photon.
    case StateLabel::E01: at(e, g) = 1.0; break;
    case StateLabel::E02: at(g, e) = 1.0; break;
    case StateLabel::E11: at(e, f) = 1.0; break;
    case StateLabel::E12: at(f, e) = 1.0; break;
  }
  return v;
}

/// Named state with both resonators in vacuum.
inline StateVector logical_state(StateLabel label) {
  const StateVector pair(qutrit_pair_dims(), pair_amplitudes(label));
  return tensor({pair, StateVector::basis({2, 2}, {0, 0})});
}

/// Error-subspace projector (two-transmon factor tensored with resonator identity).
/// L0: |ge><ge| + |eg><eg|; L1: |ef><ef| + |fe><fe|; Lx: both.
inline LabeledOperator error_projector(StateLabel label) {
  const LabeledOperator eps0 = pair_proj(g, e) + pair_proj(e, g);
  const LabeledOperator eps1 = pair_proj(e, f) + pair_proj(f, e);
  switch (label) {
    case StateLabel::L0: return extend(eps0, full_dims());
    case StateLabel::L1: return extend(eps1, full_dims());
    case StateLabel::Lx: return extend(eps0 + eps1, full_dims());
    default: break;
  }
  throw ArgumentError(std::string("error_projector: no error subspace for label ") + to_string(label));
}

/// Error-transparent logical X restricted to {g, f}: (|gg>+|fg>)(<gf|+<ff|)/2 + h.c.
inline LabeledOperator logical_x_pair() {
  const LabeledOperator half = 0.5 * (pair_op(g, g, g, f) + pair_op(g, g, f, f) + pair_op(f, g, g, f) + pair_op(f, g, f, f));
  return half + half.adjoint();
}

// ---------------------------------------------------------------------------
// Hamiltonians

struct DrivenTerm {
  std::function<double(double)> coefficient;  ///< real, t in us
  LabeledOperator op;                          ///< Hermitian
};

/// H(t) = constant + sum_k c_k(t) O_k, angular units.
struct HamiltonianSpec {
  LabeledOperator constant;
  std::vector<DrivenTerm> driven;

  const Dims& dims() const noexcept { return constant.dims(); }
  bool time_independent() const noexcept { return driven.empty(); }

  Matrix at(double t) const {
    Matrix h = constant.data();
    for (const auto& term : driven) h += term.coefficient(t) * term.op.data();
    return h;
  }
};

/// Frequency shifts of the tone pairs, used for calibration sweeps (MHz).
/// Raising the red-pair centre by d detunes |ee><->|gf> by +d and |ee><->|fg> by -d;
/// the blue pair likewise moves |ff> by +d and |gg> by -d.
struct SidebandOffsets {
  double red_pair_center = 0.0;
  double blue_pair_center = 0.0;
  double qr1 = 0.0;
  double qr2 = 0.0;
};

/// QR tone offsets that put |e0> <-> |f1> on resonance for the L0 manifold
/// once the dispersive shift chi n_q n_r is included (|f1> sits 2 chi higher).
inline SidebandOffsets l0_resonant_offsets(const DeviceParams& d) {
  SidebandOffsets off;
  off.qr1 = 2.0 * d.chi_1;
  off.qr2 = 2.0 * d.chi_2;
  return off;
}

namespace detail {

/// Adds (amp/2)(P e^{i theta(t)} + h.c.) with theta = 2 pi nu t + phase, amp in MHz.
inline void add_coupling(LabeledOperator& constant, std::vector<DrivenTerm>& driven, const LabeledOperator& p,
                         double amp, double nu, double phase) {
  if (amp == 0.0) return;
  const double scale = kTwoPi * amp / 2.0;
  const cplx i(0.0, 1.0);
  const LabeledOperator x = p + p.adjoint();
  const LabeledOperator y = i * p - i * p.adjoint();
  if (nu == 0.0) {
    constant += (scale * std::cos(phase)) * x;
    constant += (scale * std::sin(phase)) * y;
    return;
  }
  const double w = kTwoPi * nu;
  driven.push_back({[scale, w, phase](double t) { return scale * std::cos(w * t + phase); }, x});
  driven.push_back({[scale, w, phase](double t) { return scale * std::sin(w * t + phase); }, y});
}

/// Diagonal energies shared by the logical-static and rotated frames.
inline LabeledOperator anharmonic_frame_terms(const DeviceParams& d) {
  LabeledOperator h = (-d.alpha_1 / 2.0) * (full_pair_proj(e, g) + full_pair_proj(e, f));
  h += (-d.alpha_2 / 2.0) * (full_pair_proj(g, e) + full_pair_proj(f, e));
  h += (-d.alpha_1 / 2.0) * resonator_number(R1);
  h += (-d.alpha_2 / 2.0) * resonator_number(R2);
  return kTwoPi * h;
}

/// |e0><f1| on each transmon-resonator pair, for both partner states.
inline LabeledOperator qr_lowering(int j) {
  const Dims& fd = full_dims();
  const LabeledOperator res = embed(transition(2, 0, 1), j == 1 ? R1 : R2, fd);
  LabeledOperator pair = j == 1 ? full_pair_op(e, g, f, g) + full_pair_op(e, f, f, f)
                                : full_pair_op(g, e, g, f) + full_pair_op(f, e, f, f);
  return pair * res;
}

struct ToneSet {
  LabeledOperator op;
  double amp;
  double nu;
  double phase;
};

inline std::vector<ToneSet> qq_tones(const DriveConfig& dr, const SidebandOffsets& off) {
  return {
      {full_pair_op(e, e, g, f), dr.w_r, dr.nu_r + off.red_pair_center, dr.phases[0]},
      {full_pair_op(e, e, f, g), dr.w_r, dr.nu_r - off.red_pair_center, dr.phases[1]},
      {full_pair_op(e, e, g, g), dr.w_b, dr.nu_b - off.blue_pair_center, dr.phases[2]},
      {full_pair_op(e, e, f, f), dr.w_b, dr.nu_b + off.blue_pair_center, dr.phases[3]},
  };
}

}  // namespace detail

/// Frame in which the detuned QQ sidebands are time independent. Logical
/// states sit at energies -nu_r (L0) and -nu_b (L1).
inline HamiltonianSpec build_rotating_hamiltonian(const DeviceParams& device, const DriveConfig& drive) {
  device.validate();
  drive.validate();
  LabeledOperator h = detail::anharmonic_frame_terms(device);
  const LabeledOperator red_diag = full_pair_proj(g, f) + full_pair_proj(f, g) + full_pair_proj(g, e) + full_pair_proj(e, g);
  const LabeledOperator blue_diag = full_pair_proj(g, g) + full_pair_proj(f, f) + full_pair_proj(e, f) + full_pair_proj(f, e);
  h += (-kTwoPi * drive.nu_r) * red_diag;
  h += (-kTwoPi * drive.nu_b) * blue_diag;

  std::vector<DrivenTerm> none;
  for (const auto& tone : detail::qq_tones(drive, {})) detail::add_coupling(h, none, tone.op, tone.amp, 0.0, tone.phase);
  detail::add_coupling(h, none, detail::qr_lowering(1), drive.omega_qr1, 0.0, 0.0);
  detail::add_coupling(h, none, detail::qr_lowering(2), drive.omega_qr2, 0.0, 0.0);
  return {h, {}};
}

/// Logical-static frame: every logical basis state has zero energy and the QQ
/// tones carry e^{2 pi i nu t} phases.
inline HamiltonianSpec build_static_hamiltonian(const DeviceParams& device, const DriveConfig& drive,
                                                const SidebandOffsets& offsets = {}) {
  device.validate();
  drive.validate();
  HamiltonianSpec spec{detail::anharmonic_frame_terms(device), {}};
  for (const auto& tone : detail::qq_tones(drive, offsets)) {
    detail::add_coupling(spec.constant, spec.driven, tone.op, tone.amp, tone.nu, tone.phase);
  }
  detail::add_coupling(spec.constant, spec.driven, detail::qr_lowering(1), drive.omega_qr1, offsets.qr1, 0.0);
  detail::add_coupling(spec.constant, spec.driven, detail::qr_lowering(2), drive.omega_qr2, offsets.qr2, 0.0);
  return spec;
}

/// Logical-static frame plus dispersive transmon-resonator shifts and the two
/// error-relevant ZZ shifts on |fe> and |ef>.
inline HamiltonianSpec build_full_hamiltonian(const DeviceParams& device, const DriveConfig& drive,
                                              const SidebandOffsets& offsets = {}) {
  HamiltonianSpec spec = build_static_hamiltonian(device, drive, offsets);
  spec.constant += (kTwoPi * device.chi_1) * (transmon_number(Q1) * resonator_number(R1));
  spec.constant += (kTwoPi * device.chi_2) * (transmon_number(Q2) * resonator_number(R2));
  spec.constant += (kTwoPi * device.zz_ff1) * full_pair_proj(f, e);
  spec.constant += (kTwoPi * device.zz_ff2) * full_pair_proj(e, f);
  return spec;
}

/// Carrier frequencies (MHz) of the lab-frame drive tones.
struct LabCarriers {
  std::array<double, 4> qq;  ///< |ee>-|fg>, |ee>-|gf>, |ee>-|gg>, |ee>-|ff>
  std::array<double, 2> qr;
};

inline LabCarriers lab_carriers(const DeviceParams& d, const DriveConfig& dr, double scale) {
  const double w1 = d.omega_q1 * scale, w2 = d.omega_q2 * scale;
  const double r1 = d.omega_r1 * scale, r2 = d.omega_r2 * scale;
  return {{w2 - w1 - d.alpha_1 - dr.nu_r, w2 - w1 + d.alpha_2 + dr.nu_r, w1 + w2 - dr.nu_b,
           w1 + w2 + d.alpha_1 + d.alpha_2 + dr.nu_b},
          {w1 + r1 + d.alpha_1, w2 + r2 + d.alpha_2}};
}

/// Lab-frame Hamiltonian with charge-coupled parametric drives. `scale` in
/// (0, 1] multiplies every bare transmon and resonator frequency (and hence
/// the carriers) to make long integrations affordable; anharmonicities and
/// drive rates are left untouched.
inline HamiltonianSpec build_lab_hamiltonian(const DeviceParams& device, const DriveConfig& drive, double scale) {
  if (!(scale > 0.0) || scale > 1.0) throw ArgumentError("build_lab_hamiltonian: scale must lie in (0, 1]");
  device.validate();
  drive.validate();
  const Dims& fd = full_dims();
  LabeledOperator h = LabeledOperator::zero(fd);
  const double wq[2] = {device.omega_q1 * scale, device.omega_q2 * scale};
  const double wr[2] = {device.omega_r1 * scale, device.omega_r2 * scale};
  const double alpha[2] = {device.alpha_1, device.alpha_2};
  for (int j = 0; j < 2; ++j) {
    const LabeledOperator a = transmon_destroy(j);
    const LabeledOperator ad = a.adjoint();
    h += wq[j] * (ad * a);
    h += (alpha[j] / 2.0) * (ad * ad * a * a);
    h += wr[j] * resonator_number(j == 0 ? R1 : R2);
  }
  HamiltonianSpec spec{kTwoPi * h, {}};

  const LabCarriers c = lab_carriers(device, drive, scale);
  const double s2 = std::sqrt(2.0);
  auto quad = [](int site) {
    const LabeledOperator a = site < 2 ? transmon_destroy(site) : resonator_destroy(site);
    return a + a.adjoint();
  };
  if (drive.w_r != 0.0 || drive.w_b != 0.0) {
    const std::array<double, 4> amp{drive.w_r / s2, drive.w_r / s2, drive.w_b, drive.w_b / 2.0};
    const std::array<double, 4> ph{drive.phases[1], drive.phases[0], drive.phases[2], drive.phases[3]};
    auto carriers = c.qq;
    spec.driven.push_back({[amp, ph, carriers](double t) {
                             double s = 0.0;
                             for (int k = 0; k < 4; ++k) s += amp[k] * std::cos(kTwoPi * carriers[k] * t + ph[k]);
                             return kTwoPi * s;
                           },
                           quad(Q1) * quad(Q2)});
  }
  const double omega[2] = {drive.omega_qr1, drive.omega_qr2};
  for (int j = 0; j < 2; ++j) {
    if (omega[j] == 0.0) continue;
    const double amp = omega[j] / s2;
    const double carrier = c.qr[j];
    spec.driven.push_back({[amp, carrier](double t) { return kTwoPi * amp * std::cos(kTwoPi * carrier * t); },
                           quad(j) * quad(j == 0 ? R1 : R2)});
  }
  return spec;
}

/// Sum of the four A_QQ cosine amplitudes at time t (MHz, ordinary units).
inline double lab_qq_envelope(const DeviceParams& device, const DriveConfig& drive, double scale, double t) {
  const LabCarriers c = lab_carriers(device, drive, scale);
  const double s2 = std::sqrt(2.0);
  const std::array<double, 4> amp{drive.w_r / s2, drive.w_r / s2, drive.w_b, drive.w_b / 2.0};
  const std::array<double, 4> ph{drive.phases[1], drive.phases[0], drive.phases[2], drive.phases[3]};
  double s = 0.0;
  for (int k = 0; k < 4; ++k) s += amp[k] * std::cos(kTwoPi * c.qq[k] * t + ph[k]);
  return s;
}

/// Lindblad operators pre-scaled by sqrt(rate). Channels with infinite time
/// constants (or zero thermal population) are omitted.
inline std::vector<LabeledOperator> collapse_operators(const NoiseModel& noise) {
  noise.validate();
  const Dims& fd = full_dims();
  std::vector<LabeledOperator> out;
  auto add = [&](double rate, const LabeledOperator& op) {
    if (rate > 0.0 && std::isfinite(rate)) out.push_back(std::sqrt(rate) * op);
  };
  const double t1ge[2] = {noise.t1_ge_1, noise.t1_ge_2};
  const double t1ef[2] = {noise.t1_ef_1, noise.t1_ef_2};
  const double t1up[2] = {noise.t1_up_1, noise.t1_up_2};
  const double tphi[2] = {noise.t_phi_1, noise.t_phi_2};
  for (int j = 0; j < 2; ++j) {
    add(1.0 / t1ge[j], embed(transition(3, g, e), j, fd));
    add(1.0 / t1ef[j], embed(transition(3, e, f), j, fd));
    add(1.0 / t1up[j], embed(transition(3, e, g), j, fd));
    add(2.0 / t1up[j], embed(transition(3, f, e), j, fd));
    add(1.0 / tphi[j], embed(transition(3, e, e), j, fd));
    add(4.0 / tphi[j], embed(transition(3, f, f), j, fd));
  }
  const double kappa[2] = {noise.kappa_1, noise.kappa_2};
  for (int j = 0; j < 2; ++j) {
    const LabeledOperator a = resonator_destroy(j == 0 ? R1 : R2);
    add(kTwoPi * kappa[j] * noise.n_res, a.adjoint());
    add(kTwoPi * kappa[j], a);
  }
  add(1.0 / noise.t_phi_ff, full_pair_proj(f, f));
  return out;
}

}  // namespace starcode
