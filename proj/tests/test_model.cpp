#include <gtest/gtest.h>

#include <random>

#include "starcode/model.hpp"
#include "starcode/solver.hpp"

using namespace starcode;

namespace {

int idx(int q1, int q2, int r1 = 0, int r2 = 0) { return q1 * 12 + q2 * 4 + r1 * 2 + r2; }

Vector ket(int q1, int q2, int r1 = 0, int r2 = 0) {
  Vector v = Vector::Zero(36);
  v(idx(q1, q2, r1, r2)) = 1.0;
  return v;
}

DriveConfig aqec_drive() { return arm_preset(Arm::Aqec).drive; }

DeviceParams quiet_device() {
  DeviceParams d;
  d.chi_1 = d.chi_2 = 0.0;
  d.zz_ff1 = d.zz_ff2 = 0.0;
  return d;
}

/// X~ written out element by element on the nine two-transmon states.
Matrix xtilde_oracle() {
  Vector left = Vector::Zero(9), right = Vector::Zero(9);
  left(3 * g + g) = 1.0;
  left(3 * f + g) = 1.0;
  right(3 * g + f) = 1.0;
  right(3 * f + f) = 1.0;
  const Matrix half = 0.5 * left * right.adjoint();
  return half + half.adjoint();
}

double populations_gap(const Matrix& a, const Matrix& b) {
  return (a.diagonal() - b.diagonal()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(LogicalState, ZeroAmplitudes) {
  const Vector v = logical_state(StateLabel::L0).amplitudes();
  EXPECT_NEAR(v(idx(g, f)).real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v(idx(f, g)).real(), -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
  EXPECT_EQ((v.array() != cplx(0.0)).count(), 2);
}

TEST(LogicalState, Orthogonality) {
  const std::vector<StateLabel> labels{StateLabel::L0,  StateLabel::L1,  StateLabel::E01,
                                       StateLabel::E02, StateLabel::E11, StateLabel::E12};
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = 0; b < labels.size(); ++b) {
      const double ov = std::abs(logical_state(labels[a]).inner(logical_state(labels[b])));
      EXPECT_NEAR(ov, a == b ? 1.0 : 0.0, 1e-15);
    }
  }
}

TEST(LogicalState, ErrorStatesFollowPhotonLoss) {
  // E_jk is what remains after transmon k loses a photon from L_j.
  const auto a1 = transmon_destroy(Q1).data(), a2 = transmon_destroy(Q2).data();
  const auto overlap = [](const Vector& psi, StateLabel l) {
    return std::abs(logical_state(l).amplitudes().dot(psi.normalized()));
  };
  EXPECT_NEAR(overlap(a1 * logical_state(StateLabel::L0).amplitudes(), StateLabel::E01), 1.0, 1e-14);
  EXPECT_NEAR(overlap(a2 * logical_state(StateLabel::L0).amplitudes(), StateLabel::E02), 1.0, 1e-14);
  EXPECT_NEAR(overlap(a1 * logical_state(StateLabel::L1).amplitudes(), StateLabel::E11), 1.0, 1e-14);
  EXPECT_NEAR(overlap(a2 * logical_state(StateLabel::L1).amplitudes(), StateLabel::E12), 1.0, 1e-14);
}

TEST(LogicalState, LxHasUnitLogicalX) {
  const Matrix x = kron(xtilde_oracle(), Matrix::Identity(4, 4));
  const Vector lx = logical_state(StateLabel::Lx).amplitudes();
  EXPECT_NEAR(std::abs(lx.dot(x * lx)), 1.0, 1e-14);

  const Vector plus = (logical_state(StateLabel::L0).amplitudes() + logical_state(StateLabel::L1).amplitudes()) /
                      std::sqrt(2.0);
  EXPECT_NEAR(std::abs(plus.dot(x * plus)), 0.0, 1e-14);
  EXPECT_LT((logical_x_pair().data() - xtilde_oracle()).norm(), 1e-15);
}

TEST(LogicalState, Parse) {
  EXPECT_EQ(parse_state_label("E12"), StateLabel::E12);
  EXPECT_FALSE(parse_state_label("L2").has_value());
}

TEST(LogicalState, EqualPhotonNumber) {
  const LabeledOperator n = transmon_number(Q1) + transmon_number(Q2);
  for (auto l : {StateLabel::L0, StateLabel::L1, StateLabel::Lx}) {
    EXPECT_NEAR(expectation(DensityMatrix::pure(logical_state(l)), n).real(), 2.0, 1e-14);
  }
}

TEST(ErrorProjector, Examples) {
  const auto eps0 = error_projector(StateLabel::L0);
  EXPECT_NEAR(std::abs(expectation(DensityMatrix::pure(logical_state(StateLabel::L0)), eps0)), 0.0, 1e-15);
  EXPECT_NEAR(expectation(DensityMatrix::pure(logical_state(StateLabel::E01)), eps0).real(), 1.0, 1e-15);
  const auto both = error_projector(StateLabel::Lx);
  EXPECT_NEAR(both.data().trace().real(), 16.0, 1e-12);
  EXPECT_LT((both.data() * both.data() - both.data()).norm(), 1e-14);
  EXPECT_LT((both.data() - eps0.data() - error_projector(StateLabel::L1).data()).norm(), 1e-15);
  EXPECT_THROW(error_projector(StateLabel::E01), ArgumentError);
}

TEST(RotatingHamiltonian, ZeroDriveIsDiagonal) {
  const auto h = build_rotating_hamiltonian(DeviceParams{}, DriveConfig{});
  EXPECT_TRUE(h.time_independent());
  const Matrix m = h.constant.data();
  EXPECT_LT((m - Matrix(m.diagonal().asDiagonal())).norm(), 1e-15);
}

TEST(RotatingHamiltonian, RedMatrixElement) {
  DriveConfig d;
  d.w_r = 1.3;
  const auto h = build_rotating_hamiltonian(DeviceParams{}, d);
  const cplx v = ket(e, e).dot(h.constant.data() * ket(g, f));
  EXPECT_NEAR(v.real(), kTwoPi * 1.3 / 2.0, 1e-12);
  EXPECT_NEAR(v.imag(), 0.0, 1e-15);
}

TEST(RotatingHamiltonian, DiagonalFrameTerms) {
  DeviceParams dev;
  DriveConfig d = aqec_drive();
  const Matrix m = build_rotating_hamiltonian(dev, d).constant.data() / kTwoPi;
  auto diag = [&](int a, int b, int r1 = 0, int r2 = 0) { return m(idx(a, b, r1, r2), idx(a, b, r1, r2)).real(); };
  EXPECT_NEAR(diag(g, f), -d.nu_r, 1e-12);
  EXPECT_NEAR(diag(f, g), -d.nu_r, 1e-12);
  EXPECT_NEAR(diag(g, g), -d.nu_b, 1e-12);
  EXPECT_NEAR(diag(f, f), -d.nu_b, 1e-12);
  EXPECT_NEAR(diag(e, g), -dev.alpha_1 / 2 - d.nu_r, 1e-12);
  EXPECT_NEAR(diag(g, e), -dev.alpha_2 / 2 - d.nu_r, 1e-12);
  EXPECT_NEAR(diag(e, f), -dev.alpha_1 / 2 - d.nu_b, 1e-12);
  EXPECT_NEAR(diag(f, e), -dev.alpha_2 / 2 - d.nu_b, 1e-12);
  EXPECT_NEAR(diag(e, e), 0.0, 1e-12);
  EXPECT_NEAR(diag(g, f, 1, 1), -d.nu_r - dev.alpha_1 / 2 - dev.alpha_2 / 2, 1e-12);
}

TEST(RotatingHamiltonian, LogicalStatesAreDark) {
  DriveConfig d;
  d.w_r = 1.45;
  d.w_b = 1.25;
  d.nu_r = 0.8;
  d.nu_b = -0.9;
  for (auto build : {0, 1}) {
    const Matrix m = build == 0 ? build_rotating_hamiltonian(DeviceParams{}, d).constant.data()
                                : build_static_hamiltonian(DeviceParams{}, d).at(0.37);
    const Vector hee = m.adjoint() * ket(e, e);
    EXPECT_LT(std::abs(hee.dot(logical_state(StateLabel::L0).amplitudes())), 1e-14);
    EXPECT_LT(std::abs(hee.dot(logical_state(StateLabel::L1).amplitudes())), 1e-14);
    // The opposite-sign combinations are bright.
    const Vector bright = (ket(g, f) + ket(f, g)) / std::sqrt(2.0);
    EXPECT_GT(std::abs(hee.dot(bright)), 1.0);
  }
}

TEST(StaticHamiltonian, EqualsRotatingPlusFrameShiftAtZero) {
  const DeviceParams dev;
  const DriveConfig d = aqec_drive();
  const Matrix stat = build_static_hamiltonian(dev, d).at(0.0);
  const Matrix rot = build_rotating_hamiltonian(dev, d).constant.data();
  Matrix shift = Matrix::Zero(36, 36);
  for (int r = 0; r < 4; ++r) {
    for (auto [a, b] : {std::pair{g, f}, {f, g}, {g, e}, {e, g}}) shift(idx(a, b) + r, idx(a, b) + r) = d.nu_r;
    for (auto [a, b] : {std::pair{g, g}, {f, f}, {e, f}, {f, e}}) shift(idx(a, b) + r, idx(a, b) + r) = d.nu_b;
  }
  EXPECT_LT((stat - rot - kTwoPi * shift).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StaticHamiltonian, ZeroDetuningIsTimeIndependent) {
  DriveConfig d = aqec_drive();
  d.nu_r = d.nu_b = 0.0;
  EXPECT_TRUE(build_static_hamiltonian(DeviceParams{}, d).time_independent());
  EXPECT_FALSE(build_static_hamiltonian(DeviceParams{}, aqec_drive()).time_independent());
}

TEST(StaticHamiltonian, PhaseRotatesCoupling) {
  DriveConfig d;
  d.w_r = 1.0;
  d.nu_r = 0.7;
  d.phases[0] = 0.4;
  const auto h = build_static_hamiltonian(DeviceParams{}, d);
  const double t = 0.31;
  const cplx v = ket(e, e).dot(h.at(t) * ket(g, f));
  const cplx expected = kTwoPi * 0.5 * std::exp(cplx(0.0, kTwoPi * 0.7 * t + 0.4));
  EXPECT_LT(std::abs(v - expected), 1e-12);
}

TEST(StaticHamiltonian, DarkLogicalZeroDoesNotLeak) {
  DriveConfig d = aqec_drive();
  d.omega_qr1 = d.omega_qr2 = 0.0;
  const auto h = build_static_hamiltonian(DeviceParams{}, d);
  const auto rho0 = DensityMatrix::pure(logical_state(StateLabel::L0));
  const auto traj = evolve(h, {}, rho0, linspace(0.0, 10.0, 11));
  const Vector l0 = logical_state(StateLabel::L0).amplitudes();
  for (const auto& rho : traj.states) EXPECT_LT(1.0 - l0.dot(rho * l0).real(), 1e-6);
}

TEST(FrameConsistency, StaticAndRotatingPopulationsAgree) {
  const DeviceParams dev;
  const DriveConfig d = aqec_drive();
  const auto times = linspace(0.0, 5.0, 11);
  for (auto label : {StateLabel::L0, StateLabel::E01, StateLabel::Lx}) {
    const auto rho0 = DensityMatrix::pure(logical_state(label));
    const auto a = evolve(build_static_hamiltonian(dev, d), {}, rho0, times);
    const auto b = evolve(build_rotating_hamiltonian(dev, d), {}, rho0, times);
    for (std::size_t i = 0; i < times.size(); ++i) EXPECT_LT(populations_gap(a.states[i], b.states[i]), 1e-6);
  }
}

TEST(Hamiltonians, HermitianAtRandomTimes) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ut(0.0, 30.0);
  DriveConfig d = aqec_drive();
  d.phases = {0.3, -1.1, 2.0, 0.5};
  const DeviceParams dev;
  const std::vector<HamiltonianSpec> specs{
      build_rotating_hamiltonian(dev, d), build_static_hamiltonian(dev, d, {0.2, -0.3, 0.1, -0.05}),
      build_full_hamiltonian(dev, d), build_lab_hamiltonian(dev, d, 0.1), build_lab_hamiltonian(dev, d, 1.0)};
  for (const auto& h : specs) {
    for (int k = 0; k < 100; ++k) {
      const Matrix m = h.at(ut(rng));
      EXPECT_LE((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(LabHamiltonian, DuffingSpectrum) {
  const DeviceParams dev;
  for (double scale : {1.0, 0.1}) {
    const Matrix m = build_lab_hamiltonian(dev, DriveConfig{}, scale).at(0.0) / kTwoPi;
    EXPECT_TRUE(build_lab_hamiltonian(dev, DriveConfig{}, scale).time_independent());
    const auto energy = [&](int a, int b) { return m(idx(a, b), idx(a, b)).real(); };
    EXPECT_NEAR(energy(f, g) - 2 * energy(e, g), dev.alpha_1, 1e-9);
    EXPECT_NEAR(energy(g, f) - 2 * energy(g, e), dev.alpha_2, 1e-9);
    EXPECT_NEAR(energy(e, g), dev.omega_q1 * scale, 1e-9);
    EXPECT_NEAR(m(idx(g, g, 1, 0), idx(g, g, 1, 0)).real(), dev.omega_r1 * scale, 1e-9);
  }
}

TEST(LabHamiltonian, EnvelopeAtZero) {
  const DeviceParams dev;
  DriveConfig d;
  d.w_r = 1.45;
  d.w_b = 1.25;
  const double expected = 1.45 / std::sqrt(2.0) * 2 + 1.25 + 1.25 / 2;
  EXPECT_NEAR(lab_qq_envelope(dev, d, 1.0, 0.0), expected, 1e-14);

  // The driven coefficient multiplies (a1 + a1^dag)(a2 + a2^dag).
  const auto h = build_lab_hamiltonian(dev, d, 1.0);
  ASSERT_EQ(h.driven.size(), 1u);
  EXPECT_NEAR(h.driven[0].coefficient(0.0), kTwoPi * expected, 1e-12);
  const cplx me = ket(e, e).dot(h.driven[0].op.data() * ket(f, g));
  EXPECT_NEAR(me.real(), std::sqrt(2.0), 1e-14);
}

TEST(LabHamiltonian, RejectsBadScale) {
  EXPECT_THROW(build_lab_hamiltonian(DeviceParams{}, DriveConfig{}, 0.0), ArgumentError);
  EXPECT_THROW(build_lab_hamiltonian(DeviceParams{}, DriveConfig{}, -1.0), ArgumentError);
}

TEST(LabHamiltonian, RedSidebandRabiMatchesRotatingFrame) {
  // Scaled carriers, one red pair at zero detuning, starting in |ee00>.
  const DeviceParams dev = quiet_device();
  DriveConfig d;
  d.w_r = 2.0;
  const double scale = 0.1;
  const auto times = linspace(0.0, 0.6, 61);
  const auto rho0 = DensityMatrix::pure(StateVector::basis(full_dims(), {e, e, 0, 0}));
  SolverOptions opt;
  opt.rtol = 1e-7;
  opt.atol = 1e-9;
  const auto lab = evolve(build_lab_hamiltonian(dev, d, scale), {}, rho0, times, opt);
  const auto rot = evolve(build_rotating_hamiltonian(dev, d), {}, rho0, times, opt);

  // Analytic two-level oracle: |ee> couples to (|gf> + |fg>)/sqrt2 at sqrt2 * w_r / 2.
  const double omega = kTwoPi * std::sqrt(2.0) * d.w_r / 2.0;
  double worst_lab = 0.0, worst_rot = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double pgf_oracle = 0.5 * std::pow(std::sin(omega * times[i]), 2);
    const int k = idx(g, f);
    worst_rot = std::max(worst_rot, std::abs(rot.states[i](k, k).real() - pgf_oracle));
    worst_lab = std::max(worst_lab, std::abs(lab.states[i](k, k).real() - pgf_oracle));
  }
  EXPECT_LT(worst_rot, 1e-6);
  EXPECT_LT(worst_lab, 0.1 * 0.5);
}

TEST(FullHamiltonian, ReducesToStatic) {
  const DeviceParams dev = quiet_device();
  const DriveConfig d = aqec_drive();
  const auto a = build_full_hamiltonian(dev, d), b = build_static_hamiltonian(dev, d);
  for (double t : {0.0, 0.7, 3.3}) EXPECT_LT((a.at(t) - b.at(t)).norm(), 1e-15);
}

TEST(FullHamiltonian, ZZShiftOnEF) {
  const ArmParameters p = arm_preset(Arm::Aqec);
  const Matrix diff = build_full_hamiltonian(p.device, p.drive).at(0.0) - build_static_hamiltonian(p.device, p.drive).at(0.0);
  EXPECT_NEAR(diff(idx(e, f), idx(e, f)).real(), kTwoPi * p.device.zz_ff2, 1e-12);
  EXPECT_NEAR(diff(idx(f, e), idx(f, e)).real(), kTwoPi * p.device.zz_ff1, 1e-12);
  EXPECT_NEAR(diff(idx(f, g, 1, 0), idx(f, g, 1, 0)).real(), kTwoPi * 2 * p.device.chi_1, 1e-12);
}

TEST(FullHamiltonian, QrTransitionsSplitByZZ) {
  const ArmParameters p = arm_preset(Arm::Aqec);
  const Matrix m = build_full_hamiltonian(p.device, p.drive).constant.data() / kTwoPi;
  const auto energy = [&](int a, int b, int r1, int r2) { return m(idx(a, b, r1, r2), idx(a, b, r1, r2)).real(); };
  const double qr1_l0 = energy(f, g, 1, 0) - energy(e, g, 0, 0);
  const double qr1_l1 = energy(f, f, 1, 0) - energy(e, f, 0, 0);
  const double qr2_l0 = energy(g, f, 0, 1) - energy(g, e, 0, 0);
  const double qr2_l1 = energy(f, f, 0, 1) - energy(f, e, 0, 0);
  EXPECT_NEAR(std::abs(qr1_l1 - qr1_l0), 2.2, 1e-12);
  EXPECT_NEAR(std::abs(qr2_l1 - qr2_l0), 0.6, 1e-12);
  // QR couplings carry Omega/2 between |eg0> and |fg1>.
  EXPECT_NEAR(m(idx(e, g, 0, 0), idx(f, g, 1, 0)).real(), 0.39 / 2, 1e-12);
  EXPECT_NEAR(m(idx(f, e, 0, 0), idx(f, f, 0, 1)).real(), 0.39 / 2, 1e-12);
}

TEST(FullHamiltonian, L0ResonantQrOffsetsRestoreFullTransfer) {
  DeviceParams dev = quiet_device();
  dev.chi_1 = -0.2;
  DriveConfig d;
  d.omega_qr1 = 0.5;
  const auto rho0 = DensityMatrix::pure(StateVector(full_dims(), ket(e, g)));
  const auto times = linspace(0.0, 1.0, 201);
  auto peak = [&](const SidebandOffsets& off) {
    const auto traj = evolve(build_full_hamiltonian(dev, d, off), {}, rho0, times);
    double best = 0.0;
    for (const auto& r : traj.states) best = std::max(best, r(idx(f, g, 1, 0), idx(f, g, 1, 0)).real());
    return best;
  };
  // Detuned by 2 chi = 0.4 MHz: max transfer 0.5^2 / (0.5^2 + 0.4^2).
  EXPECT_NEAR(peak({}), 0.25 / 0.41, 2e-3);
  EXPECT_GT(peak(l0_resonant_offsets(dev)), 0.999);
}

TEST(CollapseOperators, ChannelCounts) {
  NoiseModel n;
  n.t1_ge_1 = 20.0;
  n.t1_ge_2 = 10.0;
  const auto ops = collapse_operators(n);
  // Resonator loss is always on (kappa > 0), so the transmon part is two operators.
  ASSERT_EQ(ops.size(), 4u);
  const auto lower1 = embed(transition(3, g, e), Q1, full_dims());
  EXPECT_LT((ops[0].data() - std::sqrt(1.0 / 20.0) * lower1.data()).norm(), 1e-15);

  const auto aqec = collapse_operators(arm_preset(Arm::Aqec).noise);
  EXPECT_EQ(aqec.size(), 17u);
  EXPECT_EQ(collapse_operators(arm_preset(Arm::FreeDecay).noise).size(), 11u);
}

TEST(CollapseOperators, NoThermalPhotonsMeansNoRaising) {
  NoiseModel n = arm_preset(Arm::Aqec).noise;
  n.n_res = 0.0;
  const auto raise1 = resonator_destroy(R1).adjoint().data();
  for (const auto& op : collapse_operators(n)) {
    const double overlap = std::abs((op.data().adjoint() * raise1).trace());
    EXPECT_LT(overlap, 1e-15);
  }
  EXPECT_EQ(collapse_operators(n).size(), 15u);
}

TEST(CollapseOperators, RatesFollowConvention) {
  NoiseModel n;
  n.t_phi_1 = 15.0;
  n.kappa_1 = 0.53;
  n.kappa_2 = 0.48;
  const auto ops = collapse_operators(n);
  ASSERT_EQ(ops.size(), 4u);
  const Matrix ff = ops[1].data().adjoint() * ops[1].data();
  EXPECT_NEAR(ff(idx(f, g), idx(f, g)).real(), 4.0 / 15.0, 1e-14);
  const Matrix k1 = ops[2].data().adjoint() * ops[2].data();
  EXPECT_NEAR(k1(idx(g, g, 1, 0), idx(g, g, 1, 0)).real(), kTwoPi * 0.53, 1e-12);
}

TEST(NoiseModel, Validation) {
  NoiseModel n;
  n.t1_ge_1 = -1.0;
  EXPECT_THROW(n.validate(), ConfigError);
  n = NoiseModel{};
  n.n_res = 1.0;
  EXPECT_THROW(n.validate(), ConfigError);
  n = NoiseModel{};
  n.kappa_2 = 0.0;
  EXPECT_THROW(collapse_operators(n), ConfigError);
  DriveConfig d;
  d.w_b = -0.1;
  EXPECT_THROW(build_rotating_hamiltonian(DeviceParams{}, d), ConfigError);
  DeviceParams dev;
  dev.alpha_1 = 10.0;
  EXPECT_THROW(dev.validate(), ConfigError);
}
