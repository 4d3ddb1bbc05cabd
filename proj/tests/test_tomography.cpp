#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "starcode/model.hpp"
#include "starcode/tomography.hpp"

using namespace starcode;

namespace {

DensityMatrix pair_state(StateLabel label) {
  return DensityMatrix::pure(StateVector(qutrit_pair_dims(), pair_amplitudes(label)));
}

DensityMatrix random_pure(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector v(9);
  for (int i = 0; i < 9; ++i) v(i) = cplx(nd(rng), nd(rng));
  return DensityMatrix::pure(StateVector(qutrit_pair_dims(), v.normalized()));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(RotationSet, SizeAndIdentity) {
  const auto rot = rotation_set();
  ASSERT_EQ(rot.size(), 81u);
  EXPECT_LT((rot.unitaries[0] - Matrix::Identity(9, 9)).norm(), 1e-15);
  for (const auto& u : rot.unitaries) EXPECT_LT((u.adjoint() * u - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(rot.recipes[9 * 3 + 4], "Rge(0,pi) x Ref(0,pi/2)");
}

TEST(RotationSet, GePiMatrix) {
  const Matrix r = r_ge(0.0, kPi);
  Matrix expected(3, 3);
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((r - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RotationSet, RowMajorPairing) {
  const auto s = single_qutrit_rotations();
  const auto rot = rotation_set();
  for (int a = 0; a < 9; ++a) {
    for (int b = 0; b < 9; ++b) EXPECT_LT((rot.unitaries[9 * a + b] - kron(s[a].u, s[b].u)).norm(), 1e-15);
  }
}

TEST(Confusion, Validation) {
  EXPECT_THROW(ConfusionMatrix(Eigen::MatrixXd::Identity(3, 3)), DimensionError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(9, 9);
  bad(0, 0) = 0.9;
  EXPECT_THROW(ConfusionMatrix{bad}, ArgumentError);
  Eigen::MatrixXd singular = Eigen::MatrixXd::Constant(9, 9, 1.0 / 9);
  EXPECT_THROW(ConfusionMatrix{singular}, ArgumentError);
  EXPECT_FALSE(ConfusionMatrix::uniform(0.95).ill_conditioned());
  EXPECT_TRUE(ConfusionMatrix::uniform(0.1115).ill_conditioned());
}

TEST(SimulateCounts, GroundStateIdentityRotation) {
  const auto rho = DensityMatrix::pure(StateVector::basis(qutrit_pair_dims(), {g, g}));
  const auto t = simulate_counts(rho, rotation_set(), ConfusionMatrix::identity(), 5000, 3);
  EXPECT_EQ(t.counts(0, 0), 5000);
  for (Eigen::Index j = 0; j < t.counts.rows(); ++j) EXPECT_EQ(t.counts.row(j).sum(), 5000);
}

TEST(SimulateCounts, SeedDeterminism) {
  const auto rho = pair_state(StateLabel::Lx);
  const auto rot = rotation_set();
  const auto a = simulate_counts(rho, rot, ConfusionMatrix::uniform(0.97), 5000, 42);
  const auto b = simulate_counts(rho, rot, ConfusionMatrix::uniform(0.97), 5000, 42);
  const auto c = simulate_counts(rho, rot, ConfusionMatrix::uniform(0.97), 5000, 43);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_NE(a.counts, c.counts);
}

TEST(SimulateCounts, LawOfLargeNumbers) {
  std::mt19937_64 rng(8);
  const auto rho = random_pure(rng);
  const auto rot = rotation_set();
  const auto conf = ConfusionMatrix::uniform(0.9);
  const std::int64_t shots = 1'000'000;
  const auto t = simulate_counts(rho, rot, conf, shots, 99);
  const Eigen::MatrixXd expected = assigned_probabilities(rho, rot, conf);
  const Eigen::MatrixXd freq = t.frequencies();
  for (Eigen::Index j = 0; j < freq.rows(); ++j) {
    for (int s = 0; s < 9; ++s) {
      const double sd = std::sqrt(expected(j, s) * (1 - expected(j, s)) / shots);
      EXPECT_LE(std::abs(freq(j, s) - expected(j, s)), 5.0 * sd + 1e-12) << j << "," << s;
    }
  }
}

TEST(SimulateCounts, Errors) {
  EXPECT_THROW(simulate_counts(pair_state(StateLabel::L0), rotation_set(), {}, 0, 1), ArgumentError);
  const auto full = DensityMatrix::pure(logical_state(StateLabel::L0));
  EXPECT_THROW(simulate_counts(full, rotation_set(), {}, 10, 1), DimensionError);
}

TEST(LinearInversion, ExactProbabilitiesRecoverState) {
  std::mt19937_64 rng(1);
  const auto rot = rotation_set();
  for (int trial = 0; trial < 5; ++trial) {
    const auto rho = random_pure(rng);
    const auto est = linear_inversion(assigned_probabilities(rho, rot, {}), rot, {});
    EXPECT_LT((est.rho - rho.data()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(est.rho.trace().real(), 1.0, 1e-12);
  }
}

TEST(LinearInversion, PermutationConfusionIsUndone) {
  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(6);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(9, 9);
  for (int i = 0; i < 9; ++i) p(i, perm[i]) = 1.0;
  const ConfusionMatrix conf(p);
  const auto rot = rotation_set();
  const auto rho = random_pure(rng);
  const auto est = linear_inversion(assigned_probabilities(rho, rot, conf), rot, conf);
  EXPECT_LT((est.rho - rho.data()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LinearInversion, SampledLogicalStateIsFlagged) {
  const auto rot = rotation_set();
  int flagged = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t = simulate_counts(pair_state(StateLabel::L0), rot, {}, 5000, seed);
    const auto est = linear_inversion(t, rot, {});
    EXPECT_EQ(est.negative, est.min_eigenvalue < -1e-12);
    if (est.negative) ++flagged;
    EXPECT_NEAR(est.rho.trace().real(), 1.0, 1e-12);
    EXPECT_LT((est.rho - est.rho.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
  }
  // A rank-one state plus sampling noise almost always leaves negative eigenvalues.
  EXPECT_GT(flagged, 0);
}

TEST(Mle, NoiselessPureStates) {
  const auto rot = rotation_set();
  std::mt19937_64 rng(2);
  std::vector<DensityMatrix> states{pair_state(StateLabel::L0), pair_state(StateLabel::L1), pair_state(StateLabel::Lx)};
  for (int i = 0; i < 3; ++i) states.push_back(random_pure(rng));
  for (const auto& rho : states) {
    const auto res = mle_reconstruct(assigned_probabilities(rho, rot, {}), 5000, rot, {});
    EXPECT_GE(fidelity(DensityMatrix(qutrit_pair_dims(), res.rho), rho), 0.999);
    EXPECT_TRUE(validate_state(res.rho, 1e-6).passed);
  }
}

TEST(Mle, ConfusionRobustness) {
  const auto rot = rotation_set();
  const auto conf = ConfusionMatrix::uniform(0.95);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 3; ++trial) {
    const auto rho = random_pure(rng);
    const auto res = mle_reconstruct(assigned_probabilities(rho, rot, conf), 5000, rot, conf);
    EXPECT_GE(fidelity(DensityMatrix(qutrit_pair_dims(), res.rho), rho), 0.995);
  }
}

TEST(Mle, NoWorseThanProjectedLinearInversion) {
  const auto rot = rotation_set();
  for (auto label : {StateLabel::L0, StateLabel::Lx}) {
    const auto t = simulate_counts(pair_state(label), rot, {}, 5000, 7);
    const auto res = mle_reconstruct(t, rot, {});
    const auto lin = linear_inversion(t, rot, {});
    const double floor = 1.0 / (10.0 * 5000);
    const double lin_cost = tomography_cost(project_positive(lin.rho), corrected_frequencies(t.frequencies(), {}), rot, floor);
    EXPECT_LE(res.cost, lin_cost + 1e-12);
    EXPECT_NEAR(res.start_cost, lin_cost, 1e-9 * lin_cost);
    EXPECT_TRUE(validate_state(res.rho, 1e-6).passed);
    EXPECT_GT(res.iterations, 0);
  }
}

TEST(Mle, RoundTripAtPaperShotCount) {
  const auto rot = rotation_set();
  for (auto label : {StateLabel::L0, StateLabel::L1, StateLabel::Lx}) {
    const auto rho = pair_state(label);
    std::vector<double> fids;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto res = mle_reconstruct(simulate_counts(rho, rot, {}, 5000, seed), rot, {});
      fids.push_back(fidelity(DensityMatrix(qutrit_pair_dims(), res.rho), rho));
    }
    EXPECT_GE(median(fids), 0.98) << to_string(label);
  }
}

TEST(Mle, RotationOrderDoesNotMatter) {
  const auto rot = rotation_set();
  const auto t = simulate_counts(pair_state(StateLabel::Lx), rot, {}, 5000, 11);
  std::vector<int> order(81);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(5);
  std::shuffle(order.begin(), order.end(), rng);
  RotationSet shuffled;
  Tomogram ts = t;
  for (int j = 0; j < 81; ++j) {
    shuffled.unitaries.push_back(rot.unitaries[order[j]]);
    shuffled.recipes.push_back(rot.recipes[order[j]]);
    ts.counts.row(j) = t.counts.row(order[j]);
  }
  MleOptions tight;
  tight.stall_tol = 1e-8;
  tight.max_iterations = 20000;
  const auto a = mle_reconstruct(t, rot, {}, tight);
  const auto b = mle_reconstruct(ts, shuffled, {}, tight);
  EXPECT_FALSE(a.warning);
  EXPECT_LT((a.rho - b.rho).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Fidelity, Examples) {
  std::mt19937_64 rng(4);
  const auto a = random_pure(rng);
  EXPECT_NEAR(fidelity(a, a), 1.0, 1e-9);
  const auto gg = DensityMatrix::pure(StateVector::basis(qutrit_pair_dims(), {g, g}));
  const auto ee = DensityMatrix::pure(StateVector::basis(qutrit_pair_dims(), {e, e}));
  EXPECT_NEAR(fidelity(gg, ee), 0.0, 1e-12);
  const DensityMatrix mixed({2}, 0.5 * Matrix::Identity(2, 2));
  const auto up = DensityMatrix::pure(StateVector::basis({2}, {0}));
  EXPECT_NEAR(fidelity(mixed, up), 0.5, 1e-12);
  EXPECT_NEAR(fidelity(up, mixed), 0.5, 1e-12);
  EXPECT_THROW(fidelity(gg, up), DimensionError);
}

TEST(Fidelity, PureReducesToOverlap) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const auto b = random_pure(rng);
    std::normal_distribution<double> nd;
    Matrix m(9, 9);
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    }
    Matrix a = m * m.adjoint();
    a /= a.trace().real();
    const double overlap = (b.data() * a).trace().real();
    EXPECT_NEAR(fidelity(a, b.data()), overlap, 1e-9);
    EXPECT_NEAR(fidelity(b.data(), a), overlap, 1e-9);
  }
}

TEST(TextFormats, TomogramRoundTrip) {
  const auto t = simulate_counts(pair_state(StateLabel::L1), rotation_set(), {}, 1000, 9);
  std::stringstream ss;
  write_tomogram(ss, t);
  const Tomogram back = read_tomogram(ss);
  EXPECT_EQ(back.counts, t.counts);
  EXPECT_EQ(back.shots, 1000);
  EXPECT_EQ(back.seed, 9u);
}

TEST(TextFormats, BadInput) {
  std::stringstream short_tomo("0 1 0 0 0 0 0 0 0 0\n");
  EXPECT_THROW(read_tomogram(short_tomo), IoError);
  std::stringstream conf("1 0 0 0 0 0 0 0 0\n");
  EXPECT_THROW(read_confusion(conf), IoError);
  std::stringstream ident;
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) ident << (i == j ? 1 : 0) << ' ';
    ident << '\n';
  }
  EXPECT_EQ(read_confusion(ident).matrix(), Eigen::MatrixXd::Identity(9, 9));
}
