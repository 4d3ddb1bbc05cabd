#pragma once

// Two-transmon (qutrit x qutrit) state tomography: the 81 post-rotations,
// a sampled readout model with a confusion matrix, linear inversion and a
// maximum-likelihood style reconstruction.

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "starcode/operators.hpp"

namespace starcode {

inline constexpr int kTomoDim = 9;
inline constexpr int kRotations = 81;

/// Single-qutrit rotation in the {g, e} subspace.
inline Matrix r_ge(double phi, double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Matrix r = Matrix::Identity(3, 3);
  r(0, 0) = c;
  r(0, 1) = -std::polar(1.0, -phi) * s;
  r(1, 0) = std::polar(1.0, phi) * s;
  r(1, 1) = c;
  return r;
}

/// Single-qutrit rotation in the {e, f} subspace.
inline Matrix r_ef(double phi, double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Matrix r = Matrix::Identity(3, 3);
  r(1, 1) = c;
  r(1, 2) = -std::polar(1.0, -phi) * s;
  r(2, 1) = std::polar(1.0, phi) * s;
  r(2, 2) = c;
  return r;
}

struct SingleRotation {
  std::string recipe;
  Matrix u;
};

inline std::vector<SingleRotation> single_qutrit_rotations() {
  const double h = kPi / 2, p = kPi;
  return {
      {"I", Matrix::Identity(3, 3)},
      {"Rge(0,pi/2)", r_ge(0, h)},
      {"Rge(pi/2,pi/2)", r_ge(h, h)},
      {"Rge(0,pi)", r_ge(0, p)},
      {"Ref(0,pi/2)", r_ef(0, h)},
      {"Ref(pi/2,pi/2)", r_ef(h, h)},
      {"Ref(0,pi/2)Rge(0,pi)", r_ef(0, h) * r_ge(0, p)},
      {"Ref(pi/2,pi/2)Rge(0,pi)", r_ef(h, h) * r_ge(0, p)},
      {"Ref(0,pi)Rge(0,pi)", r_ef(0, p) * r_ge(0, p)},
  };
}

struct RotationSet {
  std::vector<Matrix> unitaries;     // 9 x 9 each
  std::vector<std::string> recipes;  // "Q1 recipe x Q2 recipe"

  std::size_t size() const noexcept { return unitaries.size(); }
};

/// S x S with index 9 a + b for Q1 rotation a and Q2 rotation b.
inline RotationSet rotation_set() {
  const auto s = single_qutrit_rotations();
  RotationSet out;
  for (const auto& a : s) {
    for (const auto& b : s) {
      out.unitaries.push_back(kron(a.u, b.u));
      out.recipes.push_back(a.recipe + " x " + b.recipe);
    }
  }
  return out;
}

/// Readout confusion: rows are prepared basis states, columns assigned outcomes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() : m_(Eigen::MatrixXd::Identity(kTomoDim, kTomoDim)) { analyse(); }

  explicit ConfusionMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != kTomoDim || m_.cols() != kTomoDim) throw DimensionError("confusion matrix must be 9x9");
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      for (Eigen::Index j = 0; j < m_.cols(); ++j) {
        if (!(m_(i, j) >= 0.0 && m_(i, j) <= 1.0)) throw ArgumentError("confusion entries must lie in [0, 1]");
      }
      if (std::abs(m_.row(i).sum() - 1.0) > 1e-9) {
        throw ArgumentError("confusion row " + std::to_string(i) + " does not sum to 1");
      }
    }
    analyse();
    if (!std::isfinite(condition_)) throw ArgumentError("confusion matrix is singular");
  }

  static ConfusionMatrix identity() { return {}; }

  /// Row-stochastic matrix with `fidelity` on the diagonal, the rest spread evenly.
  static ConfusionMatrix uniform(double fidelity) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(kTomoDim, kTomoDim, (1.0 - fidelity) / (kTomoDim - 1));
    m.diagonal().setConstant(fidelity);
    return ConfusionMatrix(m);
  }

  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  double condition() const noexcept { return condition_; }
  bool ill_conditioned() const noexcept { return condition_ > 1e3; }

  /// Assigned-outcome probabilities for ideal probabilities p.
  Eigen::VectorXd assign(const Eigen::VectorXd& p) const { return m_.transpose() * p; }
  /// Inverse of assign.
  Eigen::VectorXd correct(const Eigen::VectorXd& q) const { return lu_.solve(q); }

 private:
  void analyse() {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m_);
    const auto& sv = svd.singularValues();
    condition_ = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(m_.transpose());
  }

  Eigen::MatrixXd m_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double condition_ = 1.0;
};

struct Tomogram {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;  // rotations x 9
  std::int64_t shots = 0;
  std::uint64_t seed = 0;

  /// Assigned frequencies (rows sum to 1).
  Eigen::MatrixXd frequencies() const { return counts.cast<double>() / static_cast<double>(shots); }
};

namespace detail {

inline const Matrix& two_qutrit(const DensityMatrix& rho) {
  if (rho.dims() != qutrit_pair_dims()) {
    throw DimensionError("tomography expects a two-qutrit state, got " + dims_to_string(rho.dims()));
  }
  return rho.data();
}

/// Diagonal of U rho U^dagger, clipped at zero and renormalized.
inline Eigen::VectorXd rotated_populations(const Matrix& u, const Matrix& rho) {
  Eigen::VectorXd p = (u * rho * u.adjoint()).diagonal().real();
  p = p.cwiseMax(0.0);
  return p / p.sum();
}

/// M_{j,s} = U_j^dagger |s><s| U_j, so that p_{j,s} = Tr(M_{j,s} rho).
inline std::vector<Matrix> measurement_operators(const RotationSet& rot) {
  std::vector<Matrix> out;
  out.reserve(rot.size() * kTomoDim);
  for (const auto& u : rot.unitaries) {
    for (int s = 0; s < kTomoDim; ++s) out.push_back(u.row(s).adjoint() * u.row(s));
  }
  return out;
}

}  // namespace detail

/// Ideal outcome probabilities per rotation (rows) without readout error.
inline Eigen::MatrixXd ideal_probabilities(const DensityMatrix& rho, const RotationSet& rot) {
  const Matrix& m = detail::two_qutrit(rho);
  Eigen::MatrixXd p(rot.size(), kTomoDim);
  for (std::size_t j = 0; j < rot.size(); ++j) p.row(j) = detail::rotated_populations(rot.unitaries[j], m).transpose();
  return p;
}

/// Assigned-outcome probabilities: ideal probabilities mixed by the confusion matrix.
inline Eigen::MatrixXd assigned_probabilities(const DensityMatrix& rho, const RotationSet& rot,
                                              const ConfusionMatrix& conf) {
  Eigen::MatrixXd p = ideal_probabilities(rho, rot);
  for (Eigen::Index j = 0; j < p.rows(); ++j) p.row(j) = conf.assign(p.row(j).transpose()).transpose();
  return p;
}

/// Multinomial draw of `shots` outcomes per rotation from a seeded generator.
inline Tomogram simulate_counts(const DensityMatrix& rho, const RotationSet& rot, const ConfusionMatrix& conf,
                                std::int64_t shots, std::uint64_t seed) {
  if (shots <= 0) throw ArgumentError("simulate_counts: shots must be > 0");
  const Eigen::MatrixXd q = assigned_probabilities(rho, rot, conf);
  std::mt19937_64 rng(seed);
  Tomogram t;
  t.shots = shots;
  t.seed = seed;
  t.counts.resize(q.rows(), kTomoDim);
  for (Eigen::Index j = 0; j < q.rows(); ++j) {
    std::int64_t left = shots;
    double mass = 1.0;
    for (int s = 0; s < kTomoDim; ++s) {
      std::int64_t n = 0;
      if (s == kTomoDim - 1) {
        n = left;
      } else if (left > 0 && mass > 0.0) {
        const double pr = std::clamp(q(j, s) / mass, 0.0, 1.0);
        n = std::binomial_distribution<std::int64_t>(left, pr)(rng);
      }
      t.counts(j, s) = n;
      left -= n;
      mass -= q(j, s);
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Reconstruction

/// Confusion-corrected outcome frequencies (may leave [0, 1] under noise).
inline Eigen::MatrixXd corrected_frequencies(const Eigen::MatrixXd& assigned, const ConfusionMatrix& conf) {
  Eigen::MatrixXd q(assigned.rows(), assigned.cols());
  for (Eigen::Index j = 0; j < assigned.rows(); ++j) q.row(j) = conf.correct(assigned.row(j).transpose()).transpose();
  return q;
}

struct LinearEstimate {
  Matrix rho;  ///< Hermitian, unit trace, possibly not positive
  double min_eigenvalue = 0.0;
  bool negative = false;  ///< min eigenvalue below -1e-12
};

/// Hermitian basis: 9 diagonal units, then (E_ab + E_ba) and i(E_ab - E_ba) for a < b.
inline std::vector<Matrix> hermitian_basis() {
  std::vector<Matrix> out;
  for (int a = 0; a < kTomoDim; ++a) {
    Matrix m = Matrix::Zero(kTomoDim, kTomoDim);
    m(a, a) = 1.0;
    out.push_back(m);
  }
  for (int a = 0; a < kTomoDim; ++a) {
    for (int b = a + 1; b < kTomoDim; ++b) {
      Matrix re = Matrix::Zero(kTomoDim, kTomoDim), im = Matrix::Zero(kTomoDim, kTomoDim);
      re(a, b) = re(b, a) = 1.0;
      im(a, b) = cplx(0, -1);
      im(b, a) = cplx(0, 1);
      out.push_back(re);
      out.push_back(im);
    }
  }
  return out;
}

inline LinearEstimate linear_inversion(const Eigen::MatrixXd& assigned, const RotationSet& rot,
                                       const ConfusionMatrix& conf) {
  if (assigned.rows() != static_cast<Eigen::Index>(rot.size()) || assigned.cols() != kTomoDim) {
    throw DimensionError("linear_inversion: frequency table does not match the rotation set");
  }
  const Eigen::MatrixXd q = corrected_frequencies(assigned, conf);
  const auto ms = detail::measurement_operators(rot);
  const auto basis = hermitian_basis();
  Eigen::MatrixXd design(ms.size(), basis.size());
  Eigen::VectorXd rhs(ms.size());
  for (std::size_t r = 0; r < ms.size(); ++r) {
    for (std::size_t k = 0; k < basis.size(); ++k) design(r, k) = (ms[r] * basis[k]).trace().real();
    rhs(r) = q(r / kTomoDim, r % kTomoDim);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() != static_cast<Eigen::Index>(basis.size())) {
    throw ArgumentError("linear_inversion: rotation set is not informationally complete");
  }
  const Eigen::VectorXd theta = qr.solve(rhs);
  Matrix rho = Matrix::Zero(kTomoDim, kTomoDim);
  for (std::size_t k = 0; k < basis.size(); ++k) rho += theta(k) * basis[k];
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  LinearEstimate out;
  out.rho = rho;
  out.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Matrix>(rho).eigenvalues().minCoeff();
  out.negative = out.min_eigenvalue < -1e-12;
  return out;
}

inline LinearEstimate linear_inversion(const Tomogram& t, const RotationSet& rot, const ConfusionMatrix& conf) {
  return linear_inversion(t.frequencies(), rot, conf);
}

/// Closest positive semidefinite unit-trace matrix (negative eigenvalues clipped).
inline Matrix project_positive(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  if (!(lam.sum() > 0.0)) throw StateError("project_positive: no positive spectrum");
  Matrix out = es.eigenvectors() * lam.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return out / lam.sum();
}

/// f_c = sum ((p - q) / q)^2 over rotations and outcomes, with p the model
/// probabilities of rho and q the corrected frequencies floored at `floor`.
inline double tomography_cost(const Matrix& rho, const Eigen::MatrixXd& corrected, const RotationSet& rot,
                              double floor) {
  double cost = 0.0;
  for (std::size_t j = 0; j < rot.size(); ++j) {
    const Eigen::VectorXd p = (rot.unitaries[j] * rho * rot.unitaries[j].adjoint()).diagonal().real();
    for (int s = 0; s < kTomoDim; ++s) {
      const double q = std::max(corrected(j, s), floor);
      cost += std::pow((p(s) - q) / q, 2);
    }
  }
  return cost;
}

struct MleOptions {
  int max_iterations = 2000;
  double gtol = 1e-9;
  /// Stop once rho moves less than this (Frobenius norm) over `stall_window` steps.
  double stall_tol = 1e-4;
  int stall_window = 25;
  /// Denominator floor as a fraction of one count; the floor is 1 / (floor_shots_factor * shots).
  double floor_shots_factor = 10.0;
};

struct MleResult {
  Matrix rho;
  double cost = 0.0;
  double start_cost = 0.0;  ///< cost of the positivity-projected linear estimate
  int iterations = 0;
  bool warning = false;  ///< optimizer stopped on the iteration cap or a failure
};

namespace detail {

// rho = T^dagger T / Tr(T^dagger T), T upper triangular with a real diagonal.
// Parameters: 9 diagonal entries, then (Re, Im) of T(a, b) for a < b.
inline Matrix factor_from_params(const Eigen::VectorXd& x) {
  Matrix t = Matrix::Zero(kTomoDim, kTomoDim);
  int k = 0;
  for (int a = 0; a < kTomoDim; ++a) t(a, a) = x(k++);
  for (int a = 0; a < kTomoDim; ++a) {
    for (int b = a + 1; b < kTomoDim; ++b) {
      t(a, b) = cplx(x(k), x(k + 1));
      k += 2;
    }
  }
  return t;
}

inline Eigen::VectorXd params_from_factor(const Matrix& t) {
  Eigen::VectorXd x(kRotations);
  int k = 0;
  for (int a = 0; a < kTomoDim; ++a) x(k++) = t(a, a).real();
  for (int a = 0; a < kTomoDim; ++a) {
    for (int b = a + 1; b < kTomoDim; ++b) {
      x(k++) = t(a, b).real();
      x(k++) = t(a, b).imag();
    }
  }
  return x;
}

// Each measurement operator is rank one, M_i = v_i v_i^dagger, so
// Tr(M_i A) = |T v_i|^2 and (T M_i)_ab = (T v_i)_a conj(v_i)_b.
struct MleFunctor : Eigen::DenseFunctor<double> {
  Matrix v;           // 9 x n, columns v_i
  Eigen::VectorXd q;  // floored corrected frequencies, flattened

  MleFunctor(Matrix vv, Eigen::VectorXd qq)
      : Eigen::DenseFunctor<double>(kRotations, static_cast<int>(vv.cols())), v(std::move(vv)), q(std::move(qq)) {}

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    const Matrix t = factor_from_params(x);
    const double tr = t.squaredNorm();
    const Eigen::VectorXd p = (t * v).colwise().squaredNorm().transpose() / tr;
    r = ((p - q).array() / q.array()).matrix();
    return 0;
  }

  // d Tr(M A) for dT = c E_ab is 2 Re(conj(c) (T M)_ab); d Tr(A) is 2 Re(conj(c) T_ab).
  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    const Matrix t = factor_from_params(x);
    const double tr = t.squaredNorm();
    const Matrix tv = t * v;
    const Eigen::Index n = v.cols();
    jac.resize(n, kRotations);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = tv.col(i).squaredNorm() / tr;
      const double w = 2.0 / (q(i) * tr);
      int k = 0;
      for (int d = 0; d < kTomoDim; ++d) {
        jac(i, k++) = w * ((tv(d, i) * std::conj(v(d, i))).real() - p * t(d, d).real());
      }
      for (int r0 = 0; r0 < kTomoDim; ++r0) {
        for (int c0 = r0 + 1; c0 < kTomoDim; ++c0) {
          const cplx g = tv(r0, i) * std::conj(v(c0, i)) - p * t(r0, c0);
          jac(i, k++) = w * g.real();
          jac(i, k++) = w * g.imag();
        }
      }
    }
    return 0;
  }
};

}  // namespace detail

/// Minimizes f_c over physical states, starting from the positivity-projected
/// linear inversion. `shots` sets the denominator floor.
inline MleResult mle_reconstruct(const Eigen::MatrixXd& assigned, std::int64_t shots, const RotationSet& rot,
                                 const ConfusionMatrix& conf, const MleOptions& opt = {}) {
  if (shots <= 0) throw ArgumentError("mle_reconstruct: shots must be > 0");
  const LinearEstimate lin = linear_inversion(assigned, rot, conf);
  const Eigen::MatrixXd corrected = corrected_frequencies(assigned, conf);
  const double floor = 1.0 / (opt.floor_shots_factor * static_cast<double>(shots));

  const Matrix start = project_positive(lin.rho);
  // Cholesky of a slightly regularized start: start + eps I = L L^dagger, T = L^dagger.
  const Matrix reg = (start + 1e-8 * Matrix::Identity(kTomoDim, kTomoDim)) / (1.0 + kTomoDim * 1e-8);
  const Matrix t0 = Eigen::LLT<Matrix>(reg).matrixL().adjoint();

  const Eigen::Index n = static_cast<Eigen::Index>(rot.size()) * kTomoDim;
  Matrix v(kTomoDim, n);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v.col(i) = rot.unitaries[static_cast<std::size_t>(i / kTomoDim)].row(i % kTomoDim).adjoint();
    q(i) = std::max(corrected(i / kTomoDim, i % kTomoDim), floor);
  }

  detail::MleFunctor functor(std::move(v), q);
  Eigen::LevenbergMarquardt<detail::MleFunctor> lm(functor);
  lm.setGtol(opt.gtol);
  lm.setXtol(1e-10);
  lm.setFtol(1e-9);
  lm.setMaxfev(10 * opt.max_iterations);
  Eigen::VectorXd x = detail::params_from_factor(t0);
  using Status = Eigen::LevenbergMarquardtSpace::Status;
  auto status = lm.minimizeInit(x);
  bool stalled = false;
  auto state_of = [](const Eigen::VectorXd& p) {
    const Matrix t = detail::factor_from_params(p);
    return Matrix(t.adjoint() * t / t.squaredNorm());
  };
  Matrix checkpoint = state_of(x);
  int steps = 0;
  while (status == Status::Running || status == Status::NotStarted) {
    status = lm.minimizeOneStep(x);
    ++steps;
    if (steps % opt.stall_window == 0) {
      Matrix now = state_of(x);
      if ((now - checkpoint).norm() <= opt.stall_tol) {
        stalled = true;
        break;
      }
      checkpoint = std::move(now);
    }
    if (steps >= opt.max_iterations) break;
  }

  MleResult out;
  const Matrix t = detail::factor_from_params(x);
  Matrix rho = t.adjoint() * t;
  rho /= rho.trace().real();
  out.rho = 0.5 * (rho + rho.adjoint());
  out.cost = tomography_cost(out.rho, corrected, rot, floor);
  out.start_cost = tomography_cost(start, corrected, rot, floor);
  out.iterations = steps;
  out.warning = !stalled && !(status == Status::RelativeReductionTooSmall || status == Status::RelativeErrorTooSmall ||
                  status == Status::RelativeErrorAndReductionTooSmall || status == Status::CosinusTooSmall ||
                  status == Status::FtolTooSmall || status == Status::XtolTooSmall ||
                  status == Status::GtolTooSmall);
  // The starting point is feasible, so never return something worse.
  if (!(out.cost <= out.start_cost)) {
    out.rho = start;
    out.cost = out.start_cost;
    out.warning = true;
  }
  return out;
}

inline MleResult mle_reconstruct(const Tomogram& t, const RotationSet& rot, const ConfusionMatrix& conf,
                                 const MleOptions& opt = {}) {
  return mle_reconstruct(t.frequencies(), t.shots, rot, conf, opt);
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, clamped to [0, 1].
inline double fidelity(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("fidelity: shape mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> ea(0.5 * (a + a.adjoint()));
  const Eigen::VectorXd la = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix sa = ea.eigenvectors() * la.cast<cplx>().asDiagonal() * ea.eigenvectors().adjoint();
  const Matrix m = sa * b * sa;
  const Eigen::VectorXd lm = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.adjoint())).eigenvalues();
  // Rounding noise on zero eigenvalues would otherwise add ~sqrt(eps) per eigenvalue.
  const double cut = 1e-13 * std::max(1.0, lm.cwiseAbs().maxCoeff());
  double root = 0.0;
  for (Eigen::Index i = 0; i < lm.size(); ++i) {
    if (lm(i) > cut) root += std::sqrt(lm(i));
  }
  return std::clamp(root * root, 0.0, 1.0);
}

inline double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dims() != b.dims()) throw DimensionError("fidelity: dims differ");
  return fidelity(a.data(), b.data());
}

// ---------------------------------------------------------------------------
// Text formats

/// One line per rotation: index followed by the nine counts.
inline void write_tomogram(std::ostream& os, const Tomogram& t) {
  os << "# shots " << t.shots << " seed " << t.seed << "\n";
  for (Eigen::Index j = 0; j < t.counts.rows(); ++j) {
    os << j;
    for (int s = 0; s < kTomoDim; ++s) os << ' ' << t.counts(j, s);
    os << '\n';
  }
}

inline Tomogram read_tomogram(std::istream& is) {
  Tomogram t;
  t.counts.setZero(kRotations, kTomoDim);
  std::vector<bool> seen(kRotations, false);
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string tag;
      ls >> tag >> tag;
      if (tag == "shots") ls >> t.shots >> tag >> t.seed;
      continue;
    }
    int j = -1;
    if (!(ls >> j) || j < 0 || j >= kRotations || seen[j]) throw IoError("tomogram: bad rotation index in '" + line + "'");
    std::int64_t sum = 0;
    for (int s = 0; s < kTomoDim; ++s) {
      if (!(ls >> t.counts(j, s)) || t.counts(j, s) < 0) throw IoError("tomogram: bad counts in '" + line + "'");
      sum += t.counts(j, s);
    }
    if (t.shots == 0) t.shots = sum;
    if (sum != t.shots) throw IoError("tomogram: row " + std::to_string(j) + " does not sum to the shot count");
    seen[j] = true;
    ++rows;
  }
  if (rows != kRotations) throw IoError("tomogram: expected 81 rows, got " + std::to_string(rows));
  return t;
}

/// Nine rows of nine numbers; '#' lines are comments.
inline ConfusionMatrix read_confusion(std::istream& is) {
  Eigen::MatrixXd m(kTomoDim, kTomoDim);
  int row = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (row >= kTomoDim) throw IoError("confusion: more than nine rows");
    std::istringstream ls(line);
    for (int c = 0; c < kTomoDim; ++c) {
      if (!(ls >> m(row, c))) throw IoError("confusion: row " + std::to_string(row) + " needs nine numbers");
    }
    ++row;
  }
  if (row != kTomoDim) throw IoError("confusion: expected nine rows");
  return ConfusionMatrix(m);
}

}  // namespace starcode
