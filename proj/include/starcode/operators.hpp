#pragma once

// Dimension-aware dense operator algebra over Q1(3) x Q2(3) x R1(2) x R2(2)
// and sublists of it. Subsystem order is always Q1, Q2, R1, R2 and the first
// listed subsystem is the most significant index of the Kronecker product.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "starcode/error.hpp"

namespace starcode {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Dims = std::vector<int>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Subsystem positions in the full register.
enum Subsystem : int { Q1 = 0, Q2 = 1, R1 = 2, R2 = 3 };

inline const Dims& full_dims() {
  static const Dims d{3, 3, 2, 2};
  return d;
}
inline const Dims& qutrit_pair_dims() {
  static const Dims d{3, 3};
  return d;
}

/// Transmon level indices.
enum Level : int { g = 0, e = 1, f = 2 };

inline int dims_product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

inline std::string dims_to_string(const Dims& dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ']';
  return os.str();
}

inline void check_dims(const Dims& dims) {
  for (int d : dims) {
    if (d < 2) throw DimensionError("subsystem dimension must be >= 2, got " + dims_to_string(dims));
  }
}

/// Flat index of a multi-index, first subsystem most significant.
inline int flat_index(const Dims& dims, const std::vector<int>& idx) {
  if (idx.size() != dims.size()) throw DimensionError("multi-index rank mismatch");
  int out = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= dims[k]) throw DimensionError("multi-index out of range");
    out = out * dims[k] + idx[k];
  }
  return out;
}

inline std::vector<int> multi_index(const Dims& dims, int flat) {
  std::vector<int> idx(dims.size());
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    idx[k] = flat % dims[k];
    flat /= dims[k];
  }
  return idx;
}

/// Complex square matrix tagged with the subsystem dimensions it acts on.
class LabeledOperator {
 public:
  LabeledOperator(Dims dims, Matrix data) : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    const int n = dims_product(dims_);
    if (data_.rows() != n || data_.cols() != n) {
      throw DimensionError("operator of size " + std::to_string(data_.rows()) + "x" +
                           std::to_string(data_.cols()) + " does not match dims " +
                           dims_to_string(dims_));
    }
  }

  static LabeledOperator zero(const Dims& dims) {
    const int n = dims_product(dims);
    return {dims, Matrix::Zero(n, n)};
  }
  static LabeledOperator identity(const Dims& dims) {
    const int n = dims_product(dims);
    return {dims, Matrix::Identity(n, n)};
  }

  const Dims& dims() const noexcept { return dims_; }
  const Matrix& data() const noexcept { return data_; }
  int dim() const noexcept { return static_cast<int>(data_.rows()); }

  LabeledOperator adjoint() const { return {dims_, data_.adjoint()}; }

  bool is_hermitian(double tol = 1e-10) const {
    return (data_ - data_.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }

  LabeledOperator& operator+=(const LabeledOperator& o) {
    require_same(o);
    data_ += o.data_;
    return *this;
  }
  LabeledOperator& operator-=(const LabeledOperator& o) {
    require_same(o);
    data_ -= o.data_;
    return *this;
  }
  LabeledOperator& operator*=(cplx s) {
    data_ *= s;
    return *this;
  }

  friend LabeledOperator operator+(LabeledOperator a, const LabeledOperator& b) { return a += b; }
  friend LabeledOperator operator-(LabeledOperator a, const LabeledOperator& b) { return a -= b; }
  friend LabeledOperator operator*(cplx s, LabeledOperator a) { return a *= s; }
  friend LabeledOperator operator*(LabeledOperator a, cplx s) { return a *= s; }
  friend LabeledOperator operator*(const LabeledOperator& a, const LabeledOperator& b) {
    a.require_same(b);
    return {a.dims_, a.data_ * b.data_};
  }

 private:
  void require_same(const LabeledOperator& o) const {
    if (o.dims_ != dims_) {
      throw DimensionError("operator dims " + dims_to_string(o.dims_) + " vs " + dims_to_string(dims_));
    }
  }

  Dims dims_;
  Matrix data_;
};

/// Normalized pure state.
class StateVector {
 public:
  StateVector(Dims dims, Vector amplitudes) : dims_(std::move(dims)), amps_(std::move(amplitudes)) {
    check_dims(dims_);
    if (amps_.size() != dims_product(dims_)) throw DimensionError("state length does not match dims");
    if (std::abs(amps_.norm() - 1.0) > 1e-10) {
      throw StateError("state vector norm " + std::to_string(amps_.norm()) + " differs from 1");
    }
  }

  /// Computational basis state |idx> where idx lists one level per subsystem.
  static StateVector basis(const Dims& dims, const std::vector<int>& idx) {
    Vector v = Vector::Zero(dims_product(dims));
    v(flat_index(dims, idx)) = 1.0;
    return {dims, v};
  }

  const Dims& dims() const noexcept { return dims_; }
  const Vector& amplitudes() const noexcept { return amps_; }
  int dim() const noexcept { return static_cast<int>(amps_.size()); }

  cplx inner(const StateVector& o) const {
    if (o.dims_ != dims_) throw DimensionError("inner product dims mismatch");
    return amps_.dot(o.amps_);
  }

  LabeledOperator projector() const { return {dims_, amps_ * amps_.adjoint()}; }

 private:
  Dims dims_;
  Vector amps_;
};

/// Tolerances for the density-matrix invariants; defaults are the strict ones.
struct StateTolerance {
  double hermiticity = 1e-10;
  double trace = 1e-9;
  double eigenvalue = 1e-8;

  static StateTolerance uniform(double tol) { return {tol, tol, tol}; }
};

struct StateReport {
  double hermiticity_deviation = 0.0;  ///< max |rho - rho^dagger| element
  double trace_deviation = 0.0;        ///< |Tr rho - 1|
  double min_eigenvalue = 0.0;
  bool passed = false;
  std::string message;
};

inline StateReport validate_matrix(const Matrix& rho, const StateTolerance& tol) {
  StateReport r;
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    r.message = "not a square matrix";
    return r;
  }
  r.hermiticity_deviation = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  r.trace_deviation = std::abs(rho.trace() - cplx(1.0, 0.0));
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();

  std::ostringstream msg;
  bool ok = true;
  if (r.hermiticity_deviation > tol.hermiticity) {
    ok = false;
    msg << "non-Hermitian (deviation " << r.hermiticity_deviation << "); ";
  }
  if (r.trace_deviation > tol.trace) {
    ok = false;
    msg << "trace " << rho.trace().real() << "; ";
  }
  if (r.min_eigenvalue < -tol.eigenvalue) {
    ok = false;
    msg << "negative eigenvalue " << r.min_eigenvalue << "; ";
  }
  r.passed = ok;
  r.message = ok ? "ok" : msg.str();
  return r;
}

/// Diagnostics only: never throws on an invalid state.
inline StateReport validate_state(const Matrix& rho, double tol) {
  return validate_matrix(rho, StateTolerance::uniform(tol));
}

/// Hermitian, unit-trace, positive semidefinite matrix (within tolerance).
class DensityMatrix {
 public:
  DensityMatrix(Dims dims, Matrix data, const StateTolerance& tol = {})
      : dims_(std::move(dims)), data_(std::move(data)) {
    for (int d : dims_) {
      if (d < 2) throw DimensionError("subsystem dimension must be >= 2");
    }
    const int n = dims_product(dims_);
    if (data_.rows() != n || data_.cols() != n) throw DimensionError("density matrix size does not match dims");
    const StateReport rep = validate_matrix(data_, tol);
    if (!rep.passed) throw StateError("invalid density matrix: " + rep.message);
  }

  static DensityMatrix pure(const StateVector& psi) {
    return {psi.dims(), psi.amplitudes() * psi.amplitudes().adjoint()};
  }

  const Dims& dims() const noexcept { return dims_; }
  const Matrix& data() const noexcept { return data_; }
  int dim() const noexcept { return static_cast<int>(data_.rows()); }
  double purity() const { return (data_ * data_).trace().real(); }

 private:
  Dims dims_;
  Matrix data_;
};

inline StateReport validate_state(const DensityMatrix& rho, double tol) { return validate_state(rho.data(), tol); }

// ---------------------------------------------------------------------------
// Construction helpers

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Kronecker product in the order the factors are given.
inline LabeledOperator tensor(const std::vector<LabeledOperator>& factors) {
  if (factors.empty()) throw ArgumentError("tensor of an empty factor list");
  Dims dims = factors.front().dims();
  Matrix data = factors.front().data();
  for (std::size_t k = 1; k < factors.size(); ++k) {
    const auto& fd = factors[k].dims();
    dims.insert(dims.end(), fd.begin(), fd.end());
    data = kron(data, factors[k].data());
  }
  return {std::move(dims), std::move(data)};
}

inline StateVector tensor(const std::vector<StateVector>& factors) {
  if (factors.empty()) throw ArgumentError("tensor of an empty factor list");
  Dims dims = factors.front().dims();
  Vector v = factors.front().amplitudes();
  for (std::size_t k = 1; k < factors.size(); ++k) {
    const auto& fd = factors[k].dims();
    dims.insert(dims.end(), fd.begin(), fd.end());
    v = kron(v, factors[k].amplitudes());
  }
  return {std::move(dims), std::move(v)};
}

/// Truncated annihilation operator on a d-level ladder.
inline LabeledOperator destroy(int d) {
  Matrix a = Matrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {{d}, a};
}

inline LabeledOperator number(int d) {
  Matrix n = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return {{d}, n};
}

/// |i><j| on a single d-level subsystem.
inline LabeledOperator transition(int d, int i, int j) {
  Matrix m = Matrix::Zero(d, d);
  m(i, j) = 1.0;
  return {{d}, m};
}

/// Places a single-subsystem operator at position `site` of `dims`.
inline LabeledOperator embed(const LabeledOperator& op, int site, const Dims& dims) {
  if (site < 0 || site >= static_cast<int>(dims.size())) throw DimensionError("embed: site out of range");
  if (op.dims().size() != 1 || op.dims()[0] != dims[site]) throw DimensionError("embed: operator does not fit site");
  std::vector<LabeledOperator> factors;
  factors.reserve(dims.size());
  for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
    factors.push_back(k == site ? op : LabeledOperator::identity({dims[k]}));
  }
  return tensor(factors);
}

/// Extends an operator on the leading subsystems with identities on the rest.
inline LabeledOperator extend(const LabeledOperator& op, const Dims& dims) {
  const Dims& od = op.dims();
  if (od.size() > dims.size() || !std::equal(od.begin(), od.end(), dims.begin())) {
    throw DimensionError("extend: " + dims_to_string(od) + " is not a prefix of " + dims_to_string(dims));
  }
  if (od.size() == dims.size()) return op;
  Dims rest(dims.begin() + static_cast<long>(od.size()), dims.end());
  return tensor({op, LabeledOperator::identity(rest)});
}

// ---------------------------------------------------------------------------
// Measurements

/// Tr(rho * op).
inline cplx expectation(const Matrix& rho, const LabeledOperator& op) {
  if (rho.rows() != op.dim()) throw DimensionError("expectation: dimension mismatch");
  // Tr(AB) = sum_ij A_ij B_ji
  return rho.cwiseProduct(op.data().transpose()).sum();
}

inline cplx expectation(const DensityMatrix& rho, const LabeledOperator& op) {
  if (rho.dims() != op.dims()) {
    throw DimensionError("expectation: state dims " + dims_to_string(rho.dims()) + " vs operator dims " +
                         dims_to_string(op.dims()));
  }
  return expectation(rho.data(), op);
}

/// Reduced matrix on the subsystems listed in `keep` (any order; result keeps
/// the original subsystem order). An empty keep set yields the 1x1 trace.
inline Matrix partial_trace(const Matrix& rho, const Dims& dims, std::vector<int> keep) {
  const int nsub = static_cast<int>(dims.size());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (int k : keep) {
    if (k < 0 || k >= nsub) throw DimensionError("partial_trace: invalid subsystem index " + std::to_string(k));
  }
  if (rho.rows() != dims_product(dims)) throw DimensionError("partial_trace: matrix does not match dims");

  std::vector<int> traced;
  for (int k = 0; k < nsub; ++k) {
    if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);
  }
  Dims kd, td;
  for (int k : keep) kd.push_back(dims[k]);
  for (int k : traced) td.push_back(dims[k]);
  const int nk = dims_product(kd);
  const int nt = dims_product(td);

  // Full flat index for each (kept, traced) pair.
  std::vector<int> full(static_cast<std::size_t>(nk) * nt);
  std::vector<int> idx(nsub);
  for (int a = 0; a < nk; ++a) {
    const auto ka = multi_index(kd.empty() ? Dims{} : kd, a);
    for (int t = 0; t < nt; ++t) {
      const auto ta = multi_index(td.empty() ? Dims{} : td, t);
      for (std::size_t i = 0; i < keep.size(); ++i) idx[keep[i]] = ka[i];
      for (std::size_t i = 0; i < traced.size(); ++i) idx[traced[i]] = ta[i];
      int flat = 0;
      for (int s = 0; s < nsub; ++s) flat = flat * dims[s] + idx[s];
      full[static_cast<std::size_t>(a) * nt + t] = flat;
    }
  }

  Matrix out = Matrix::Zero(nk, nk);
  for (int a = 0; a < nk; ++a) {
    for (int b = 0; b < nk; ++b) {
      cplx s = 0.0;
      for (int t = 0; t < nt; ++t) s += rho(full[a * nt + t], full[b * nt + t]);
      out(a, b) = s;
    }
  }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep,
                                   const StateTolerance& tol = StateTolerance::uniform(1e-6)) {
  if (keep.empty()) throw ArgumentError("partial_trace: keep set is empty; use partial_trace(Matrix, ...) for the scalar trace");
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  Dims kd;
  for (int k : sorted) {
    if (k < 0 || k >= static_cast<int>(rho.dims().size())) {
      throw DimensionError("partial_trace: invalid subsystem index " + std::to_string(k));
    }
    kd.push_back(rho.dims()[k]);
  }
  return {kd, partial_trace(rho.data(), rho.dims(), sorted), tol};
}

/// Two-transmon reduced state with both resonators traced out.
inline DensityMatrix transmon_state(const DensityMatrix& rho) {
  if (rho.dims() == qutrit_pair_dims()) return rho;
  return partial_trace(rho, {Q1, Q2});
}

}  // namespace starcode
