#pragma once

// Lindblad master-equation integration with an adaptive Dormand-Prince 5(4)
// scheme, observable extraction, and the chevron calibration sweep.

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "starcode/model.hpp"

namespace starcode {

struct SolverOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = 0.01;  // us
  double initial_step = 1e-4;
  double min_step = 1e-12;
  double renormalize_limit = 1e-6;  ///< snapshot trace drift above this is an error
  long max_steps = 50'000'000;
};

struct SolverStats {
  long steps = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
  double max_trace_drift = 0.0;  ///< before renormalization
};

/// Snapshots are stored exactly as integrated (trace-renormalized only), so
/// diagnostics see the raw numerical state.
struct Trajectory {
  Dims dims;
  std::vector<double> times;
  std::vector<Matrix> states;
  SolverStats meta;

  std::size_t size() const noexcept { return times.size(); }
  DensityMatrix state(std::size_t i, double tol = 1e-6) const {
    return {dims, states.at(i), StateTolerance::uniform(tol)};
  }
};

/// Right-hand side of the master equation, using sparse term lists.
///   d rho/dt = -i (A - A^dagger) + sum_k L_k rho L_k^dagger,  A = H_eff rho,
/// with H_eff = H - (i/2) sum_k L_k^dagger L_k. Hermiticity of d rho/dt is
/// exact by construction.
class LindbladGenerator {
 public:
  LindbladGenerator(const HamiltonianSpec& h, const std::vector<LabeledOperator>& collapse) : n_(h.constant.dim()) {
    for (const auto& term : h.driven) {
      if (term.op.dims() != h.dims()) throw DimensionError("driven term dims do not match the Hamiltonian");
    }
    Matrix k = Matrix::Zero(n_, n_);
    for (const auto& l : collapse) {
      if (l.dims() != h.dims()) throw DimensionError("collapse operator dims do not match the Hamiltonian");
      k += l.data().adjoint() * l.data();
    }
    const Matrix heff0 = h.constant.data() - cplx(0.0, 0.5) * k;

    // Union sparsity pattern of every Hamiltonian piece.
    constexpr double kZero = 0.0;
    auto nonzero = [&](int i, int j) {
      if (heff0(i, j) != kZero) return true;
      for (const auto& term : h.driven) {
        if (term.op.data()(i, j) != kZero) return true;
      }
      return false;
    };
    for (int j = 0; j < n_; ++j) {
      for (int i = 0; i < n_; ++i) {
        if (nonzero(i, j)) {
          rows_.push_back(i);
          cols_.push_back(j);
          base_.push_back(heff0(i, j));
        }
      }
    }
    for (const auto& term : h.driven) {
      std::vector<cplx> vals(rows_.size());
      for (std::size_t p = 0; p < rows_.size(); ++p) vals[p] = term.op.data()(rows_[p], cols_[p]);
      coefficients_.push_back(term.coefficient);
      term_values_.push_back(std::move(vals));
    }

    for (const auto& l : collapse) {
      std::vector<std::pair<int, int>> idx;
      std::vector<cplx> val;
      for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
          if (l.data()(i, j) != kZero) {
            idx.emplace_back(i, j);
            val.push_back(l.data()(i, j));
          }
        }
      }
      for (std::size_t p = 0; p < idx.size(); ++p) {
        for (std::size_t q = 0; q < idx.size(); ++q) {
          jumps_.push_back({idx[p].first, idx[p].second, idx[q].first, idx[q].second, val[p] * std::conj(val[q])});
        }
      }
    }
    values_.resize(rows_.size());
    scratch_.resize(n_, n_);
  }

  int dim() const noexcept { return n_; }

  void evaluate(double t, const Matrix& rho, Matrix& out) {
    std::copy(base_.begin(), base_.end(), values_.begin());
    for (std::size_t k = 0; k < coefficients_.size(); ++k) {
      const double c = coefficients_[k](t);
      const auto& tv = term_values_[k];
      for (std::size_t p = 0; p < values_.size(); ++p) values_[p] += c * tv[p];
    }

    Matrix& a = scratch_;
    a.setZero();
    for (int col = 0; col < n_; ++col) {
      const cplx* r = rho.data() + static_cast<std::ptrdiff_t>(col) * n_;
      cplx* o = a.data() + static_cast<std::ptrdiff_t>(col) * n_;
      for (std::size_t p = 0; p < values_.size(); ++p) o[rows_[p]] += values_[p] * r[cols_[p]];
    }
    const cplx mi(0.0, -1.0);
    out.resize(n_, n_);
    for (int j = 0; j < n_; ++j) {
      for (int i = 0; i < n_; ++i) out(i, j) = mi * (a(i, j) - std::conj(a(j, i)));
    }
    for (const auto& jt : jumps_) out(jt.a, jt.c) += jt.w * rho(jt.b, jt.d);
  }

 private:
  struct JumpTerm {
    int a, b, c, d;  // out(a, c) += w * rho(b, d)
    cplx w;
  };

  int n_;
  std::vector<int> rows_, cols_;
  std::vector<cplx> base_;
  std::vector<std::function<double(double)>> coefficients_;
  std::vector<std::vector<cplx>> term_values_;
  std::vector<cplx> values_;
  std::vector<JumpTerm> jumps_;
  Matrix scratch_;
};

namespace detail {

inline double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1, double rtol, double atol) {
  double worst = 0.0;
  const Eigen::Index n = err.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double scale = atol + rtol * std::max(std::abs(y0.data()[k]), std::abs(y1.data()[k]));
    worst = std::max(worst, std::abs(err.data()[k]) / scale);
  }
  return worst;
}

}  // namespace detail

/// Integrates the master equation and returns one snapshot per requested time.
/// The first requested time must be >= 0 and is taken as the start time when
/// it is the only one or equals the initial time 0.
inline Trajectory evolve(const HamiltonianSpec& h, const std::vector<LabeledOperator>& collapse,
                         const DensityMatrix& rho0, const std::vector<double>& times,
                         const SolverOptions& opt = {}) {
  if (rho0.dims() != h.dims()) {
    throw DimensionError("evolve: state dims " + dims_to_string(rho0.dims()) + " vs Hamiltonian dims " +
                         dims_to_string(h.dims()));
  }
  if (times.empty()) throw ArgumentError("evolve: empty time grid");
  if (times.front() < 0.0) throw ArgumentError("evolve: times must be >= 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ArgumentError("evolve: times must be strictly increasing");
  }
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) throw ArgumentError("evolve: tolerances must be positive");

  LindbladGenerator gen(h, collapse);
  Trajectory traj;
  traj.dims = rho0.dims();

  // Dormand-Prince 5(4) tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  const int n = gen.dim();
  Matrix y = rho0.data();
  Matrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), k5(n, n), k6(n, n), k7(n, n), tmp(n, n), ynew(n, n), err(n, n);
  double t = 0.0;
  double hstep = std::min(opt.initial_step, opt.max_step);
  gen.evaluate(t, y, k1);
  traj.meta.rhs_evaluations = 1;

  auto record = [&](double when) {
    const cplx tr = y.trace();
    const double drift = std::abs(tr - cplx(1.0, 0.0));
    traj.meta.max_trace_drift = std::max(traj.meta.max_trace_drift, drift);
    if (drift > opt.renormalize_limit) throw SolverError(when, "trace drift " + std::to_string(drift) + " exceeds limit");
    traj.times.push_back(when);
    traj.states.push_back(y / tr.real());
  };

  for (double target : times) {
    while (t < target) {
      const double remaining = target - t;
      bool last = false;
      double hcur = std::min(hstep, opt.max_step);
      if (hcur >= remaining * (1.0 - 1e-12)) {
        hcur = remaining;
        last = true;
      }
      if (hcur < opt.min_step && !last) throw SolverError(t, "step size underflow");
      if (++traj.meta.steps > opt.max_steps) throw SolverError(t, "step budget exhausted");

      tmp = y + hcur * a21 * k1;
      gen.evaluate(t + c2 * hcur, tmp, k2);
      tmp = y + hcur * (a31 * k1 + a32 * k2);
      gen.evaluate(t + c3 * hcur, tmp, k3);
      tmp = y + hcur * (a41 * k1 + a42 * k2 + a43 * k3);
      gen.evaluate(t + c4 * hcur, tmp, k4);
      tmp = y + hcur * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      gen.evaluate(t + c5 * hcur, tmp, k5);
      tmp = y + hcur * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      gen.evaluate(t + hcur, tmp, k6);
      ynew = y + hcur * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      gen.evaluate(t + hcur, ynew, k7);
      traj.meta.rhs_evaluations += 6;
      err = hcur * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double en = detail::error_norm(err, y, ynew, opt.rtol, opt.atol);
      if (!std::isfinite(en)) throw SolverError(t, "non-finite state");
      const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (en <= 1.0) {
        t = last ? target : t + hcur;
        y.swap(ynew);
        k1.swap(k7);
        // Keep the proposed size when the step was only shortened to land on a snapshot.
        if (!last || factor < 1.0) hstep = hcur * factor;
      } else {
        ++traj.meta.rejected;
        hstep = hcur * std::max(factor, 0.2);
        if (hstep < opt.min_step) throw SolverError(t, "step size underflow");
      }
    }
    record(target);
  }
  return traj;
}

/// Convenience overload for evenly spaced snapshots on [0, tmax].
inline std::vector<double> linspace(double t0, double t1, int count) {
  if (count < 1) throw ArgumentError("linspace: count must be >= 1");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = t0;
    return out;
  }
  for (int i = 0; i < count; ++i) out[i] = t0 + (t1 - t0) * i / (count - 1);
  return out;
}

struct ObservableSeries {
  Eigen::MatrixXd values;  ///< rows = times, cols = observables
  double max_imaginary = 0.0;
  bool imaginary_warning = false;  ///< any |Im| > 1e-7
};

inline ObservableSeries observable_series(const Trajectory& traj, const std::vector<LabeledOperator>& ops) {
  for (const auto& op : ops) {
    if (op.dims() != traj.dims) throw DimensionError("observable_series: operator dims do not match trajectory");
  }
  ObservableSeries out;
  out.values.resize(static_cast<Eigen::Index>(traj.size()), static_cast<Eigen::Index>(ops.size()));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const cplx v = expectation(traj.states[i], ops[k]);
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v.real();
      out.max_imaginary = std::max(out.max_imaginary, std::abs(v.imag()));
    }
  }
  out.imaginary_warning = out.max_imaginary > 1e-7;
  return out;
}

/// Two-step correction rate through a lossy resonator (MHz).
inline double refill_rate(double omega, double kappa) {
  if (!(kappa > 0.0)) throw ArgumentError("refill_rate: kappa must be > 0");
  if (!(omega >= 0.0)) throw ArgumentError("refill_rate: omega must be >= 0");
  return omega * omega * kappa / (omega * omega + 2.0 * kappa * kappa);
}

// ---------------------------------------------------------------------------
// Chevron sweeps

enum class SweepAxis { RedPairCenter, BluePairCenter, QrFrequency };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::RedPairCenter: return "red_pair_center";
    case SweepAxis::BluePairCenter: return "blue_pair_center";
    case SweepAxis::QrFrequency: return "qr_frequency";
  }
  return "?";
}

inline std::optional<SweepAxis> parse_sweep_axis(const std::string& s) {
  if (s == "red_pair_center") return SweepAxis::RedPairCenter;
  if (s == "blue_pair_center") return SweepAxis::BluePairCenter;
  if (s == "qr_frequency") return SweepAxis::QrFrequency;
  return std::nullopt;
}

struct ChevronMap {
  SweepAxis axis;
  std::vector<double> detunings;  // MHz
  std::vector<double> times;      // us
  Eigen::MatrixXd n_q1;           ///< rows = detunings, cols = times
  Eigen::MatrixXd n_q2;
};

/// Runs `body(i)` for i in [0, count) on up to hardware_concurrency threads.
template <class F>
void parallel_for(std::size_t count, F&& body) {
  const std::size_t workers = std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Detuning sweep of one drive family in the logical-static frame. Grid values
/// are added to the `base` offsets; each grid point is an independent
/// trajectory and the optional noise model adds the Lindblad channels.
inline ChevronMap sweep_chevron(const DeviceParams& device, const DriveConfig& drive, SweepAxis axis,
                                const std::vector<double>& grid, const std::vector<double>& times,
                                const DensityMatrix& rho0, const std::optional<NoiseModel>& noise = std::nullopt,
                                const SidebandOffsets& base = {}, const SolverOptions& opt = {}) {
  if (grid.empty()) throw ArgumentError("sweep_chevron: empty detuning grid");
  ChevronMap map{axis, grid, times, Eigen::MatrixXd(grid.size(), times.size()),
                 Eigen::MatrixXd(grid.size(), times.size())};
  const std::vector<LabeledOperator> collapse = noise ? collapse_operators(*noise) : std::vector<LabeledOperator>{};
  const std::vector<LabeledOperator> ops{transmon_number(Q1), transmon_number(Q2)};
  parallel_for(grid.size(), [&](std::size_t i) {
    SidebandOffsets off = base;
    switch (axis) {
      case SweepAxis::RedPairCenter: off.red_pair_center += grid[i]; break;
      case SweepAxis::BluePairCenter: off.blue_pair_center += grid[i]; break;
      case SweepAxis::QrFrequency:
        off.qr1 += grid[i];
        off.qr2 += grid[i];
        break;
    }
    const HamiltonianSpec h = build_full_hamiltonian(device, drive, off);
    const Trajectory traj = evolve(h, collapse, rho0, times, opt);
    const ObservableSeries s = observable_series(traj, ops);
    map.n_q1.row(static_cast<Eigen::Index>(i)) = s.values.col(0).transpose();
    map.n_q2.row(static_cast<Eigen::Index>(i)) = s.values.col(1).transpose();
  });
  return map;
}

}  // namespace starcode
