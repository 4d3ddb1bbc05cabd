#pragma once

// Logical-state metrics, exponential decay fits, fringe-frequency extraction,
// and the ZZ error-transparency / dispersive-shift engineering formulas.

#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "starcode/model.hpp"
#include "starcode/solver.hpp"

namespace starcode {

// ---------------------------------------------------------------------------
// Metrics

namespace detail {

inline Matrix pair_block(const Matrix& rho, const Dims& dims) {
  if (dims == qutrit_pair_dims()) return rho;
  if (dims == full_dims()) return partial_trace(rho, dims, {Q1, Q2});
  throw DimensionError("expected a two-transmon or full-register state, got " + dims_to_string(dims));
}

}  // namespace detail

/// Population in the error subspace associated with a logical state.
inline double error_population(const Matrix& rho, const Dims& dims, StateLabel label) {
  const Matrix pair = detail::pair_block(rho, dims);
  auto p = [&](int a, int b) { return pair(3 * a + b, 3 * a + b).real(); };
  const double eps0 = p(g, e) + p(e, g);
  const double eps1 = p(e, f) + p(f, e);
  switch (label) {
    case StateLabel::L0: return eps0;
    case StateLabel::L1: return eps1;
    case StateLabel::Lx: return eps0 + eps1;
    default: break;
  }
  throw ArgumentError(std::string("error_population: no error subspace for label ") + to_string(label));
}

inline double error_population(const DensityMatrix& rho, StateLabel label) {
  return error_population(rho.data(), rho.dims(), label);
}

/// Magnitude of the off-diagonal element most sensitive to logical dephasing,
/// normalized so that the ideal logical state scores 1.
inline double coherence_metric(const Matrix& rho, const Dims& dims, StateLabel label) {
  const Matrix pair = detail::pair_block(rho, dims);
  auto el = [&](int a, int b, int c, int d) { return pair(3 * a + b, 3 * c + d); };
  switch (label) {
    case StateLabel::L0: return 2.0 * std::abs(el(g, f, f, g));
    case StateLabel::L1: return 2.0 * std::abs(el(g, g, f, f));
    case StateLabel::Lx: return std::abs(expectation(pair, logical_x_pair()));
    default: break;
  }
  throw ArgumentError(std::string("coherence_metric: not a logical label: ") + to_string(label));
}

inline double coherence_metric(const DensityMatrix& rho, StateLabel label) {
  return coherence_metric(rho.data(), rho.dims(), label);
}

// ---------------------------------------------------------------------------
// Exponential fit

struct DecayFit {
  double A = 0.0;
  double tau = 0.0;  // us
  double C = 0.0;
  double sigma_tau = 0.0;
  double residual_norm = 0.0;
  int points = 0;
  int iterations = 0;
};

namespace detail {

// Parameters (A, log tau, C).
struct ExpFunctor : Eigen::DenseFunctor<double> {
  const Eigen::VectorXd& t;
  const Eigen::VectorXd& y;
  ExpFunctor(const Eigen::VectorXd& tt, const Eigen::VectorXd& yy)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(tt.size())), t(tt), y(yy) {}

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    const double tau = std::exp(x(1));
    r = (x(0) * (-t.array() / tau).exp() + x(2) - y.array()).matrix();
    return 0;
  }
  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
    const double tau = std::exp(x(1));
    const Eigen::ArrayXd ex = (-t.array() / tau).exp();
    j.resize(t.size(), 3);
    j.col(0) = ex.matrix();
    j.col(1) = (x(0) * ex * t.array() / tau).matrix();
    j.col(2).setOnes();
    return 0;
  }
};

/// Best (A, C) for a fixed tau by linear least squares; returns the SSR.
inline double linear_amplitudes(const Eigen::VectorXd& t, const Eigen::VectorXd& y, double tau, double& a, double& c) {
  Eigen::MatrixXd m(t.size(), 2);
  m.col(0) = (-t.array() / tau).exp().matrix();
  m.col(1).setOnes();
  const Eigen::Vector2d sol = m.colPivHouseholderQr().solve(y);
  a = sol(0);
  c = sol(1);
  return (m * sol - y).squaredNorm();
}

}  // namespace detail

/// Fits y = A exp(-t/tau) + C to the points with t >= skip_initial.
inline DecayFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y, double skip_initial = 0.0) {
  if (t.size() != y.size()) throw ArgumentError("fit_exponential: t and y differ in length");
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= skip_initial - 1e-12) {
      ts.push_back(t[i]);
      ys.push_back(y[i]);
    }
  }
  if (ts.size() < 4) throw ArgumentError("fit_exponential: need at least 4 points after the skip window");
  const Eigen::VectorXd tv = Eigen::Map<const Eigen::VectorXd>(ts.data(), static_cast<Eigen::Index>(ts.size()));
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  const double yspan = yv.maxCoeff() - yv.minCoeff();
  if (!(yspan > 1e-12 * std::max(1.0, yv.cwiseAbs().maxCoeff()))) {
    throw OptimizerError("fit_exponential: constant data, decay time unidentifiable");
  }
  const double tspan = tv.maxCoeff() - tv.minCoeff();
  if (!(tspan > 0.0)) throw ArgumentError("fit_exponential: all points share one time");

  // Multi-start over a logarithmic tau grid, amplitudes solved linearly.
  double best_ssr = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best(3);
  for (int k = 0; k <= 40; ++k) {
    const double tau = tspan * std::pow(10.0, -2.0 + 4.0 * k / 40.0);
    double a = 0.0, c = 0.0;
    const double ssr = detail::linear_amplitudes(tv, yv, tau, a, c);
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best << a, std::log(tau), c;
    }
  }

  detail::ExpFunctor functor(tv, yv);
  Eigen::LevenbergMarquardt<detail::ExpFunctor> lm(functor);
  lm.setXtol(1e-15);
  lm.setFtol(1e-15);
  lm.setGtol(1e-15);
  lm.setMaxfev(4000);
  Eigen::VectorXd x = best;
  lm.minimize(x);

  Eigen::VectorXd r(tv.size());
  functor(x, r);
  if (!x.allFinite() || !r.allFinite()) throw OptimizerError("fit_exponential: did not converge");
  DecayFit fit;
  fit.A = x(0);
  fit.tau = std::exp(x(1));
  fit.C = x(2);
  fit.residual_norm = r.norm();
  fit.points = static_cast<int>(tv.size());
  fit.iterations = static_cast<int>(lm.iterations());
  if (!(fit.tau > 0.0) || fit.tau > 1e6 * tspan || std::abs(fit.A) < 1e-12 * yspan) {
    throw OptimizerError("fit_exponential: decay time unidentifiable from the data");
  }

  Eigen::MatrixXd jac;
  functor.df(x, jac);
  const int dof = fit.points - 3;
  const double s2 = dof > 0 ? r.squaredNorm() / dof : 0.0;
  const Eigen::Matrix3d jtj = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(jtj);
  if (lu.isInvertible()) {
    const Eigen::Matrix3d cov = s2 * lu.inverse();
    fit.sigma_tau = fit.tau * std::sqrt(std::max(0.0, cov(1, 1)));
  } else {
    fit.sigma_tau = std::numeric_limits<double>::infinity();
  }
  return fit;
}

/// Window excluded from fits: the corrected arms spend their first 1.5 us settling.
inline double default_skip(Arm arm) {
  return arm == Arm::Aqec || arm == Arm::IdealBreakeven ? 1.5 : 0.0;
}

inline double improvement_factor(const DecayFit& arm, const DecayFit& baseline) {
  if (!(baseline.tau > 0.0)) throw ArgumentError("improvement_factor: baseline tau must be > 0");
  return arm.tau / baseline.tau;
}

// ---------------------------------------------------------------------------
// Fringe frequencies and chevron centres

/// Frequency of the best single-sinusoid least-squares fit
/// y ~ a + b cos(2 pi f t) + c sin(2 pi f t), searched over (f_min, f_max].
/// The default range runs from half a cycle per record to the grid Nyquist rate.
inline double fringe_frequency(const std::vector<double>& t, const std::vector<double>& y, double f_min = -1.0,
                               double f_max = -1.0) {
  if (t.size() != y.size() || t.size() < 5) throw ArgumentError("fringe_frequency: need >= 5 matching samples");
  const Eigen::Index n = static_cast<Eigen::Index>(t.size());
  const Eigen::VectorXd tv = Eigen::Map<const Eigen::VectorXd>(t.data(), n);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  const double span = tv(n - 1) - tv(0);
  if (!(span > 0.0)) throw ArgumentError("fringe_frequency: zero time span");
  if (f_min <= 0.0) f_min = 0.5 / span;
  if (f_max <= 0.0) f_max = 0.5 * static_cast<double>(n - 1) / span;

  auto ssr = [&](double f) {
    Eigen::MatrixXd m(n, 3);
    m.col(0).setOnes();
    m.col(1) = (kTwoPi * f * tv.array()).cos().matrix();
    m.col(2) = (kTwoPi * f * tv.array()).sin().matrix();
    const Eigen::VectorXd sol = m.colPivHouseholderQr().solve(yv);
    return (m * sol - yv).squaredNorm();
  };

  const int grid = std::max(200, static_cast<int>(20.0 * (f_max - f_min) * span));
  const double df = (f_max - f_min) / grid;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= grid; ++k) {
    const double v = ssr(f_min + k * df);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  // Golden-section refinement inside the bracketing grid cells.
  double lo = f_min + std::max(0, best - 1) * df, hi = f_min + std::min(grid, best + 1) * df;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double v1 = ssr(x1), v2 = ssr(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    if (v1 < v2) {
      hi = x2;
      x2 = x1;
      v2 = v1;
      x1 = hi - phi * (hi - lo);
      v1 = ssr(x1);
    } else {
      lo = x1;
      x1 = x2;
      v1 = v2;
      x2 = lo + phi * (hi - lo);
      v2 = ssr(x2);
    }
  }
  return 0.5 * (lo + hi);
}

struct ChevronCenter {
  std::vector<double> fringe;  ///< fringe frequency per detuning (MHz)
  std::size_t index = 0;       ///< grid point with the slowest fringe
  double detuning = 0.0;       ///< parabolic refinement around that point
};

/// Centre line of a chevron: the detuning at which the fringe is slowest.
inline ChevronCenter chevron_center(const ChevronMap& map, bool use_q2 = false) {
  if (map.detunings.size() < 2) throw ArgumentError("chevron_center: need at least two detunings");
  const Eigen::MatrixXd& data = use_q2 ? map.n_q2 : map.n_q1;
  ChevronCenter out;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    std::vector<double> row(data.cols());
    for (Eigen::Index k = 0; k < data.cols(); ++k) row[k] = data(i, k);
    out.fringe.push_back(fringe_frequency(map.times, row));
  }
  out.index = static_cast<std::size_t>(std::min_element(out.fringe.begin(), out.fringe.end()) - out.fringe.begin());
  out.detuning = map.detunings[out.index];
  const std::size_t i = out.index;
  if (i > 0 && i + 1 < out.fringe.size()) {
    const double x0 = map.detunings[i - 1], x1 = map.detunings[i], x2 = map.detunings[i + 1];
    const double y0 = out.fringe[i - 1], y1 = out.fringe[i], y2 = out.fringe[i + 1];
    const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if (a > 0.0) out.detuning = std::clamp(-b / (2.0 * a), x0, x2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Level tables and ZZ engineering

/// Two-transmon level energies E(j, k) in MHz, referenced to E(0, 0) = 0.
class LevelSpec {
 public:
  explicit LevelSpec(Eigen::MatrixXd energies) : e_(std::move(energies)) {
    if (e_.rows() != e_.cols() || e_.rows() < 3) throw DimensionError("LevelSpec: need a square table with n >= 3");
    e_.array() -= e_(0, 0);
  }

  int levels() const noexcept { return static_cast<int>(e_.rows()); }
  double operator()(int j, int k) const { return e_(j, k); }
  bool contains(int j, int k) const noexcept { return j >= 0 && k >= 0 && j < levels() && k < levels(); }
  const Eigen::MatrixXd& table() const noexcept { return e_; }

  /// E = j w1 + k w2.
  static LevelSpec harmonic(double w1, double w2, int n = 3) { return duffing(w1, w2, 0.0, 0.0, n); }

  /// Uncoupled Duffing ladders.
  static LevelSpec duffing(double w1, double w2, double alpha1, double alpha2, int n = 3) {
    Eigen::MatrixXd e(n, n);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) e(j, k) = single(w1, alpha1, j) + single(w2, alpha2, k);
    }
    return LevelSpec(e);
  }

  /// Duffing ladders plus the cross-Kerr polynomial sum_ab J_ab n1^a n2^b.
  static LevelSpec from_cross_kerr(const DeviceParams& d, int n = 3) {
    Eigen::MatrixXd e = duffing(d.omega_q1, d.omega_q2, d.alpha_1, d.alpha_2, n).table();
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int a = 1; a <= 2; ++a) {
          for (int b = 1; b <= 2; ++b) e(j, k) += d.J[a - 1][b - 1] * std::pow(j, a) * std::pow(k, b);
        }
      }
    }
    return LevelSpec(e);
  }

  static double single(double w, double alpha, int level) { return level * w + alpha * level * (level - 1) / 2.0; }

 private:
  Eigen::MatrixXd e_;
};

/// Measured two-transmon ZZ shifts (MHz); defaults are the device values.
///   zz_ge  = (E_ee - E_ge) - (E_eg - E_gg)
///   zz_gf1 = (E_ef - E_gf) - (E_eg - E_gg),  zz_gf2 = (E_fe - E_fg) - (E_ge - E_gg)
///   zz_ef1 = (E_fe - E_ee) - (E_fg - E_eg),  zz_ef2 = (E_ef - E_ee) - (E_gf - E_ge)
///   zz_ff1 = (E_ff - E_ef) - (E_fg - E_eg),  zz_ff2 = (E_ff - E_fe) - (E_gf - E_ge)
struct MeasuredZZ {
  double zz_ge = -0.261;
  double zz_ef1 = -0.130;
  double zz_ef2 = -0.301;
  double zz_ff1 = -0.171;
  double zz_ff2 = -0.289;
  double zz_gf1 = -0.619;
  double zz_gf2 = -0.464;
};

/// Levels built from the Duffing ladders plus interaction shifts
/// S_jk = E_jk - E_j0 - E_0k fixed by zz_ge (S_11), zz_gf1 (S_12), zz_ff1 and
/// zz_ff2 (S_22, S_21). The seven measured shifts overdetermine the four
/// S_jk; the remaining three are reported by zz_consistency.
inline LevelSpec levels_from_zz(const DeviceParams& d, const MeasuredZZ& zz, int n = 3) {
  Eigen::MatrixXd e = LevelSpec::duffing(d.omega_q1, d.omega_q2, d.alpha_1, d.alpha_2, n).table();
  const double s11 = zz.zz_ge;
  const double s12 = zz.zz_gf1;
  const double s22 = s12 + zz.zz_ff1;
  const double s21 = s22 - zz.zz_ff2;
  e(1, 1) += s11;
  e(1, 2) += s12;
  e(2, 1) += s21;
  e(2, 2) += s22;
  return LevelSpec(e);
}

/// ZZ shifts implied by a level table, in the MeasuredZZ layout.
inline MeasuredZZ implied_zz(const LevelSpec& l) {
  MeasuredZZ z;
  z.zz_ge = (l(1, 1) - l(0, 1)) - (l(1, 0) - l(0, 0));
  z.zz_gf1 = (l(1, 2) - l(0, 2)) - (l(1, 0) - l(0, 0));
  z.zz_gf2 = (l(2, 1) - l(2, 0)) - (l(0, 1) - l(0, 0));
  z.zz_ef1 = (l(2, 1) - l(1, 1)) - (l(2, 0) - l(1, 0));
  z.zz_ef2 = (l(1, 2) - l(1, 1)) - (l(0, 2) - l(0, 1));
  z.zz_ff1 = (l(2, 2) - l(1, 2)) - (l(2, 0) - l(1, 0));
  z.zz_ff2 = (l(2, 2) - l(2, 1)) - (l(0, 2) - l(0, 1));
  return z;
}

/// Residuals of the two error-transparency conditions; zeros mean no logical
/// phase accumulates after a correction cycle.
inline std::pair<double, double> error_transparency_residual(const LevelSpec& l) {
  return {(l(2, 2) - l(1, 2)) - (l(2, 0) - l(1, 0)), (l(2, 2) - l(2, 1)) - (l(0, 2) - l(0, 1))};
}

enum class SidebandKind { Red, Blue };

/// Second-order energy shift of |jk> from a far-detuned QQ sideband of
/// strength g at frequency nu (MHz). Terms whose partner level lies outside
/// the table are dropped, matching a simulation truncated to the same levels.
inline double dispersive_shift(const LevelSpec& levels, double g, double nu, SidebandKind kind, int j, int k) {
  if (!levels.contains(j, k)) throw ArgumentError("dispersive_shift: level out of range");
  struct Partner {
    int dj, dk;
    double weight;
  };
  std::array<Partner, 2> partners{};
  if (kind == SidebandKind::Red) {
    partners = {{{-1, +1, double(j * (k + 1))}, {+1, -1, double((j + 1) * k)}}};
  } else {
    partners = {{{+1, +1, double((j + 1) * (k + 1))}, {-1, -1, double(j * k)}}};
  }
  double shift = 0.0;
  for (const auto& p : partners) {
    const int pj = j + p.dj, pk = k + p.dk;
    if (p.weight == 0.0 || !levels.contains(pj, pk)) continue;
    const double gap = levels(j, k) - levels(pj, pk);
    for (double s : {-1.0, 1.0}) {
      const double denom = gap + s * nu;
      if (std::abs(denom) < 1e-6) {
        throw ArgumentError("dispersive_shift: sideband resonant with |" + std::to_string(j) + std::to_string(k) +
                            "> <-> |" + std::to_string(pj) + std::to_string(pk) + ">");
      }
      shift += g * g * p.weight / denom;
    }
  }
  return shift;
}

struct SidebandTone {
  SidebandKind kind;
  double g;   // MHz
  double nu;  // MHz
};

/// Levels with every tone's second-order shift added.
inline LevelSpec shifted_levels(const LevelSpec& levels, const std::vector<SidebandTone>& tones) {
  Eigen::MatrixXd e = levels.table();
  for (int j = 0; j < levels.levels(); ++j) {
    for (int k = 0; k < levels.levels(); ++k) {
      for (const auto& tone : tones) e(j, k) += dispersive_shift(levels, tone.g, tone.nu, tone.kind, j, k);
    }
  }
  return LevelSpec(e);
}

struct ZZCancellation {
  double nu1 = 0.0;  ///< tone near |ef> <-> |gh> (MHz)
  double nu2 = 0.0;  ///< tone near |fe> <-> |hg>
  std::pair<double, double> residual{0.0, 0.0};
  int iterations = 0;
};

/// Two extra red sidebands of strength g near |ef> <-> |gh> and |fe> <-> |hg>,
/// tuned by a two-variable Newton search until both error-transparency
/// residuals vanish within `tol` MHz. Needs a table with the |h> level.
inline ZZCancellation cancel_zz(const LevelSpec& levels, double g, double tol = 1e-4, int max_iter = 100) {
  if (levels.levels() < 4) throw DimensionError("cancel_zz: the |h> level (n >= 4) is required");
  if (!(g > 0.0)) throw ArgumentError("cancel_zz: g must be > 0");
  const auto r0 = error_transparency_residual(levels);
  auto residual = [&](double nu1, double nu2) {
    const LevelSpec s = shifted_levels(levels, {{SidebandKind::Red, g, nu1}, {SidebandKind::Red, g, nu2}});
    const auto r = error_transparency_residual(s);
    return Eigen::Vector2d(r.first, r.second);
  };

  // Leading-term estimate: the near-resonant partner |gh> (|hg>) dominates the
  // shift of |ef> (|fe>), which enters the first (second) residual with a
  // minus sign, so 3 g^2 / (gap -+ nu) = r. Both tone sides are tried.
  const double gap1 = std::abs(levels(1, 2) - levels(0, 3));
  const double gap2 = std::abs(levels(2, 1) - levels(3, 0));
  const double r1 = r0.first != 0.0 ? r0.first : 1e-3;
  const double r2 = r0.second != 0.0 ? r0.second : 1e-3;
  Eigen::Vector2d x(gap1, gap2);
  double best = std::numeric_limits<double>::infinity();
  for (double a : {gap1 + 3.0 * g * g / r1, gap1 - 3.0 * g * g / r1}) {
    for (double b : {gap2 + 3.0 * g * g / r2, gap2 - 3.0 * g * g / r2}) {
      try {
        const double n = residual(a, b).norm();
        if (n < best) {
          best = n;
          x << a, b;
        }
      } catch (const ArgumentError&) {
      }
    }
  }
  if (!std::isfinite(best)) throw OptimizerError("cancel_zz: no usable starting point");

  ZZCancellation out;
  Eigen::Vector2d r = residual(x(0), x(1));
  for (int it = 0; it < max_iter && r.cwiseAbs().maxCoeff() > tol; ++it) {
    Eigen::Matrix2d jac;
    const double h = 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff());
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector2d xp = x;
      xp(c) += h;
      jac.col(c) = (residual(xp(0), xp(1)) - r) / h;
    }
    Eigen::Vector2d step = jac.fullPivLu().solve(-r);
    // Backtrack so that no step jumps across a resonance.
    double lambda = 1.0;
    for (int bt = 0; bt < 30; ++bt) {
      const Eigen::Vector2d trial = x + lambda * step;
      try {
        const Eigen::Vector2d rt = residual(trial(0), trial(1));
        if (rt.norm() < r.norm()) {
          x = trial;
          r = rt;
          break;
        }
      } catch (const ArgumentError&) {
      }
      lambda *= 0.5;
    }
    out.iterations = it + 1;
  }
  if (r.cwiseAbs().maxCoeff() > tol) throw OptimizerError("cancel_zz: residuals did not converge");
  out.nu1 = x(0);
  out.nu2 = x(1);
  out.residual = {r(0), r(1)};
  return out;
}

}  // namespace starcode
