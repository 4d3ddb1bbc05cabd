#pragma once

// Scenario runner: trajectories, observable series, fits, optional tomography,
// and the on-disk result bundle.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "starcode/analysis.hpp"
#include "starcode/config.hpp"
#include "starcode/tomography.hpp"

namespace starcode {

inline const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> cols{"t_us", "error_population", "coherence", "n_q1", "n_q2", "n_r1", "n_r2"};
  return cols;
}

struct TomographyRecord {
  std::size_t index = 0;
  double t = 0.0;
  Tomogram tomogram;
  MleResult mle;
  double linear_min_eigenvalue = 0.0;
  double fidelity = 0.0;  ///< MLE estimate vs the simulated two-transmon state
};

struct ScenarioResult {
  Trajectory trajectory;
  Eigen::MatrixXd series;  ///< columns as series_columns()
  std::optional<DecayFit> fit;
  std::string fit_error;
  std::optional<double> baseline_tau;
  std::optional<double> improvement;
  std::vector<TomographyRecord> tomography;
};

inline std::vector<double> scenario_times(const ScenarioConfig& s) {
  if (s.snapshots == 1) return {0.0};
  return linspace(0.0, s.tmax, s.snapshots);
}

inline ConfusionMatrix load_confusion(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open confusion matrix " + path.string());
  return read_confusion(in);
}

inline Tomogram load_tomogram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tomogram " + path.string());
  return read_tomogram(in);
}

inline ScenarioResult simulate_scenario(const Config& cfg) {
  const ScenarioConfig& s = cfg.scenario;
  ScenarioResult out;
  const auto times = scenario_times(s);
  const DensityMatrix rho0 = DensityMatrix::pure(logical_state(s.initial));
  out.trajectory = evolve(cfg.hamiltonian(), collapse_operators(cfg.noise), rho0, times, s.solver);

  const Trajectory& tr = out.trajectory;
  const auto obs = observable_series(tr, {transmon_number(Q1), transmon_number(Q2), resonator_number(R1),
                                          resonator_number(R2)});
  out.series.resize(static_cast<Eigen::Index>(tr.size()), 7);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.series(r, 0) = tr.times[i];
    out.series(r, 1) = error_population(tr.states[i], tr.dims, s.initial);
    out.series(r, 2) = coherence_metric(tr.states[i], tr.dims, s.initial);
    out.series.block(r, 3, 1, 4) = obs.values.row(r);
  }

  if (tr.size() >= 2) {
    try {
      out.fit = fit_exponential(tr.times, std::vector<double>(out.series.col(2).data(), out.series.col(2).data() + tr.size()),
                                s.fit_skip());
    } catch (const Error& e) {
      out.fit_error = e.what();
    }
  }

  if (!s.baseline.empty()) {
    const Json base = detail::read_json_file(cfg.resolve(s.baseline));
    if (!base.contains("fit") || !base["fit"].is_object() || !base["fit"].contains("tau") || !base["fit"]["tau"].is_number()) {
      throw ConfigError("scenario.baseline", "baseline summary has no fitted tau");
    }
    out.baseline_tau = base["fit"]["tau"].get<double>();
    if (out.fit) {
      DecayFit b;
      b.tau = *out.baseline_tau;
      out.improvement = improvement_factor(*out.fit, b);
    }
  }

  if (s.tomography.enabled) {
    const ConfusionMatrix conf = s.tomography.confusion.empty() ? ConfusionMatrix{}
                                                                : load_confusion(cfg.resolve(s.tomography.confusion));
    const RotationSet rot = rotation_set();
    out.tomography.resize(tr.size());
    parallel_for(tr.size(), [&](std::size_t i) {
      TomographyRecord& rec = out.tomography[i];
      rec.index = i;
      rec.t = tr.times[i];
      const DensityMatrix pair = transmon_state(tr.state(i));
      rec.tomogram = simulate_counts(pair, rot, conf, s.tomography.shots, s.tomography.seed + i);
      rec.linear_min_eigenvalue = linear_inversion(rec.tomogram, rot, conf).min_eigenvalue;
      rec.mle = mle_reconstruct(rec.tomogram, rot, conf);
      rec.fidelity = fidelity(rec.mle.rho, pair.data());
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_series(std::ostream& os, const Eigen::MatrixXd& series, const std::vector<std::string>& header) {
  for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "\t" : "") << header[k];
  os << "\n";
  for (Eigen::Index i = 0; i < series.rows(); ++i) {
    for (Eigen::Index k = 0; k < series.cols(); ++k) os << (k ? "\t" : "") << format_number(series(i, k));
    os << "\n";
  }
}

struct SeriesTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;

  std::vector<double> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ArgumentError("series has no column '" + name + "'");
    const auto k = static_cast<Eigen::Index>(it - header.begin());
    return std::vector<double>(values.col(k).data(), values.col(k).data() + values.rows());
  }
};

inline SeriesTable read_series(std::istream& is) {
  SeriesTable t;
  std::string line;
  if (!std::getline(is, line)) throw IoError("series: empty file");
  {
    std::istringstream ls(line);
    std::string name;
    while (std::getline(ls, name, '\t')) t.header.push_back(name);
  }
  if (t.header.empty()) throw IoError("series: missing header");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string cell;
    while (std::getline(ls, cell, '\t')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') throw IoError("series line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size()) throw IoError("series line " + std::to_string(lineno) + ": wrong column count");
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) t.values(i, k) = rows[i][k];
  }
  return t;
}

inline Json fit_json(const DecayFit& f, double skip) {
  return Json{{"A", f.A},         {"tau", f.tau},   {"C", f.C},
              {"sigma_tau", f.sigma_tau}, {"residual_norm", f.residual_norm},
              {"points", f.points}, {"skip", skip}};
}

inline Json matrix_json(const Matrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rr = Json::array(), ii = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      rr.push_back(m(i, k).real());
      ii.push_back(m(i, k).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return Json{{"re", re}, {"im", im}};
}

/// Summary document; contains nothing that depends on wall-clock time or thread timing.
inline Json summary_json(const Config& cfg, const ScenarioResult& r) {
  const ScenarioConfig& s = cfg.scenario;
  Json j;
  j["name"] = s.name;
  j["arm"] = to_string(s.arm);
  j["initial"] = to_string(s.initial);
  j["frame"] = to_string(s.frame);
  j["tmax"] = s.tmax;
  j["snapshots"] = s.snapshots;
  j["fit"] = r.fit ? fit_json(*r.fit, s.fit_skip()) : Json(nullptr);
  if (!r.fit_error.empty()) j["fit_error"] = r.fit_error;
  const Eigen::Index last = r.series.rows() - 1;
  j["initial_metrics"] = {{"error_population", r.series(0, 1)}, {"coherence", r.series(0, 2)}};
  j["final_metrics"] = {{"error_population", r.series(last, 1)}, {"coherence", r.series(last, 2)},
                        {"n_q1", r.series(last, 3)},           {"n_q2", r.series(last, 4)}};
  j["solver"] = {{"steps", r.trajectory.meta.steps},
                 {"rejected", r.trajectory.meta.rejected},
                 {"max_trace_drift", r.trajectory.meta.max_trace_drift}};
  if (r.baseline_tau) {
    j["baseline"] = {{"path", s.baseline}, {"tau", *r.baseline_tau}};
    j["improvement"] = r.improvement ? Json(*r.improvement) : Json(nullptr);
  }
  if (!r.tomography.empty()) {
    Json tomo = Json::array();
    for (const auto& rec : r.tomography) {
      tomo.push_back({{"index", rec.index},
                      {"t", rec.t},
                      {"fidelity", rec.fidelity},
                      {"mle_cost", rec.mle.cost},
                      {"mle_start_cost", rec.mle.start_cost},
                      {"mle_iterations", rec.mle.iterations},
                      {"mle_warning", rec.mle.warning},
                      {"linear_min_eigenvalue", rec.linear_min_eigenvalue}});
    }
    j["tomography"] = {{"shots", s.tomography.shots}, {"seed", s.tomography.seed}, {"snapshots", tomo}};
  }
  return j;
}

// Binary density-matrix dump: "SCDM", u32 version, u32 nsub, i32 dims[nsub],
// u64 count, then per snapshot a double time and dim*dim (re, im) doubles in
// row-major order. Native little-endian.
inline void write_scdm(std::ostream& os, const Trajectory& tr) {
  auto put = [&](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); };
  os.write("SCDM", 4);
  put(std::uint32_t{1});
  put(static_cast<std::uint32_t>(tr.dims.size()));
  for (int d : tr.dims) put(static_cast<std::int32_t>(d));
  put(static_cast<std::uint64_t>(tr.size()));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    put(tr.times[i]);
    const Matrix& m = tr.states[i];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        put(m(r, c).real());
        put(m(r, c).imag());
      }
    }
  }
  if (!os) throw IoError("failed writing density-matrix dump");
}

struct StateDump {
  Dims dims;
  std::vector<double> times;
  std::vector<Matrix> states;
};

inline StateDump read_scdm(std::istream& is) {
  auto get = [&](auto& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw IoError("density-matrix dump is truncated");
  };
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SCDM", 4) != 0) throw IoError("not a density-matrix dump (bad magic)");
  std::uint32_t version = 0, nsub = 0;
  get(version);
  if (version != 1) throw IoError("unsupported dump version " + std::to_string(version));
  get(nsub);
  if (nsub == 0 || nsub > 16) throw IoError("dump has an implausible subsystem count");
  StateDump d;
  for (std::uint32_t k = 0; k < nsub; ++k) {
    std::int32_t v = 0;
    get(v);
    d.dims.push_back(v);
  }
  check_dims(d.dims);
  const int dim = dims_product(d.dims);
  std::uint64_t count = 0;
  get(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    double t = 0.0;
    get(t);
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) {
        double re = 0.0, im = 0.0;
        get(re);
        get(im);
        m(r, c) = cplx(re, im);
      }
    }
    d.times.push_back(t);
    d.states.push_back(std::move(m));
  }
  return d;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

/// Writes series.tsv, summary.json and optionally states.scdm and
/// tomography/tomo_NNNN.txt plus mle_NNNN.json into `outdir`.
inline Json run_scenario(const Config& cfg, const std::filesystem::path& outdir) {
  const ScenarioResult r = simulate_scenario(cfg);
  std::filesystem::create_directories(outdir);
  std::ostringstream series;
  write_series(series, r.series, series_columns());
  write_text_file(outdir / "series.tsv", series.str());
  const Json summary = summary_json(cfg, r);
  write_text_file(outdir / "summary.json", summary.dump(2) + "\n");
  if (cfg.scenario.dump_states) {
    std::ofstream os(outdir / "states.scdm", std::ios::binary);
    if (!os) throw IoError("cannot write " + (outdir / "states.scdm").string());
    write_scdm(os, r.trajectory);
  }
  if (!r.tomography.empty()) {
    const auto dir = outdir / "tomography";
    std::filesystem::create_directories(dir);
    for (const auto& rec : r.tomography) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "%04zu", rec.index);
      std::ostringstream t;
      write_tomogram(t, rec.tomogram);
      write_text_file(dir / ("tomo_" + std::string(stem) + ".txt"), t.str());
      const Json mle{{"t", rec.t},         {"cost", rec.mle.cost},          {"start_cost", rec.mle.start_cost},
                     {"warning", rec.mle.warning}, {"iterations", rec.mle.iterations}, {"rho", matrix_json(rec.mle.rho)}};
      write_text_file(dir / ("mle_" + std::string(stem) + ".json"), mle.dump(2) + "\n");
    }
  }
  return summary;
}

/// Chevron sweep in the logical-static frame: n_q1.tsv / n_q2.tsv maps
/// (rows = detunings) and sweep.json with the centre line when the grid has
/// at least two points.
inline Json run_sweep(const Config& cfg, const std::filesystem::path& outdir) {
  if (!cfg.scenario.sweep) throw ConfigError("scenario.sweep", "missing section");
  const SweepConfig& sw = *cfg.scenario.sweep;
  const auto times = scenario_times(cfg.scenario);
  const DensityMatrix rho0 = DensityMatrix::pure(StateVector::basis(full_dims(), sw.start_state()));
  const ChevronMap map = sweep_chevron(cfg.device, cfg.drive, sw.axis, sw.grid, times, rho0,
                                       sw.noise ? std::optional<NoiseModel>(cfg.noise) : std::nullopt, cfg.offsets(),
                                       cfg.scenario.solver);
  std::filesystem::create_directories(outdir);
  std::vector<std::string> header{"detuning_mhz"};
  for (double t : times) header.push_back(format_number(t));
  for (const auto& [name, data] : {std::pair{"n_q1.tsv", &map.n_q1}, std::pair{"n_q2.tsv", &map.n_q2}}) {
    Eigen::MatrixXd table(data->rows(), data->cols() + 1);
    for (std::size_t i = 0; i < sw.grid.size(); ++i) table(static_cast<Eigen::Index>(i), 0) = sw.grid[i];
    table.rightCols(data->cols()) = *data;
    std::ostringstream os;
    write_series(os, table, header);
    write_text_file(outdir / name, os.str());
  }
  Json j;
  j["name"] = cfg.scenario.name;
  j["axis"] = to_string(sw.axis);
  j["grid_points"] = sw.grid.size();
  j["times"] = times.size();
  if (sw.grid.size() >= 2 && times.size() >= 5) {
    const ChevronCenter c = chevron_center(map);
    j["center"] = {{"detuning", c.detuning}, {"grid_detuning", sw.grid[c.index]}, {"fringe", c.fringe}};
  } else {
    j["center"] = nullptr;
  }
  write_text_file(outdir / "sweep.json", j.dump(2) + "\n");
  return j;
}

}  // namespace starcode
