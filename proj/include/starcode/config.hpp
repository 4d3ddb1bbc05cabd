#pragma once

// JSON scenario configuration: sections scenario / device / drive / noise and
// an optional circuit block. Unknown keys are rejected.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "starcode/analysis.hpp"
#include "starcode/circuit.hpp"
#include "starcode/model.hpp"
#include "starcode/solver.hpp"

namespace starcode {

using Json = nlohmann::json;

enum class Frame { Rotating, Static, Full };

inline const char* to_string(Frame f) {
  switch (f) {
    case Frame::Rotating: return "rotating";
    case Frame::Static: return "static";
    case Frame::Full: return "full";
  }
  return "?";
}

struct TomographyConfig {
  bool enabled = false;
  std::int64_t shots = 5000;
  std::uint64_t seed = 1;
  std::string confusion;  ///< path; empty means ideal readout
};

struct SweepConfig {
  SweepAxis axis = SweepAxis::RedPairCenter;
  std::vector<double> grid;  ///< MHz
  bool noise = false;        ///< include the arm's collapse operators
  std::vector<int> start;    ///< basis state (q1, q2, r1, r2); empty picks one per axis

  std::vector<int> start_state() const {
    if (!start.empty()) return start;
    return axis == SweepAxis::QrFrequency ? std::vector<int>{1, 0, 0, 0} : std::vector<int>{1, 1, 0, 0};
  }
};

struct ScenarioConfig {
  std::string name = "scenario";
  Arm arm = Arm::FreeDecay;
  StateLabel initial = StateLabel::L0;
  double tmax = 27.0;  // us
  int snapshots = 109;
  Frame frame = Frame::Full;
  bool l0_resonant_qr = true;
  std::optional<double> skip;  ///< fit window; defaults per arm
  std::string baseline;        ///< summary document of a baseline run
  bool dump_states = false;
  SolverOptions solver;
  TomographyConfig tomography;
  std::optional<SweepConfig> sweep;

  double fit_skip() const { return skip ? *skip : default_skip(arm); }
};

struct Config {
  ScenarioConfig scenario;
  DeviceParams device;
  DriveConfig drive;
  NoiseModel noise;
  std::optional<CircuitParams> circuit;
  std::filesystem::path base_dir = ".";

  SidebandOffsets offsets() const {
    return scenario.l0_resonant_qr ? l0_resonant_offsets(device) : SidebandOffsets{};
  }
  HamiltonianSpec hamiltonian() const {
    switch (scenario.frame) {
      case Frame::Rotating: return build_rotating_hamiltonian(device, drive);
      case Frame::Static: return build_static_hamiltonian(device, drive, offsets());
      case Frame::Full: return build_full_hamiltonian(device, drive, offsets());
    }
    throw ArgumentError("unknown frame");
  }
  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
};

namespace detail {

class Section {
 public:
  Section(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_, "expected an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string field(const std::string& key) const { return prefix_ + "." + key; }

  /// Numbers, or "inf" / null for an infinite timescale.
  void number(const std::string& key, double& out, bool allow_inf = false) {
    const Json* v = find(key);
    if (!v) return;
    if (v->is_number()) {
      out = v->get<double>();
    } else if (allow_inf && (v->is_null() || (v->is_string() && v->get<std::string>() == "inf"))) {
      out = kInf;
    } else {
      throw ConfigError(field(key), allow_inf ? "expected a number, \"inf\" or null" : "expected a number");
    }
  }

  void integer(const std::string& key, int& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
    out = v->get<int>();
  }

  void boolean(const std::string& key, bool& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    out = v->get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    out = v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

 private:
  const Json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string(), std::string("parse error: ") + e.what());
  }
}

/// A section given as a string is loaded from that file (relative to the config).
inline Json section_value(const Json& v, const std::filesystem::path& base) {
  if (!v.is_string()) return v;
  const std::filesystem::path p(v.get<std::string>());
  return read_json_file(p.is_absolute() ? p : base / p);
}

inline void parse_device(const Json& j, DeviceParams& d) {
  Section s(j, "device");
  s.number("omega_q1", d.omega_q1);
  s.number("omega_q2", d.omega_q2);
  s.number("alpha_1", d.alpha_1);
  s.number("alpha_2", d.alpha_2);
  s.number("omega_r1", d.omega_r1);
  s.number("omega_r2", d.omega_r2);
  s.number("chi_1", d.chi_1);
  s.number("chi_2", d.chi_2);
  s.number("zz_ff1", d.zz_ff1);
  s.number("zz_ff2", d.zz_ff2);
  if (const Json* v = s.find("J")) {
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_array() || !(*v)[1].is_array() || (*v)[0].size() != 2 ||
        (*v)[1].size() != 2) {
      throw ConfigError("device.J", "expected a 2x2 array");
    }
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        if (!(*v)[a][b].is_number()) throw ConfigError("device.J", "entries must be numbers");
        d.J[a][b] = (*v)[a][b].get<double>();
      }
    }
  }
  s.finish();
}

inline void parse_drive(const Json& j, DriveConfig& d) {
  Section s(j, "drive");
  s.number("w_r", d.w_r);
  s.number("w_b", d.w_b);
  s.number("nu_r", d.nu_r);
  s.number("nu_b", d.nu_b);
  s.number("omega_qr1", d.omega_qr1);
  s.number("omega_qr2", d.omega_qr2);
  if (const Json* v = s.find("phases")) {
    if (!v->is_array() || v->size() != 4) throw ConfigError("drive.phases", "expected four numbers");
    for (int i = 0; i < 4; ++i) {
      if (!(*v)[i].is_number()) throw ConfigError("drive.phases", "expected four numbers");
      d.phases[i] = (*v)[i].get<double>();
    }
  }
  s.finish();
}

inline void parse_noise(const Json& j, NoiseModel& n) {
  Section s(j, "noise");
  for (auto [key, ptr] : {std::pair{"t1_ge_1", &n.t1_ge_1}, {"t1_ge_2", &n.t1_ge_2}, {"t1_ef_1", &n.t1_ef_1},
                          {"t1_ef_2", &n.t1_ef_2}, {"t_phi_1", &n.t_phi_1}, {"t_phi_2", &n.t_phi_2},
                          {"t1_up_1", &n.t1_up_1}, {"t1_up_2", &n.t1_up_2}, {"t_phi_ff", &n.t_phi_ff}}) {
    s.number(key, *ptr, true);
  }
  s.number("kappa_1", n.kappa_1);
  s.number("kappa_2", n.kappa_2);
  s.number("n_res", n.n_res);
  s.finish();
}

inline void parse_circuit(const Json& j, CircuitParams& c) {
  Section s(j, "circuit");
  s.number("c_q1", c.c_q1);
  s.number("c_q2", c.c_q2);
  s.number("c_c", c.c_c);
  s.number("c_q12", c.c_q12);
  s.number("e_j1", c.e_j1);
  s.number("e_j2", c.e_j2);
  s.number("e_jc", c.e_jc);
  s.finish();
}

inline std::vector<double> parse_grid(const Json& v) {
  std::vector<double> grid;
  if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError("scenario.sweep.grid", "entries must be numbers");
      grid.push_back(x.get<double>());
    }
  } else if (v.is_object()) {
    Section s(v, "scenario.sweep.grid");
    double start = 0.0, stop = 0.0;
    int count = 0;
    s.number("start", start);
    s.number("stop", stop);
    s.integer("count", count);
    s.finish();
    if (count < 0) throw ConfigError("scenario.sweep.grid.count", "must be >= 0");
    if (count == 1) grid.push_back(start);
    if (count > 1) grid = linspace(start, stop, count);
  } else {
    throw ConfigError("scenario.sweep.grid", "expected an array or {start, stop, count}");
  }
  if (grid.empty()) throw ConfigError("scenario.sweep.grid", "grid is empty");
  return grid;
}

inline void parse_scenario(const Json& j, ScenarioConfig& sc, bool& use_preset) {
  Section s(j, "scenario");
  s.string("name", sc.name);
  std::string label;
  s.string("initial", label);
  if (!label.empty()) {
    const auto l = parse_state_label(label);
    if (!l || !(*l == StateLabel::L0 || *l == StateLabel::L1 || *l == StateLabel::Lx)) {
      throw ConfigError("scenario.initial", "expected L0, L1 or Lx");
    }
    sc.initial = *l;
  }
  s.number("tmax", sc.tmax);
  s.integer("snapshots", sc.snapshots);
  std::string frame;
  s.string("frame", frame);
  if (!frame.empty()) {
    if (frame == "rotating") sc.frame = Frame::Rotating;
    else if (frame == "static") sc.frame = Frame::Static;
    else if (frame == "full") sc.frame = Frame::Full;
    else throw ConfigError("scenario.frame", "expected rotating, static or full");
  }
  std::string qr;
  s.string("qr_calibration", qr);
  if (!qr.empty()) {
    if (qr == "l0_resonant") sc.l0_resonant_qr = true;
    else if (qr == "none") sc.l0_resonant_qr = false;
    else throw ConfigError("scenario.qr_calibration", "expected l0_resonant or none");
  }
  if (const Json* v = s.find("skip")) {
    if (!v->is_number()) throw ConfigError("scenario.skip", "expected a number");
    sc.skip = v->get<double>();
  }
  s.string("baseline", sc.baseline);
  s.boolean("dump_states", sc.dump_states);
  s.boolean("preset", use_preset);
  if (const Json* v = s.find("solver")) {
    Section so(*v, "scenario.solver");
    so.number("rtol", sc.solver.rtol);
    so.number("atol", sc.solver.atol);
    so.number("max_step", sc.solver.max_step);
    so.finish();
  }
  if (const Json* v = s.find("tomography")) {
    if (v->is_string() && v->get<std::string>() == "off") {
      sc.tomography.enabled = false;
    } else {
      Section t(*v, "scenario.tomography");
      sc.tomography.enabled = true;
      double shots = static_cast<double>(sc.tomography.shots), seed = static_cast<double>(sc.tomography.seed);
      t.number("shots", shots);
      t.number("seed", seed);
      t.string("confusion", sc.tomography.confusion);
      t.finish();
      if (!(shots >= 1.0) || shots != std::floor(shots)) throw ConfigError("scenario.tomography.shots", "must be a positive integer");
      if (!(seed >= 0.0) || seed != std::floor(seed)) throw ConfigError("scenario.tomography.seed", "must be a non-negative integer");
      sc.tomography.shots = static_cast<std::int64_t>(shots);
      sc.tomography.seed = static_cast<std::uint64_t>(seed);
    }
  }
  if (const Json* v = s.find("sweep")) {
    Section sw(*v, "scenario.sweep");
    SweepConfig cfg;
    std::string axis;
    sw.string("axis", axis);
    const auto a = parse_sweep_axis(axis);
    if (!a) throw ConfigError("scenario.sweep.axis", "expected red_pair_center, blue_pair_center or qr_frequency");
    cfg.axis = *a;
    const Json* g = sw.find("grid");
    if (!g) throw ConfigError("scenario.sweep.grid", "missing");
    cfg.grid = parse_grid(*g);
    sw.boolean("noise", cfg.noise);
    if (const Json* st = sw.find("start")) {
      if (!st->is_array() || st->size() != 4) throw ConfigError("scenario.sweep.start", "expected [q1, q2, r1, r2]");
      const int limits[] = {3, 3, 2, 2};
      for (int k = 0; k < 4; ++k) {
        if (!(*st)[k].is_number_integer() || (*st)[k].get<int>() < 0 || (*st)[k].get<int>() >= limits[k]) {
          throw ConfigError("scenario.sweep.start", "level out of range");
        }
        cfg.start.push_back((*st)[k].get<int>());
      }
    }
    sw.finish();
    sc.sweep = cfg;
  }
  s.finish();
}

inline void check_arm(const Config& c) {
  const DriveConfig& d = c.drive;
  switch (c.scenario.arm) {
    case Arm::FreeDecay:
      if (d.w_r != 0.0 || d.w_b != 0.0 || d.omega_qr1 != 0.0 || d.omega_qr2 != 0.0) {
        throw ConfigError("drive", "free_decay runs with every drive off");
      }
      break;
    case Arm::Echo4QQ:
      if (!(d.w_r > 0.0) || !(d.w_b > 0.0)) throw ConfigError("drive.w_r", "echo_4qq needs both QQ pair rates");
      if (d.omega_qr1 != 0.0 || d.omega_qr2 != 0.0) throw ConfigError("drive.omega_qr1", "echo_4qq runs without QR drives");
      break;
    case Arm::Aqec:
    case Arm::IdealBreakeven: {
      const std::pair<const char*, double> rates[] = {
          {"drive.w_r", d.w_r}, {"drive.w_b", d.w_b}, {"drive.omega_qr1", d.omega_qr1}, {"drive.omega_qr2", d.omega_qr2}};
      for (const auto& [name, v] : rates) {
        if (!(v > 0.0)) throw ConfigError(name, std::string(to_string(c.scenario.arm)) + " needs every drive rate > 0");
      }
      break;
    }
  }
}

}  // namespace detail

/// Parses a config document. The chosen arm's parameter preset is applied
/// first (unless scenario.preset is false) and the sections override it.
inline Config parse_config(const Json& root, const std::filesystem::path& base_dir = ".") {
  if (!root.is_object()) throw ConfigError("(root)", "expected an object");
  for (auto it = root.begin(); it != root.end(); ++it) {
    static const std::set<std::string> known{"scenario", "device", "drive", "noise", "circuit"};
    if (!known.count(it.key())) throw ConfigError(it.key(), "unknown section");
  }
  if (!root.contains("scenario")) throw ConfigError("scenario", "missing section");
  const Json& sc = root["scenario"];
  if (!sc.is_object()) throw ConfigError("scenario", "expected an object");
  if (!sc.contains("arm") || !sc["arm"].is_string()) throw ConfigError("scenario.arm", "missing");
  const auto arm = parse_arm(sc["arm"].get<std::string>());
  if (!arm) throw ConfigError("scenario.arm", "expected free_decay, echo_4qq, aqec or ideal_breakeven");

  Config c;
  c.base_dir = base_dir;
  c.scenario.arm = *arm;
  c.scenario.frame = *arm == Arm::IdealBreakeven ? Frame::Rotating : Frame::Full;
  Json scenario_rest = sc;
  scenario_rest.erase("arm");
  bool use_preset = true;
  detail::parse_scenario(scenario_rest, c.scenario, use_preset);

  if (use_preset) {
    const ArmParameters p = arm_preset(*arm);
    c.device = p.device;
    c.drive = p.drive;
    c.noise = p.noise;
  }
  if (root.contains("device")) detail::parse_device(detail::section_value(root["device"], base_dir), c.device);
  if (root.contains("drive")) detail::parse_drive(detail::section_value(root["drive"], base_dir), c.drive);
  if (root.contains("noise")) detail::parse_noise(detail::section_value(root["noise"], base_dir), c.noise);
  if (root.contains("circuit")) {
    c.circuit = CircuitParams{};
    detail::parse_circuit(detail::section_value(root["circuit"], base_dir), *c.circuit);
    c.circuit->validate();
  }

  c.device.validate();
  c.drive.validate();
  c.noise.validate();
  // Calibration sweeps drive individual tones, so arm consistency is not enforced there.
  if (!c.scenario.sweep) detail::check_arm(c);
  const ScenarioConfig& s = c.scenario;
  if (!(s.tmax >= 0.0) || !std::isfinite(s.tmax)) throw ConfigError("scenario.tmax", "must be finite and >= 0");
  if (s.snapshots < 1) throw ConfigError("scenario.snapshots", "must be >= 1");
  if (s.snapshots == 1 && s.tmax != 0.0) throw ConfigError("scenario.snapshots", "a single snapshot needs tmax = 0");
  if (s.snapshots > 1 && !(s.tmax > 0.0)) throw ConfigError("scenario.tmax", "must be > 0 with several snapshots");
  if (s.skip && !(*s.skip >= 0.0)) throw ConfigError("scenario.skip", "must be >= 0");
  if (!(s.solver.rtol > 0.0)) throw ConfigError("scenario.solver.rtol", "must be > 0");
  if (!(s.solver.atol > 0.0)) throw ConfigError("scenario.solver.atol", "must be > 0");
  if (!(s.solver.max_step > 0.0)) throw ConfigError("scenario.solver.max_step", "must be > 0");
  return c;
}

inline Config load_config(const std::filesystem::path& path) {
  return parse_config(detail::read_json_file(path), path.has_parent_path() ? path.parent_path() : ".");
}

}  // namespace starcode
