// starcode-cli: run scenarios and sweeps, reconstruct tomograms, fit series,
// and print rate estimates. Results go to stdout as JSON; failures print a
// one-line JSON error record on stderr and exit nonzero.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "starcode/scenario.hpp"

using namespace starcode;

namespace {

int emit_error(const std::string& kind, const std::string& message, const std::string& field = {}) {
  Json e{{"kind", kind}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  std::cerr << Json{{"error", e}}.dump() << "\n";
  return kind == "config" || kind == "usage" ? 2 : 1;
}

std::filesystem::path default_out(const Config& cfg, const std::string& suffix) {
  return std::filesystem::path(cfg.scenario.name + suffix);
}

bool is_scdm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in && std::string(magic, 4) == "SCDM";
}

Json tomo_verb(const std::string& snapshot, const std::string& confusion, std::size_t index, std::int64_t shots,
               std::uint64_t seed) {
  const ConfusionMatrix conf = confusion == "ideal" ? ConfusionMatrix{} : load_confusion(confusion);
  const RotationSet rot = rotation_set();
  Json out;
  Tomogram t;
  std::optional<DensityMatrix> truth;
  if (is_scdm(snapshot)) {
    std::ifstream in(snapshot, std::ios::binary);
    const StateDump dump = read_scdm(in);
    if (index >= dump.states.size()) throw ArgumentError("snapshot index out of range");
    truth = transmon_state(DensityMatrix(dump.dims, dump.states[index]));
    t = simulate_counts(*truth, rot, conf, shots, seed);
    out["t"] = dump.times[index];
    out["index"] = index;
  } else {
    t = load_tomogram(snapshot);
  }
  const LinearEstimate lin = linear_inversion(t, rot, conf);
  const MleResult mle = mle_reconstruct(t, rot, conf);
  out["shots"] = t.shots;
  out["linear_min_eigenvalue"] = lin.min_eigenvalue;
  out["linear_negative"] = lin.negative;
  out["mle"] = {{"cost", mle.cost},
                {"start_cost", mle.start_cost},
                {"iterations", mle.iterations},
                {"warning", mle.warning},
                {"rho", matrix_json(mle.rho)}};
  const DensityMatrix est(qutrit_pair_dims(), mle.rho);
  out["metrics"] = Json::object();
  for (StateLabel l : {StateLabel::L0, StateLabel::L1, StateLabel::Lx}) {
    out["metrics"][to_string(l)] = {{"error_population", error_population(est, l)},
                                    {"coherence", coherence_metric(est, l)}};
  }
  if (truth) out["fidelity"] = fidelity(mle.rho, truth->data());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Star-code AQEC simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "Run a scenario and write series/summary files");
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (default <name>_out)");

  auto* sweep = app.add_subcommand("sweep", "Chevron sweep over one drive detuning");
  sweep->add_option("config", config_path, "sweep config (JSON)")->required();
  sweep->add_option("--out", out_dir, "output directory (default <name>_sweep)");

  std::string snapshot, confusion;
  std::size_t index = 0;
  std::int64_t shots = 5000;
  std::uint64_t seed = 1;
  auto* tomo = app.add_subcommand("tomo", "Reconstruct a tomogram or a dumped snapshot");
  tomo->add_option("snapshot", snapshot, "tomogram text file or states.scdm dump")->required();
  tomo->add_option("confusion", confusion, "confusion matrix file, or 'ideal'")->required();
  tomo->add_option("--index", index, "snapshot index inside a dump");
  tomo->add_option("--shots", shots, "shots per rotation when sampling a dump")->check(CLI::PositiveNumber);
  tomo->add_option("--seed", seed, "sampling seed for a dump");

  std::string series_path, column = "coherence";
  double skip = 0.0;
  auto* fit = app.add_subcommand("fit", "Fit A exp(-t/tau) + C to a series column");
  fit->add_option("series", series_path, "series file (tab separated, header row)")->required();
  fit->add_option("--column", column, "column to fit");
  fit->add_option("--skip", skip, "initial window excluded from the fit (us)")->check(CLI::NonNegativeNumber);

  std::optional<double> omega, kappa, g_qr, eps_q, delta, phi_dc, eps, omega_q1, omega_q2;
  std::string circuit_path;
  auto* rates = app.add_subcommand("rates", "Refill and sideband-rate estimates");
  rates->add_option("--omega", omega, "QR drive rate (MHz) for the refill rate");
  rates->add_option("--kappa", kappa, "resonator linewidth (MHz) for the refill rate");
  rates->add_option("--g-qr", g_qr, "transmon-resonator coupling (MHz)");
  rates->add_option("--eps-q", eps_q, "charge-drive amplitude (MHz)");
  rates->add_option("--delta", delta, "transmon-resonator detuning (MHz)");
  rates->add_option("--phi-dc", phi_dc, "coupler DC flux (flux quanta)");
  rates->add_option("--eps", eps, "flux-modulation amplitude (rad)");
  rates->add_option("--omega-q1", omega_q1, "qubit 1 frequency (GHz)");
  rates->add_option("--omega-q2", omega_q2, "qubit 2 frequency (GHz)");
  rates->add_option("--circuit", circuit_path, "JSON file with a circuit section (default parameters otherwise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage", e.what());
  }

  try {
    Json result;
    if (*run) {
      const Config cfg = load_config(config_path);
      result = run_scenario(cfg, out_dir.empty() ? default_out(cfg, "_out") : std::filesystem::path(out_dir));
    } else if (*sweep) {
      const Config cfg = load_config(config_path);
      result = run_sweep(cfg, out_dir.empty() ? default_out(cfg, "_sweep") : std::filesystem::path(out_dir));
    } else if (*tomo) {
      result = tomo_verb(snapshot, confusion, index, shots, seed);
    } else if (*fit) {
      std::ifstream in(series_path);
      if (!in) throw IoError("cannot open " + series_path);
      const SeriesTable table = read_series(in);
      const DecayFit f = fit_exponential(table.column("t_us"), table.column(column), skip);
      result = fit_json(f, skip);
      result["column"] = column;
    } else if (*rates) {
      result = Json::object();
      if (omega || kappa) {
        if (!omega || !kappa) throw ArgumentError("--omega and --kappa go together");
        result["refill_rate"] = refill_rate(*omega, *kappa);
      }
      if (g_qr || eps_q || delta) {
        if (!g_qr || !eps_q || !delta) throw ArgumentError("--g-qr, --eps-q and --delta go together");
        result["qr_sideband_rate"] = qr_sideband_rate(*g_qr, *eps_q, *delta);
      }
      if (phi_dc) {
        CircuitParams c;
        if (!circuit_path.empty()) {
          const Json j = detail::read_json_file(circuit_path);
          if (!j.contains("circuit")) throw ConfigError("circuit", "missing section");
          detail::parse_circuit(j["circuit"], c);
        }
        const double w1 = omega_q1.value_or(3.2049), w2 = omega_q2.value_or(3.6625);
        const AdiabaticCouplings g = adiabatic_couplings(c, *phi_dc, w1, w2);
        result["g1_ghz"] = g.g1;
        result["g2_ghz"] = g.g2;
        const NormalModes m = normal_modes(c, *phi_dc);
        result["mode_frequencies_ghz"] = {m.frequencies(0), m.frequencies(1), m.frequencies(2)};
        result["coupler_mode"] = m.coupler;
        if (eps) {
          const auto ee = StateVector::basis(qutrit_pair_dims(), {1, 1});
          const auto gf = StateVector::basis(qutrit_pair_dims(), {0, 2});
          result["qq_rate_ee_gf_mhz"] = qq_sideband_rate(c, *phi_dc, *eps, ee, gf, w1, w2);
        }
      }
      if (result.empty()) throw ArgumentError("rates: give --omega/--kappa, --g-qr/--eps-q/--delta or --phi-dc");
    }
    std::cout << result.dump(2) << "\n";
    return 0;
  } catch (const ConfigError& e) {
    return emit_error("config", e.what(), e.field());
  } catch (const Error& e) {
    return emit_error(to_string(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return emit_error("io", e.what());
  } catch (const std::exception& e) {
    return emit_error("internal", e.what());
  }
}
