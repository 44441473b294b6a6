#include "igs/cli.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "igs/algorithm.hpp"
#include "igs/collective.hpp"
#include "igs/error.hpp"
#include "igs/ideal_search.hpp"
#include "igs/io.hpp"
#include "igs/tuner.hpp"
#include "igs/validate.hpp"

namespace igs {

namespace {

using io::json;

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw OutputError("cannot open output file '" + path + "'");
  f << text;
  if (!f) throw OutputError("failed writing '" + path + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

ParamRange parse_range(const std::string& text, const char* name) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError(std::string(name) + " range must be a:b");
  try {
    std::size_t used_lo = 0, used_hi = 0;
    const std::string lo = text.substr(0, colon), hi = text.substr(colon + 1);
    ParamRange r{std::stod(lo, &used_lo), std::stod(hi, &used_hi)};
    if (used_lo != lo.size() || used_hi != hi.size()) throw std::invalid_argument(text);
    return r;
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(name) + " range '" + text + "' is not of the form a:b");
  }
}

std::string default_marked(int n) {
  return std::string(static_cast<std::size_t>(n / 2), '1') + std::string(static_cast<std::size_t>(n / 2), '0');
}

// Accepts a bare payload, an {"<command>": payload} wrapper, or a previously
// emitted summary carrying a "provenance" block.
json config_payload(const std::string& path, const std::string& command, std::string* output_path,
                    std::string* format) {
  const json j = io::read_json_file(path);
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  if (j.contains("output_path") && output_path) *output_path = j.at("output_path").get<std::string>();
  if (j.contains("format") && format) *format = j.at("format").get<std::string>();
  if (j.contains(command)) return j.at(command);
  if (j.contains("provenance")) return j.at("provenance");
  return j;
}

unsigned thread_cap(unsigned requested) {
  unsigned n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("IGS_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) throw ConfigError("IGS_THREADS must be a positive integer");
    n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

struct SimulateFlags {
  int n = 6;
  std::string marked;
  double og = 0.0, od = 0.0, rg = 0.0, rd = 0.0;
  int steps = 0;
  double window = 4.0;
  std::uint64_t seed = 0;
  int shots = 1000;
  bool mid_step = false;
  std::string scope = "all";
  std::string format = "csv";
  std::string output, summary, config;
  std::optional<double> expect;
};

int run_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err) {
  std::string output = f.output, format = f.format;
  const std::string marked = f.marked.empty() ? default_marked(f.n) : f.marked;
  AlgorithmConfig cfg = make_algorithm_config(f.n, marked, f.og, f.od, f.rg, f.rd, f.steps, f.window);
  const DetuningScope scope = io::parse_detuning_scope(f.scope);
  cfg.oracle_pulse.detuning_scope = cfg.reflection_pulse.detuning_scope = scope;
  cfg.rng_seed = f.seed;
  cfg.n_shots = f.shots;
  cfg.record_mid_step = f.mid_step;
  if (!f.config.empty()) {
    cfg = io::algorithm_config_from_json(config_payload(f.config, "simulate", &output, &format), cfg);
  }
  cfg.validate();
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");

  const RunResult result = run_search(cfg);
  const json summary = io::run_summary(cfg, result);
  if (format == "csv") {
    std::ostringstream csv;
    io::write_trace_csv(csv, result);
    emit(csv.str(), output, out);
  } else {
    emit(dump(summary), output, out);
  }
  if (!f.summary.empty()) emit(dump(summary), f.summary, out);

  if (f.expect && result.final_fidelity < *f.expect) {
    err << "final marked population " << result.final_fidelity << " below expected " << *f.expect << "\n";
    return kExitValidationFailure;
  }
  return kExitOk;
}

struct TuneFlags {
  std::string kind;
  int n = 6;
  std::string marked;
  std::string g0T_range = "1:40", deltaT_range = "1:40";
  int grid = 0;
  std::optional<double> target_phase;
  std::string objective;
  unsigned threads = 0;
  std::string output, config;
};

int run_tune(const TuneFlags& f, std::ostream& out, std::ostream& err) {
  std::string output = f.output;
  TuneTarget t;
  if (!f.kind.empty()) t.kind = parse_operator_kind(f.kind);
  t.ions = IonConfig(f.n);
  t.marked_bits = f.marked.empty() ? default_marked(f.n) : f.marked;
  t.g0T = parse_range(f.g0T_range, "g0T");
  t.deltaT = parse_range(f.deltaT_range, "deltaT");
  if (f.grid > 0) t.grid_density = f.grid;
  if (f.target_phase) t.target_phase = *f.target_phase;
  if (!f.objective.empty()) t.objective = parse_tune_objective(f.objective);
  if (!f.config.empty()) {
    t = io::tune_target_from_json(config_payload(f.config, "tune", &output, nullptr), t);
  } else if (f.kind.empty()) {
    throw ConfigError("tune needs --kind reflection|oracle");
  }
  t.threads = thread_cap(f.threads);
  t.validate();

  const TuneResult r = tune(t);
  emit(dump(io::tune_summary(t, r)), output, out);
  if (!r.converged) {
    err << "tuning failed: best objective " << r.objective_value << " above threshold "
        << t.objective_threshold << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

struct IdealFlags {
  long n = 0;
  long marked = 0;
  double phi = std::numbers::pi;
  std::optional<double> phi_w, phi_s;
  int steps = 0;
  std::string format = "csv";
  std::string output, config;
};

int run_ideal_cmd(const IdealFlags& f, std::ostream& out) {
  ideal::Database db{f.n, f.marked};
  double phi_w = f.phi_w.value_or(f.phi), phi_s = f.phi_s.value_or(f.phi);
  int steps = f.steps;
  std::string output = f.output, format = f.format;
  if (!f.config.empty()) {
    const json j = config_payload(f.config, "ideal", &output, &format);
    db.dimension = j.value("N", db.dimension);
    db.marked = j.value("marked", db.marked);
    const double phi = j.value("phi", f.phi);
    phi_w = j.value("phi_w", j.contains("phi") ? phi : phi_w);
    phi_s = j.value("phi_s", j.contains("phi") ? phi : phi_s);
    steps = j.value("steps", steps);
  }
  db.validate();
  if (steps < 0) throw ConfigError("step count must be non-negative");
  if (steps == 0) steps = ideal::min_steps(db.dimension);
  const auto pops = ideal::run_ideal(db, phi_w, phi_s, steps);

  if (format == "csv") {
    std::ostringstream csv;
    csv.precision(17);
    csv << "step,population\n";
    for (std::size_t k = 0; k < pops.size(); ++k) csv << k << ',' << pops[k] << '\n';
    emit(csv.str(), output, out);
  } else if (format == "json") {
    json j = {{"schema_version", io::kSchemaVersion},
              {"command", "ideal"},
              {"version", io::library_version()},
              {"provenance",
               {{"N", db.dimension}, {"marked", db.marked}, {"phi_w", phi_w}, {"phi_s", phi_s}, {"steps", steps}}},
              {"population", pops}};
    emit(dump(j), output, out);
  } else {
    throw ConfigError("format must be csv or json");
  }
  return kExitOk;
}

int run_basis(int n, bool chains, const std::string& output, std::ostream& out) {
  const IonConfig ions(n);
  if (chains) {
    emit(dump(io::chains_json(ions)), output, out);
  } else {
    std::ostringstream tsv;
    io::write_basis_tsv(tsv, *build_sector_basis(ions));
    emit(tsv.str(), output, out);
  }
  return kExitOk;
}

struct PulseFlags {
  int n = 6;
  double g0T = 0.0, deltaT = 0.0, window = 4.0;
  std::string addressed = "all";
  std::string marked;
  std::string scope = "all";
  std::string output, config;
};

IonMask parse_addressing(const std::string& spec, const IonConfig& ions, const std::string& marked) {
  if (spec == "all") return ions.all_ions();
  if (spec == "markedhalf") {
    return marked_ket(ions, marked.empty() ? default_marked(ions.n_ions()) : marked).ion_bits;
  }
  return parse_ion_bits(spec, ions.n_ions());
}

int run_pulse(const PulseFlags& f, std::ostream& out) {
  PulseFlags g = f;
  std::string output = f.output;
  if (!f.config.empty()) {
    const json j = config_payload(f.config, "pulse", &output, nullptr);
    g.n = j.value("N", g.n);
    g.g0T = j.value("g0T", g.g0T);
    g.deltaT = j.value("deltaT", g.deltaT);
    g.window = j.value("K", j.value("window", g.window));
    g.addressed = j.value("addressed", g.addressed);
    g.marked = j.value("marked", g.marked);
    g.scope = j.value("detuning_scope", g.scope);
  }
  const IonConfig ions(g.n);
  const PulseParams p{g.g0T, g.deltaT, g.window, parse_addressing(g.addressed, ions, g.marked),
                      io::parse_detuning_scope(g.scope)};
  validate_pulse(p, ions);
  const auto basis = build_sector_basis(ions);

  PhaseReport report;
  if (p.addressed == ions.all_ions()) {
    const MSBasis ms = build_ms_basis(*basis, build_sector_operators(*basis, ions.all_ions()));
    std::vector<std::string> labels;
    for (int j = ions.excitations(); j >= 0; --j) labels.push_back("j=" + std::to_string(j));
    report = extract_phases(*basis, p, reflection_probes(basis, ms), labels);
  } else if (std::popcount(p.addressed) == ions.excitations()) {
    std::vector<std::string> labels;
    for (int k = 0; k <= ions.excitations(); ++k) labels.push_back("Phi_" + std::to_string(k));
    report = extract_phases(*basis, p, phi_states(basis, p.addressed), labels);
  }

  json ladders = json::array();
  for (const auto& l : propagate_ladders(ions, p)) {
    ladders.push_back({{"subset_excitations", l.subset_excitations},
                       {"r", l.r},
                       {"multiplicity", l.multiplicity},
                       {"phase", std::arg(l.return_amplitude)},
                       {"return_population", std::norm(l.return_amplitude)}});
  }
  json j = {{"schema_version", io::kSchemaVersion},
            {"command", "pulse"},
            {"version", io::library_version()},
            {"provenance", io::to_json(p, ions.n_ions())},
            {"N", ions.n_ions()},
            {"probes", io::to_json(report)},
            {"ladders", ladders}};
  j["provenance"]["N"] = ions.n_ions();
  emit(dump(j), output, out);
  return kExitOk;
}

int run_validate(std::ostream& out) {
  const ValidationReport report = run_validation_suite();
  for (const auto& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  }
  return report.passed() ? kExitOk : kExitValidationFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grover search with trapped ions: pulse simulation, tuning and reference runs", "igs"};
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* s = app.add_subcommand("simulate", "run the pulse-synthesized search and emit the population trace");
  s->add_option("--N", sim.n, "number of ions (even)");
  s->add_option("--marked", sim.marked, "marked bitstring, ion 1 leftmost, N/2 ones");
  s->add_option("--oracle-g0T", sim.og);
  s->add_option("--oracle-deltaT", sim.od);
  s->add_option("--refl-g0T", sim.rg);
  s->add_option("--refl-deltaT", sim.rd);
  s->add_option("--steps", sim.steps, "Grover steps (default: minimal count)");
  s->add_option("--K", sim.window, "integration window tau in [-K, K]");
  s->add_option("--seed", sim.seed);
  s->add_option("--shots", sim.shots);
  s->add_flag("--mid-step", sim.mid_step, "also record populations between oracle and reflection");
  s->add_option("--detuning-scope", sim.scope)->check(CLI::IsMember({"all", "addressed"}));
  s->add_option("--format", sim.format)->check(CLI::IsMember({"csv", "json"}));
  s->add_option("--output", sim.output);
  s->add_option("--summary", sim.summary, "also write the JSON summary here");
  s->add_option("--expect-fidelity", sim.expect, "exit 1 if the final population is lower");
  s->add_option("--config", sim.config, "JSON config; its values override flags");

  TuneFlags tn;
  auto* t = app.add_subcommand("tune", "search pulse parameters for the reflection or the oracle");
  t->add_option("--kind", tn.kind)->check(CLI::IsMember({"reflection", "oracle"}));
  t->add_option("--N", tn.n);
  t->add_option("--marked", tn.marked);
  t->add_option("--g0T-range", tn.g0T_range, "a:b");
  t->add_option("--deltaT-range", tn.deltaT_range, "a:b");
  t->add_option("--grid", tn.grid, "grid points per axis");
  t->add_option("--target-phase", tn.target_phase);
  t->add_option("--objective", tn.objective, "symmetric (span of the search states) or database")
      ->check(CLI::IsMember({"symmetric", "database"}));
  t->add_option("--threads", tn.threads);
  t->add_option("--output", tn.output);
  t->add_option("--config", tn.config);

  IdealFlags id;
  auto* i = app.add_subcommand("ideal", "textbook Grover iteration on an abstract database");
  i->add_option("--N", id.n, "database size")->required();
  i->add_option("--marked", id.marked, "marked index");
  i->add_option("--phi", id.phi, "phase of both reflections");
  i->add_option("--phi-w", id.phi_w);
  i->add_option("--phi-s", id.phi_s);
  i->add_option("--steps", id.steps);
  i->add_option("--format", id.format)->check(CLI::IsMember({"csv", "json"}));
  i->add_option("--output", id.output);
  i->add_option("--config", id.config);

  int basis_n = 6;
  bool chains = false;
  std::string basis_output;
  auto* b = app.add_subcommand("basis", "dump the excitation sector or its chain census");
  b->add_option("--N", basis_n);
  b->add_flag("--chains", chains);
  b->add_option("--output", basis_output);

  PulseFlags pf;
  auto* p = app.add_subcommand("pulse", "phases imprinted by a single pulse");
  p->add_option("--N", pf.n);
  p->add_option("--g0T", pf.g0T);
  p->add_option("--deltaT", pf.deltaT);
  p->add_option("--K", pf.window);
  p->add_option("--addressed", pf.addressed, "bitmask, all, or markedhalf");
  p->add_option("--marked", pf.marked);
  p->add_option("--detuning-scope", pf.scope)->check(CLI::IsMember({"all", "addressed"}));
  p->add_option("--output", pf.output);
  p->add_option("--config", pf.config);

  auto* v = app.add_subcommand("validate", "run the invariant suite");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s->parsed()) return run_simulate(sim, out, err);
    if (t->parsed()) return run_tune(tn, out, err);
    if (i->parsed()) return run_ideal_cmd(id, out);
    if (b->parsed()) return run_basis(basis_n, chains, basis_output, out);
    if (p->parsed()) return run_pulse(pf, out);
    if (v->parsed()) return run_validate(out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidationFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace igs
