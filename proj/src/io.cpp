#include "igs/io.hpp"

#include <fstream>
#include <map>
#include <ostream>

#include "igs/error.hpp"

#ifndef IGS_VERSION
#define IGS_VERSION "0.0.0"
#endif

namespace igs::io {

namespace {

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

json range_json(const ParamRange& r) { return json::array({r.lo, r.hi}); }

ParamRange range_from_json(const json& j, const char* key, ParamRange fallback) {
  if (!j.contains(key)) return fallback;
  const json& r = j.at(key);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
    throw ConfigError(std::string("field '") + key + "' must be [lo, hi]");
  }
  return {r[0].get<double>(), r[1].get<double>()};
}

std::string method_name(IntegratorMethod m) {
  return m == IntegratorMethod::FixedRK4 ? "rk4" : "rkf78";
}

IntegratorMethod parse_method(const std::string& name) {
  if (name == "rkf78") return IntegratorMethod::AdaptiveRKF78;
  if (name == "rk4") return IntegratorMethod::FixedRK4;
  throw ConfigError("integrator method must be 'rkf78' or 'rk4', got '" + name + "'");
}

json pulse_pair(double g0T, double deltaT) { return {{"g0T", g0T}, {"deltaT", deltaT}}; }

}  // namespace

std::string library_version() { return IGS_VERSION; }

json to_json(const IntegratorOptions& o) {
  return {{"method", method_name(o.method)},
          {"abs_tol", o.abs_tol},
          {"rel_tol", o.rel_tol},
          {"max_steps", o.max_steps},
          {"fixed_steps", o.fixed_steps}};
}

IntegratorOptions integrator_from_json(const json& j, IntegratorOptions o) {
  if (!j.is_object()) throw ConfigError("integrator settings must be an object");
  o.method = parse_method(value_or<std::string>(j, "method", method_name(o.method)));
  o.abs_tol = value_or(j, "abs_tol", o.abs_tol);
  o.rel_tol = value_or(j, "rel_tol", o.rel_tol);
  o.max_steps = value_or(j, "max_steps", o.max_steps);
  o.fixed_steps = value_or(j, "fixed_steps", o.fixed_steps);
  if (!(o.abs_tol > 0.0) || !(o.rel_tol >= 0.0)) throw ConfigError("integrator tolerances must be positive");
  if (o.max_steps <= 0) throw ConfigError("max_steps must be positive");
  return o;
}

std::string format_detuning_scope(DetuningScope scope) {
  return scope == DetuningScope::AllIons ? "all" : "addressed";
}

DetuningScope parse_detuning_scope(const std::string& name) {
  if (name == "all") return DetuningScope::AllIons;
  if (name == "addressed") return DetuningScope::AddressedIons;
  throw ConfigError("detuning scope must be 'all' or 'addressed', got '" + name + "'");
}

json to_json(const PulseParams& p, int n_ions) {
  return {{"g0T", p.g0T},
          {"deltaT", p.deltaT},
          {"window", p.window},
          {"addressed", format_ion_bits(p.addressed, n_ions)},
          {"detuning_scope", format_detuning_scope(p.detuning_scope)}};
}

json to_json(const AlgorithmConfig& c) {
  return {{"N", c.ions.n_ions()},
          {"marked", c.marked_bits},
          {"oracle", pulse_pair(c.oracle_pulse.g0T, c.oracle_pulse.deltaT)},
          {"reflection", pulse_pair(c.reflection_pulse.g0T, c.reflection_pulse.deltaT)},
          {"window", c.oracle_pulse.window},
          {"detuning_scope", format_detuning_scope(c.oracle_pulse.detuning_scope)},
          {"steps", c.resolved_steps()},
          {"seed", c.rng_seed},
          {"shots", c.n_shots},
          {"record_mid_step", c.record_mid_step},
          {"integrator", to_json(c.integrator)}};
}

AlgorithmConfig algorithm_config_from_json(const json& j, AlgorithmConfig c) {
  if (!j.is_object()) throw ConfigError("simulate configuration must be an object");
  const int n = value_or(j, "N", c.ions.n_ions());
  c.ions = IonConfig(n);
  c.marked_bits = value_or(j, "marked", c.marked_bits);
  if (c.marked_bits.size() != static_cast<std::size_t>(n)) {
    c.marked_bits = std::string(static_cast<std::size_t>(n / 2), '1') + std::string(static_cast<std::size_t>(n / 2), '0');
    if (j.contains("marked")) throw InvalidMarkedState("marked state length differs from N");
  }
  const double window = value_or(j, "window", c.oracle_pulse.window);
  const DetuningScope scope =
      parse_detuning_scope(value_or(j, "detuning_scope", format_detuning_scope(c.oracle_pulse.detuning_scope)));
  auto read_pulse = [&](const char* key, PulseParams p, IonMask addressed) {
    if (j.contains(key)) {
      const json& q = j.at(key);
      if (!q.is_object()) throw ConfigError(std::string("field '") + key + "' must be an object");
      p.g0T = value_or(q, "g0T", p.g0T);
      p.deltaT = value_or(q, "deltaT", p.deltaT);
    }
    p.window = window;
    p.addressed = addressed;
    p.detuning_scope = scope;
    return p;
  };
  c.oracle_pulse = read_pulse("oracle", c.oracle_pulse, c.marked_mask());
  c.reflection_pulse = read_pulse("reflection", c.reflection_pulse, c.ions.all_ions());
  c.n_steps = value_or(j, "steps", c.n_steps);
  c.rng_seed = value_or(j, "seed", c.rng_seed);
  c.n_shots = value_or(j, "shots", c.n_shots);
  c.record_mid_step = value_or(j, "record_mid_step", c.record_mid_step);
  if (j.contains("integrator")) c.integrator = integrator_from_json(j.at("integrator"), c.integrator);
  c.validate();
  return c;
}

json to_json(const TuneTarget& t) {
  json out = {{"kind", to_string(t.kind)},
              {"target_phase", t.target_phase},
              {"N", t.ions.n_ions()},
              {"g0T_range", range_json(t.g0T)},
              {"deltaT_range", range_json(t.deltaT)},
              {"grid_density", t.grid_density},
              {"refine_tolerance", t.refine_tolerance},
              {"refine_starts", t.refine_starts},
              {"max_refine_iterations", t.max_refine_iterations},
              {"objective_threshold", t.objective_threshold},
              {"window", t.window},
              {"objective", to_string(t.objective)},
              {"reduced_objective", t.reduced_objective},
              {"integrator", to_json(t.integrator)}};
  if (t.kind == OperatorKind::Oracle) out["marked"] = t.marked_bits;
  return out;
}

TuneTarget tune_target_from_json(const json& j, TuneTarget t) {
  if (!j.is_object()) throw ConfigError("tune configuration must be an object");
  t.kind = parse_operator_kind(value_or(j, "kind", to_string(t.kind)));
  t.target_phase = value_or(j, "target_phase", t.target_phase);
  t.ions = IonConfig(value_or(j, "N", t.ions.n_ions()));
  t.marked_bits = value_or(j, "marked", t.marked_bits);
  t.g0T = range_from_json(j, "g0T_range", t.g0T);
  t.deltaT = range_from_json(j, "deltaT_range", t.deltaT);
  t.grid_density = value_or(j, "grid_density", t.grid_density);
  t.refine_tolerance = value_or(j, "refine_tolerance", t.refine_tolerance);
  t.refine_starts = value_or(j, "refine_starts", t.refine_starts);
  t.max_refine_iterations = value_or(j, "max_refine_iterations", t.max_refine_iterations);
  t.objective_threshold = value_or(j, "objective_threshold", t.objective_threshold);
  t.window = value_or(j, "window", t.window);
  t.objective = parse_tune_objective(value_or(j, "objective", to_string(t.objective)));
  t.reduced_objective = value_or(j, "reduced_objective", t.reduced_objective);
  if (j.contains("integrator")) t.integrator = integrator_from_json(j.at("integrator"), t.integrator);
  t.validate();
  return t;
}

json to_json(const PhaseReport& report) {
  json out = json::array();
  for (const auto& p : report.probes) {
    out.push_back({{"label", p.label}, {"phase", p.phase}, {"return_population", p.return_population}});
  }
  return out;
}

json run_summary(const AlgorithmConfig& config, const RunResult& r) {
  json trace = json::array();
  for (const auto& p : r.populations) {
    trace.push_back({{"step", p.step},
                     {"mid_step", p.mid_step},
                     {"tau_elapsed", p.tau_elapsed},
                     {"marked_population", p.marked_population},
                     {"norm", p.norm}});
  }
  std::map<std::string, int> counts;
  for (IonMask s : r.samples) ++counts[format_ion_bits(s, config.ions.n_ions())];
  return {{"schema_version", kSchemaVersion},
          {"command", "simulate"},
          {"version", library_version()},
          {"provenance", to_json(config)},
          {"sector_dimension", build_sector_basis(config.ions)->dimension()},
          {"database_size", database_dimension(config.ions)},
          {"trace", trace},
          {"final_fidelity", r.final_fidelity},
          {"norm_drift", r.norm_drift},
          {"oracle_phases", to_json(r.oracle_phases)},
          {"reflection_phases", to_json(r.reflection_phases)},
          {"sample_counts", counts}};
}

json tune_summary(const TuneTarget& target, const TuneResult& r) {
  return {{"schema_version", kSchemaVersion},
          {"command", "tune"},
          {"version", library_version()},
          {"provenance", to_json(target)},
          {"status", r.status},
          {"converged", r.converged},
          {"best", to_json(r.best, target.ions.n_ions())},
          {"objective", r.objective_value},
          {"database_infidelity", r.database_infidelity},
          {"operator_fidelity", r.operator_fidelity},
          {"evaluations", r.evaluations},
          {"phases", to_json(r.phase_report)}};
}

void write_trace_csv(std::ostream& out, const RunResult& r) {
  const auto old = out.precision(17);
  out << "step,tau_elapsed,marked_population,norm\n";
  for (const auto& p : r.step_points()) {
    out << p.step << ',' << p.tau_elapsed << ',' << p.marked_population << ',' << p.norm << '\n';
  }
  out.precision(old);
}

void write_basis_tsv(std::ostream& out, const SectorBasis& basis) {
  const int n = basis.config().n_ions();
  for (int i = 0; i < basis.dimension(); ++i) {
    const BasisKet& k = basis.ket(i);
    out << i << '\t' << format_ion_bits(k.ion_bits, n) << '\t' << k.ionic_excitations() << '\t'
        << k.phonons << '\n';
  }
}

json chains_json(const IonConfig& ions) {
  json out = json::array();
  for (const auto& c : chain_census(ions)) {
    out.push_back({{"j", c.j}, {"N_j", c.degeneracy}, {"couplings", c.rung_couplings}});
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
}

}  // namespace igs::io
