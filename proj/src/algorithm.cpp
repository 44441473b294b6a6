#include "igs/algorithm.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "igs/error.hpp"
#include "igs/ideal_search.hpp"

namespace igs {

IonMask AlgorithmConfig::marked_mask() const { return marked_ket(ions, marked_bits).ion_bits; }

int AlgorithmConfig::resolved_steps() const {
  return n_steps > 0 ? n_steps : ideal::min_steps(static_cast<long>(database_dimension(ions)));
}

void AlgorithmConfig::validate() const {
  const IonMask marked = marked_mask();
  validate_pulse(oracle_pulse, ions);
  validate_pulse(reflection_pulse, ions);
  if (oracle_pulse.addressed != marked) {
    throw ConfigError("oracle pulse must address exactly the excited ions of the marked state");
  }
  if (reflection_pulse.addressed != ions.all_ions()) {
    throw ConfigError("reflection pulse must address every ion");
  }
  if (n_steps < 0) throw ConfigError("step count must be non-negative");
  if (n_shots < 0) throw ConfigError("shot count must be non-negative");
}

AlgorithmConfig make_algorithm_config(int n_ions, const std::string& marked_bits,
                                      double oracle_g0T, double oracle_deltaT, double refl_g0T,
                                      double refl_deltaT, int n_steps, double window) {
  AlgorithmConfig c;
  c.ions = IonConfig(n_ions);
  c.marked_bits = marked_bits;
  c.oracle_pulse = {oracle_g0T, oracle_deltaT, window, c.marked_mask(), DetuningScope::AllIons};
  c.reflection_pulse = {refl_g0T, refl_deltaT, window, c.ions.all_ions(), DetuningScope::AllIons};
  c.n_steps = n_steps;
  return c;
}

std::vector<TracePoint> RunResult::step_points() const {
  std::vector<TracePoint> out;
  for (const auto& p : populations) {
    if (!p.mid_step) out.push_back(p);
  }
  return out;
}

std::vector<StateVector> phi_states(const SectorBasisPtr& basis, IonMask marked) {
  const IonConfig& ions = basis->config();
  marked_ket(ions, marked);
  const int half = ions.excitations();
  std::vector<StateVector> out;
  for (int k = 0; k <= half; ++k) {
    StateVector s(basis);
    const double amp =
        1.0 / std::sqrt(static_cast<double>(binomial(half, half - k) * binomial(half, k)));
    for (int i = 0; i < basis->database_size(); ++i) {
      if (std::popcount(basis->ket(i).ion_bits & marked) == half - k) s.amplitudes()(i) = amp;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<StateVector> reflection_probes(const SectorBasisPtr& basis, const MSBasis& ms) {
  std::vector<StateVector> out;
  for (int j = basis->config().excitations(); j >= 0; --j) {
    out.emplace_back(basis, ms.column(j, 0, 1).cast<cplx>());
  }
  return out;
}

namespace {

std::vector<std::string> phi_labels(int half) {
  std::vector<std::string> labels;
  for (int k = 0; k <= half; ++k) labels.push_back("Phi_" + std::to_string(k));
  return labels;
}

std::vector<std::string> chain_labels(int half) {
  std::vector<std::string> labels;
  for (int j = half; j >= 0; --j) labels.push_back("j=" + std::to_string(j));
  return labels;
}

}  // namespace

RunResult run_search(const AlgorithmConfig& config) {
  config.validate();
  const auto basis = build_sector_basis(config.ions);
  const int half = config.ions.excitations();
  const IonMask marked = config.marked_mask();
  const int marked_index = basis->index_of({marked, 0});
  const int steps = config.resolved_steps();

  const PulseHamiltonian oracle(*basis, config.oracle_pulse);
  const PulseHamiltonian reflection(*basis, config.reflection_pulse);
  const double step_duration = config.oracle_pulse.duration() + config.reflection_pulse.duration();

  RunResult result;
  Eigen::MatrixXcd psi = dicke_state(basis, half).amplitudes();
  auto record = [&](int step, bool mid, double tau) {
    const double nrm = psi.col(0).norm();
    result.populations.push_back({step, mid, tau, std::norm(psi(marked_index, 0)), nrm});
    result.norm_drift = std::max(result.norm_drift, std::abs(nrm - 1.0));
  };
  record(0, false, 0.0);

  for (int step = 1; step <= steps; ++step) {
    const double tau0 = (step - 1) * step_duration;
    try {
      psi = propagate_block(oracle, psi, config.integrator);
      if (config.record_mid_step) record(step, true, tau0 + config.oracle_pulse.duration());
      psi = propagate_block(reflection, psi, config.integrator);
    } catch (const IntegrationError& e) {
      throw IntegrationError("Grover step " + std::to_string(step) + ": " + e.what(),
                             e.tau_reached(), e.achieved_tolerance());
    }
    record(step, false, tau0 + step_duration);
  }
  result.final_fidelity = result.populations.back().marked_population;
  result.final_state = psi.col(0);

  const auto phis = phi_states(basis, marked);
  const auto phi_names = phi_labels(half);
  result.oracle_phases =
      extract_phases(*basis, config.oracle_pulse, phis, phi_names, config.integrator);

  const MSBasis ms = build_ms_basis(*basis, build_sector_operators(*basis, config.ions.all_ions()));
  const auto probes = reflection_probes(basis, ms);
  const auto chain_names = chain_labels(half);
  result.reflection_phases =
      extract_phases(*basis, config.reflection_pulse, probes, chain_names, config.integrator);

  result.samples =
      measure_sample(StateVector(basis, result.final_state), config.n_shots, config.rng_seed);
  return result;
}

double fidelity_deviation(const Eigen::VectorXcd& f, const Eigen::VectorXcd& delta_f) {
  if (f.size() != delta_f.size()) throw ConfigError("fidelity_deviation: length mismatch");
  return 1.0 - 2.0 * std::abs(f.dot(delta_f).real());
}

double fidelity_deviation(const StateVector& f, const StateVector& delta_f) {
  return fidelity_deviation(f.amplitudes(), delta_f.amplitudes());
}

std::vector<IonMask> measure_sample(const StateVector& state, int n_shots, std::uint64_t seed) {
  if (n_shots < 0) throw ConfigError("shot count must be non-negative");
  const SectorBasis& basis = state.basis();
  // Sector kets are in one-to-one correspondence with ion configurations.
  std::vector<double> weights(static_cast<std::size_t>(basis.dimension()));
  for (int i = 0; i < basis.dimension(); ++i) weights[static_cast<std::size_t>(i)] = state.population(i);
  std::discrete_distribution<int> dist(weights.begin(), weights.end());
  std::mt19937_64 rng(seed);
  std::vector<IonMask> samples;
  samples.reserve(static_cast<std::size_t>(n_shots));
  for (int s = 0; s < n_shots; ++s) samples.push_back(basis.ket(dist(rng)).ion_bits);
  return samples;
}

PhaseModel extract_phase_model(const AlgorithmConfig& config) {
  config.validate();
  const auto basis = build_sector_basis(config.ions);
  const int half = config.ions.excitations();
  PhaseModel model;
  model.reflection.assign(static_cast<std::size_t>(half) + 1, 0.0);

  const MSBasis ms = build_ms_basis(*basis, build_sector_operators(*basis, config.ions.all_ions()));
  const PhaseReport refl =
      extract_phases(*basis, config.reflection_pulse, reflection_probes(basis, ms), {}, config.integrator);
  for (int j = half; j >= 0; --j) {
    model.reflection[static_cast<std::size_t>(j)] = refl.probes[static_cast<std::size_t>(half - j)].phase;
  }

  const PhaseReport orc = extract_phases(*basis, config.oracle_pulse,
                                         phi_states(basis, config.marked_mask()), {}, config.integrator);
  for (const auto& p : orc.probes) model.oracle.push_back(p.phase);
  return model;
}

Eigen::VectorXcd evolve_phase_model(const IonConfig& ions, IonMask marked, const PhaseModel& model,
                                    int n_steps) {
  const int half = ions.excitations();
  if (static_cast<int>(model.reflection.size()) != half + 1 ||
      static_cast<int>(model.oracle.size()) != half + 1) {
    throw ConfigError("phase model needs N/2 + 1 reflection and oracle phases");
  }
  marked_ket(ions, marked);
  const auto basis = build_sector_basis(ions);
  const int n_db = basis->database_size();
  const MSBasis ms = build_ms_basis(*basis, build_sector_operators(*basis, ions.all_ions()));

  Eigen::MatrixXcd reflection = Eigen::MatrixXcd::Zero(n_db, n_db);
  for (int p = 0; p < ms.size(); ++p) {
    const MSLabel& l = ms.labels()[static_cast<std::size_t>(p)];
    if (l.m != 0) continue;
    const Eigen::VectorXd v = ms.columns().col(p).head(n_db);
    reflection += std::polar(1.0, model.reflection[static_cast<std::size_t>(l.j)]) * (v * v.transpose()).cast<cplx>();
  }
  Eigen::VectorXcd oracle(n_db);
  for (int i = 0; i < n_db; ++i) {
    const int k = half - std::popcount(basis->ket(i).ion_bits & marked);
    oracle(i) = std::polar(1.0, model.oracle[static_cast<std::size_t>(k)]);
  }

  Eigen::VectorXcd psi = dicke_state(basis, half).amplitudes().head(n_db);
  for (int s = 0; s < n_steps; ++s) {
    psi = oracle.cwiseProduct(psi);
    psi = reflection * psi;
  }
  return psi;
}

}  // namespace igs
