#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igs/collective.hpp"
#include "igs/dynamics.hpp"
#include "igs/hilbert.hpp"

namespace igs {

struct AlgorithmConfig {
  IonConfig ions{6};
  std::string marked_bits = "111000";  // ion 1 is the leftmost character
  PulseParams oracle_pulse;            // addresses the excited half of the marked state
  PulseParams reflection_pulse;        // addresses every ion
  int n_steps = 0;                     // 0 -> min_steps(C(N, N/2))
  std::uint64_t rng_seed = 0;
  int n_shots = 1000;
  bool record_mid_step = false;  // also record the population between oracle and reflection
  IntegratorOptions integrator;

  IonMask marked_mask() const;
  int resolved_steps() const;
  void validate() const;
};

// Builds a consistent configuration from the four scalars of one table row.
AlgorithmConfig make_algorithm_config(int n_ions, const std::string& marked_bits,
                                      double oracle_g0T, double oracle_deltaT, double refl_g0T,
                                      double refl_deltaT, int n_steps = 0, double window = 4.0);

struct TracePoint {
  int step = 0;
  bool mid_step = false;  // true for the point between oracle and reflection
  double tau_elapsed = 0.0;
  double marked_population = 0.0;
  double norm = 1.0;
};

struct RunResult {
  std::vector<TracePoint> populations;
  double final_fidelity = 0.0;
  double norm_drift = 0.0;
  PhaseReport oracle_phases;
  PhaseReport reflection_phases;
  std::vector<IonMask> samples;
  Eigen::VectorXcd final_state;

  // Per-step points only (step 0..n_steps).
  std::vector<TracePoint> step_points() const;
};

// |Phi_k> = |W^{N/2}_{N/2-k}>_marked half (x) |W^{N/2}_k>_other half, k = 0..N/2.
std::vector<StateVector> phi_states(const SectorBasisPtr& basis, IonMask marked);

// One m_j = 0 probe per chain (k = 1), ordered j = N/2 .. 0.
std::vector<StateVector> reflection_probes(const SectorBasisPtr& basis, const MSBasis& ms);

RunResult run_search(const AlgorithmConfig& config);

// 1 - 2 |Re <f|delta_f>|
double fidelity_deviation(const StateVector& f, const StateVector& delta_f);
double fidelity_deviation(const Eigen::VectorXcd& f, const Eigen::VectorXcd& delta_f);

// Fluorescence readout: phonons are traced out, so each draw is an ion bitmask.
std::vector<IonMask> measure_sample(const StateVector& state, int n_shots, std::uint64_t seed);

// Adiabatic phase model of the two pulses on D: the reflection imprints
// phase reflection[j] on the J^2 = j(j+1) subspace, the oracle imprints
// oracle[k] on kets with N/2 - k excitations inside the marked half.
struct PhaseModel {
  std::vector<double> reflection;  // index j = 0..N/2
  std::vector<double> oracle;      // index k = 0..N/2
};

PhaseModel extract_phase_model(const AlgorithmConfig& config);

// D-restricted evolution of the Dicke state under the phase model. Returns
// the final D amplitudes (length C(N, N/2)).
Eigen::VectorXcd evolve_phase_model(const IonConfig& ions, IonMask marked, const PhaseModel& model,
                                    int n_steps);

}  // namespace igs
