#pragma once

#include <numbers>
#include <string>

#include "igs/dynamics.hpp"
#include "igs/hilbert.hpp"

namespace igs {

enum class OperatorKind { Reflection, Oracle };

std::string to_string(OperatorKind kind);
OperatorKind parse_operator_kind(const std::string& name);

// Subspace over which the pulse is compared with the target reflection.
//   Database: all of D, each ket weighted equally.
//   SymmetricSubspace: span{Phi_k}, the states the search actually visits;
//   every chain j (reflection) and every block k (oracle) counts once.
enum class TuneObjective { SymmetricSubspace, Database };

std::string to_string(TuneObjective objective);
TuneObjective parse_tune_objective(const std::string& name);

struct ParamRange {
  double lo = 1.0;
  double hi = 40.0;

  bool degenerate() const noexcept { return lo == hi; }
  double clamp(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
};

struct TuneTarget {
  OperatorKind kind = OperatorKind::Reflection;
  double target_phase = std::numbers::pi;
  IonConfig ions{6};
  std::string marked_bits;  // oracle only
  ParamRange g0T{1.0, 40.0};
  ParamRange deltaT{1.0, 40.0};
  int grid_density = 80;           // points per free axis
  double refine_tolerance = 1e-7;  // stop once objective improvement falls below this
  int refine_starts = 3;           // best distinct grid cells used as refinement seeds
  int max_refine_iterations = 300;
  double objective_threshold = 0.05;
  double window = 4.0;
  unsigned threads = 0;  // 0 -> hardware concurrency
  TuneObjective objective = TuneObjective::SymmetricSubspace;
  bool reduced_objective = true;  // Database objective through the ladder decomposition
  IntegratorOptions integrator{IntegratorMethod::AdaptiveRKF78, 1e-10, 1e-10, 5'000'000, 0};

  IonMask addressed() const;
  void validate() const;
};

struct TuneResult {
  PulseParams best;
  double objective_value = 1.0;     // value of target.objective at best
  double database_infidelity = 1.0;  // operator_infidelity at best
  PhaseReport phase_report;
  double operator_fidelity = 0.0;    // 1 - database_infidelity
  bool converged = false;
  int evaluations = 0;
  std::string status;
};

// 1 - |Tr(P_D U P_D M^dagger)| / C(N, N/2), M the target reflection on D.
double operator_infidelity(const PulseParams& pulse, const TuneTarget& target);

// operator_infidelity computed from the ladder decomposition instead of
// full-sector propagation.
double reduced_operator_infidelity(const PulseParams& pulse, const TuneTarget& target);

// 1 - |Tr(P_S U P_S M^dagger)| / (N/2 + 1), S = span{Phi_k}, from the ladders.
double symmetric_infidelity(const PulseParams& pulse, const TuneTarget& target);

// Grid scan over the bounds followed by Nelder-Mead refinement.
// Deterministic for a given target regardless of thread count.
TuneResult tune(const TuneTarget& target);

// Phase probes for the operator being tuned: MS chain states for the
// reflection, |Phi_k> for the oracle.
PhaseReport operator_phase_report(const PulseParams& pulse, const TuneTarget& target);

}  // namespace igs
