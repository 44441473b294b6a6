#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "igs/collective.hpp"
#include "igs/hilbert.hpp"

namespace igs {

// Which ions feel the detuning term delta*J_z. The laser detuning is a
// property of the rotating frame, so by default it acts on the whole chain
// while the sideband coupling acts only on the addressed ions.
enum class DetuningScope { AllIons, AddressedIons };

// Gaussian red-sideband pulse in units of its width T:
//   H(tau) T = g0T exp(-tau^2) (a J+ + a^dagger J-)_addressed + deltaT J_z,
// integrated over tau in [-window, window].
struct PulseParams {
  double g0T = 0.0;
  double deltaT = 0.0;
  double window = 4.0;
  IonMask addressed = 0;
  DetuningScope detuning_scope = DetuningScope::AllIons;

  double duration() const noexcept { return 2.0 * window; }
};

void validate_pulse(const PulseParams& pulse, const IonConfig& config);

enum class IntegratorMethod {
  AdaptiveRKF78,  // embedded Runge-Kutta-Fehlberg 7(8) with error control
  FixedRK4,       // classical RK4 with a fixed step count, for order checks
};

struct IntegratorOptions {
  IntegratorMethod method = IntegratorMethod::AdaptiveRKF78;
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  long max_steps = 5'000'000;
  long fixed_steps = 2000;  // FixedRK4 only
};

// Time-independent pieces of the pulse Hamiltonian, assembled once per pulse.
class PulseHamiltonian {
 public:
  PulseHamiltonian(const SectorBasis& basis, const PulseParams& pulse);
  // Pre-assembled pieces on an arbitrary closed subspace.
  PulseHamiltonian(const PulseParams& pulse, SparseReal coupling, Eigen::VectorXd detuning_diagonal);

  const PulseParams& pulse() const noexcept { return pulse_; }
  const SparseReal& coupling() const noexcept { return coupling_; }
  const Eigen::VectorXd& detuning_diagonal() const noexcept { return jz_; }
  double envelope(double tau) const noexcept;

  // H(tau) T as a sparse real symmetric matrix.
  SparseReal at(double tau) const;

  // Y <- H(tau) X for a block of real column vectors.
  void apply(double tau, const Eigen::Ref<const Eigen::MatrixXd>& x,
             Eigen::Ref<Eigen::MatrixXd> y) const;

 private:
  PulseParams pulse_;
  SparseReal coupling_;
  Eigen::VectorXd jz_;
};

SparseReal hamiltonian_at(const SectorBasis& basis, const PulseParams& pulse, double tau);

struct IntegrationStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
};

// Evolves each column of `block` through the full pulse window.
Eigen::MatrixXcd propagate_block(const PulseHamiltonian& h, const Eigen::MatrixXcd& block,
                                 const IntegratorOptions& options = {},
                                 IntegrationStats* stats = nullptr);

StateVector propagate(const StateVector& state, const PulseParams& pulse,
                      const IntegratorOptions& options = {});

// Full sector propagator, one column per basis ket.
Eigen::MatrixXcd pulse_propagator(const SectorBasis& basis, const PulseParams& pulse,
                                  const IntegratorOptions& options = {});

// Propagator columns for the database manifold only (dimension x C(N, N/2)).
Eigen::MatrixXcd database_propagator_columns(const SectorBasis& basis, const PulseParams& pulse,
                                             const IntegratorOptions& options = {});

struct ProbePhase {
  std::string label;
  double phase = 0.0;              // arg <psi|U|psi>, in (-pi, pi]
  double return_population = 0.0;  // |<psi|U|psi>|^2
};

struct PhaseReport {
  std::vector<ProbePhase> probes;
};

PhaseReport extract_phases(const SectorBasis& basis, const PulseParams& pulse,
                           std::span<const StateVector> probes,
                           std::span<const std::string> labels = {},
                           const IntegratorOptions& options = {});

// The database-manifold dynamics of a pulse split exactly into independent
// ladders. A D ket with n_A excitations in the addressed subset lies in the
// subset's pseudospin multiplet j = n_sub/2 - r; the pulse then only walks
// down that multiplet, trading one ionic excitation for one phonon per rung.
// Every (n_A, r) pair defines one ladder, shared by `multiplicity` D kets
// (degeneracy of r inside the subset times arrangements of the rest).
struct Ladder {
  int subset_excitations = 0;  // n_A at the D (n_p = 0) end
  int r = 0;                   // j = n_sub/2 - r
  long multiplicity = 0;
  int length = 0;
  cplx return_amplitude{0.0, 0.0};  // <top|U|top>
};

// Propagates every ladder of the pulse's addressed subset at once.
std::vector<Ladder> propagate_ladders(const IonConfig& ions, const PulseParams& pulse,
                                      const IntegratorOptions& options = {});

// Tr over D of the pulse propagator, summed from the ladders.
cplx ladder_database_trace(const std::vector<Ladder>& ladders);

// max |U^dagger U - 1|
double unitarity_defect(const Eigen::MatrixXcd& u);

}  // namespace igs
