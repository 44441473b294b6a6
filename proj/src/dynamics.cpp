#include "igs/dynamics.hpp"

#include <bit>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "igs/error.hpp"

namespace igs {

namespace odeint = boost::numeric::odeint;

namespace {

using OdeState = std::vector<double>;

// psi = x + i y, so d/dtau (x, y) = (H y, -H x).
class SchrodingerSystem {
 public:
  SchrodingerSystem(const PulseHamiltonian& h, Eigen::Index rows, Eigen::Index cols)
      : h_(h), rows_(rows), cols_(cols) {}

  void operator()(const OdeState& s, OdeState& ds, double tau) const {
    const Eigen::Index n = rows_ * cols_;
    Eigen::Map<const Eigen::MatrixXd> x(s.data(), rows_, cols_);
    Eigen::Map<const Eigen::MatrixXd> y(s.data() + n, rows_, cols_);
    Eigen::Map<Eigen::MatrixXd> dx(ds.data(), rows_, cols_);
    Eigen::Map<Eigen::MatrixXd> dy(ds.data() + n, rows_, cols_);
    h_.apply(tau, y, dx);
    h_.apply(tau, x, dy);
    dy = -dy;
  }

 private:
  const PulseHamiltonian& h_;
  Eigen::Index rows_;
  Eigen::Index cols_;
};

OdeState pack(const Eigen::MatrixXcd& block) {
  const Eigen::Index n = block.size();
  OdeState s(static_cast<std::size_t>(2 * n));
  Eigen::Map<Eigen::MatrixXd>(s.data(), block.rows(), block.cols()) = block.real();
  Eigen::Map<Eigen::MatrixXd>(s.data() + n, block.rows(), block.cols()) = block.imag();
  return s;
}

Eigen::MatrixXcd unpack(const OdeState& s, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index n = rows * cols;
  Eigen::MatrixXcd out(rows, cols);
  out.real() = Eigen::Map<const Eigen::MatrixXd>(s.data(), rows, cols);
  out.imag() = Eigen::Map<const Eigen::MatrixXd>(s.data() + n, rows, cols);
  return out;
}

}  // namespace

void validate_pulse(const PulseParams& pulse, const IonConfig& config) {
  if (!(pulse.g0T >= 0.0)) throw ConfigError("g0T must be non-negative");
  if (!std::isfinite(pulse.deltaT)) throw ConfigError("deltaT must be finite");
  if (!(pulse.window > 0.0) || !std::isfinite(pulse.window)) {
    throw ConfigError("integration window K must be positive");
  }
  if (pulse.addressed == 0) throw ConfigError("pulse addresses no ions");
  if ((pulse.addressed & ~config.all_ions()) != 0) {
    throw ConfigError("pulse addresses ions beyond N=" + std::to_string(config.n_ions()));
  }
}

PulseHamiltonian::PulseHamiltonian(const SectorBasis& basis, const PulseParams& pulse)
    : pulse_(pulse) {
  validate_pulse(pulse, basis.config());
  const CollectiveOperators addressed = build_sector_operators(basis, pulse.addressed);
  coupling_ = addressed.coupling;
  if (pulse.detuning_scope == DetuningScope::AllIons && pulse.addressed != basis.config().all_ions()) {
    jz_ = Eigen::VectorXd(build_sector_operators(basis, basis.config().all_ions()).j_z.diagonal());
  } else {
    jz_ = Eigen::VectorXd(addressed.j_z.diagonal());
  }
}

PulseHamiltonian::PulseHamiltonian(const PulseParams& pulse, SparseReal coupling,
                                   Eigen::VectorXd detuning_diagonal)
    : pulse_(pulse), coupling_(std::move(coupling)), jz_(std::move(detuning_diagonal)) {
  if (coupling_.rows() != jz_.size() || coupling_.cols() != jz_.size()) {
    throw ConfigError("coupling and detuning dimensions differ");
  }
}

double PulseHamiltonian::envelope(double tau) const noexcept {
  return pulse_.g0T * std::exp(-tau * tau);
}

SparseReal PulseHamiltonian::at(double tau) const {
  SparseReal h = envelope(tau) * coupling_;
  SparseReal diag(jz_.size(), jz_.size());
  diag.reserve(Eigen::VectorXi::Constant(jz_.size(), 1));
  for (Eigen::Index i = 0; i < jz_.size(); ++i) diag.insert(i, i) = pulse_.deltaT * jz_(i);
  h += diag;
  h.makeCompressed();
  return h;
}

void PulseHamiltonian::apply(double tau, const Eigen::Ref<const Eigen::MatrixXd>& x,
                             Eigen::Ref<Eigen::MatrixXd> y) const {
  y.noalias() = envelope(tau) * (coupling_ * x);
  y += (pulse_.deltaT * jz_).asDiagonal() * x;
}

SparseReal hamiltonian_at(const SectorBasis& basis, const PulseParams& pulse, double tau) {
  return PulseHamiltonian(basis, pulse).at(tau);
}

Eigen::MatrixXcd propagate_block(const PulseHamiltonian& h, const Eigen::MatrixXcd& block,
                                 const IntegratorOptions& options, IntegrationStats* stats) {
  const double t0 = -h.pulse().window;
  const double t1 = h.pulse().window;
  SchrodingerSystem system(h, block.rows(), block.cols());
  OdeState s = pack(block);
  IntegrationStats local;

  if (options.method == IntegratorMethod::FixedRK4) {
    if (options.fixed_steps <= 0) throw ConfigError("fixed_steps must be positive");
    odeint::runge_kutta4<OdeState> stepper;
    const double dt = (t1 - t0) / static_cast<double>(options.fixed_steps);
    for (long n = 0; n < options.fixed_steps; ++n) {
      stepper.do_step(system, s, t0 + static_cast<double>(n) * dt, dt);
    }
    local.accepted_steps = options.fixed_steps;
  } else {
    auto stepper = odeint::make_controlled<odeint::runge_kutta_fehlberg78<OdeState>>(
        options.abs_tol, options.rel_tol);
    double t = t0;
    double dt = 1e-3;
    while (t1 - t > 1e-13) {
      if (local.accepted_steps + local.rejected_steps >= options.max_steps) {
        throw IntegrationError("integrator exceeded " + std::to_string(options.max_steps) +
                                   " steps at tau=" + std::to_string(t),
                               t, options.abs_tol);
      }
      dt = std::min(dt, t1 - t);
      if (stepper.try_step(system, s, t, dt) == odeint::success) {
        ++local.accepted_steps;
      } else {
        ++local.rejected_steps;
      }
    }
  }
  if (stats) *stats = local;
  return unpack(s, block.rows(), block.cols());
}

StateVector propagate(const StateVector& state, const PulseParams& pulse,
                      const IntegratorOptions& options) {
  const PulseHamiltonian h(state.basis(), pulse);
  Eigen::MatrixXcd out = propagate_block(h, state.amplitudes(), options);
  return StateVector(state.basis_ptr(), out.col(0));
}

Eigen::MatrixXcd pulse_propagator(const SectorBasis& basis, const PulseParams& pulse,
                                  const IntegratorOptions& options) {
  const PulseHamiltonian h(basis, pulse);
  const auto dim = basis.dimension();
  return propagate_block(h, Eigen::MatrixXcd::Identity(dim, dim), options);
}

Eigen::MatrixXcd database_propagator_columns(const SectorBasis& basis, const PulseParams& pulse,
                                             const IntegratorOptions& options) {
  const PulseHamiltonian h(basis, pulse);
  return propagate_block(
      h, Eigen::MatrixXcd::Identity(basis.dimension(), basis.dimension()).leftCols(basis.database_size()),
      options);
}

PhaseReport extract_phases(const SectorBasis& basis, const PulseParams& pulse,
                           std::span<const StateVector> probes, std::span<const std::string> labels,
                           const IntegratorOptions& options) {
  PhaseReport report;
  if (probes.empty()) return report;
  if (!labels.empty() && labels.size() != probes.size()) {
    throw ConfigError("probe label count does not match probe count");
  }
  const PulseHamiltonian h(basis, pulse);
  Eigen::MatrixXcd block(basis.dimension(), static_cast<Eigen::Index>(probes.size()));
  for (std::size_t p = 0; p < probes.size(); ++p) {
    if (probes[p].amplitudes().size() != basis.dimension()) {
      throw ConfigError("probe does not belong to this sector");
    }
    block.col(static_cast<Eigen::Index>(p)) = probes[p].amplitudes();
  }
  const Eigen::MatrixXcd evolved = propagate_block(h, block, options);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto c = static_cast<Eigen::Index>(p);
    const cplx overlap = block.col(c).dot(evolved.col(c));
    ProbePhase entry;
    entry.label = labels.empty() ? "probe" + std::to_string(p) : labels[p];
    entry.phase = std::arg(overlap);
    entry.return_population = std::clamp(std::norm(overlap), 0.0, 1.0);
    report.probes.push_back(std::move(entry));
  }
  return report;
}

std::vector<Ladder> propagate_ladders(const IonConfig& ions, const PulseParams& pulse,
                                      const IntegratorOptions& options) {
  validate_pulse(pulse, ions);
  const int n = ions.n_ions();
  const int half = ions.excitations();
  const int n_sub = std::popcount(pulse.addressed);
  const int n_rest = n - n_sub;
  const bool all_scope = pulse.detuning_scope == DetuningScope::AllIons || n_rest == 0;

  std::vector<Ladder> ladders;
  std::vector<Eigen::Triplet<double>> coupling;
  std::vector<double> detuning;
  std::vector<int> tops;
  for (int n_a = std::max(0, half - n_rest); n_a <= std::min(n_sub, half); ++n_a) {
    for (int r = 0; r <= std::min(n_a, n_sub - n_a); ++r) {
      Ladder l;
      l.subset_excitations = n_a;
      l.r = r;
      l.multiplicity = (binomial(n_sub, r) - binomial(n_sub, r - 1)) * binomial(n_rest, half - n_a);
      l.length = n_a - r + 1;
      const int top = static_cast<int>(detuning.size());
      tops.push_back(top);
      for (int s = 0; s < l.length; ++s) {
        // s phonons; full-chain J_z is -s, subset J_z is n_a - s - n_sub/2.
        detuning.push_back(all_scope ? -static_cast<double>(s) : n_a - s - 0.5 * n_sub);
        if (s + 1 < l.length) {
          const double jm = n_a - s - r;                 // j + m
          const double jm1 = n_sub - r - n_a + s + 1;    // j - m + 1
          const double v = std::sqrt((s + 1.0) * jm * jm1);
          coupling.emplace_back(top + s, top + s + 1, v);
          coupling.emplace_back(top + s + 1, top + s, v);
        }
      }
      ladders.push_back(l);
    }
  }

  const auto dim = static_cast<Eigen::Index>(detuning.size());
  SparseReal c(dim, dim);
  c.setFromTriplets(coupling.begin(), coupling.end());
  c.makeCompressed();
  const PulseHamiltonian h(pulse, std::move(c), Eigen::Map<const Eigen::VectorXd>(detuning.data(), dim));

  // Ladders are decoupled, so one vector carries all of them.
  Eigen::MatrixXcd start = Eigen::MatrixXcd::Zero(dim, 1);
  for (int t : tops) start(t, 0) = 1.0;
  const Eigen::MatrixXcd out = propagate_block(h, start, options);
  for (std::size_t i = 0; i < ladders.size(); ++i) ladders[i].return_amplitude = out(tops[i], 0);
  return ladders;
}

cplx ladder_database_trace(const std::vector<Ladder>& ladders) {
  cplx trace{0.0, 0.0};
  for (const auto& l : ladders) trace += static_cast<double>(l.multiplicity) * l.return_amplitude;
  return trace;
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace igs
