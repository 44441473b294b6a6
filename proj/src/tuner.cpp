#include "igs/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <memory>
#include <thread>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "igs/algorithm.hpp"
#include "igs/collective.hpp"
#include "igs/error.hpp"
#include "igs/ideal_search.hpp"

namespace igs {

std::string to_string(OperatorKind kind) {
  return kind == OperatorKind::Reflection ? "reflection" : "oracle";
}

OperatorKind parse_operator_kind(const std::string& name) {
  if (name == "reflection") return OperatorKind::Reflection;
  if (name == "oracle") return OperatorKind::Oracle;
  throw ConfigError("operator kind must be 'reflection' or 'oracle', got '" + name + "'");
}

std::string to_string(TuneObjective objective) {
  return objective == TuneObjective::SymmetricSubspace ? "symmetric" : "database";
}

TuneObjective parse_tune_objective(const std::string& name) {
  if (name == "symmetric") return TuneObjective::SymmetricSubspace;
  if (name == "database") return TuneObjective::Database;
  throw ConfigError("objective must be 'symmetric' or 'database', got '" + name + "'");
}

IonMask TuneTarget::addressed() const {
  if (kind == OperatorKind::Reflection) return ions.all_ions();
  return marked_ket(ions, marked_bits).ion_bits;
}

void TuneTarget::validate() const {
  auto check = [](const ParamRange& r, const char* name) {
    if (!(r.lo > 0.0) || !(r.hi >= r.lo) || !std::isfinite(r.hi)) {
      throw ConfigError(std::string(name) + " bounds must be positive and ordered");
    }
  };
  check(g0T, "g0T");
  check(deltaT, "deltaT");
  if (grid_density < 1) throw ConfigError("grid density must be >= 1");
  if (!(refine_tolerance > 0.0)) throw ConfigError("refine tolerance must be positive");
  if (!(window > 0.0)) throw ConfigError("integration window must be positive");
  if (refine_starts < 1) throw ConfigError("need at least one refinement start");
  addressed();
}

namespace {

// Everything about a target that does not depend on the pulse parameters.
class Objective {
 public:
  explicit Objective(const TuneTarget& target)
      : target_(target), basis_(build_sector_basis(target.ions)) {
    target.validate();
    const int n_db = basis_->database_size();
    axis_ = Eigen::VectorXcd::Zero(n_db);
    if (target.kind == OperatorKind::Reflection) {
      axis_ = dicke_state(basis_, target.ions.excitations()).amplitudes().head(n_db);
    } else {
      axis_(basis_->index_of({target.addressed(), 0})) = 1.0;
    }
  }

  PulseParams pulse(double g0T, double deltaT) const {
    return {g0T, deltaT, target_.window, target_.addressed(), DetuningScope::AllIons};
  }

  double infidelity(const PulseParams& p) const {
    const int n_db = basis_->database_size();
    const Eigen::MatrixXcd cols = database_propagator_columns(*basis_, p, target_.integrator);
    const Eigen::MatrixXcd u = cols.topRows(n_db);
    // Tr(U M^dagger) with M = 1 + (e^{i phi} - 1) |axis><axis|.
    const cplx trace = u.trace() + (std::polar(1.0, -target_.target_phase) - 1.0) *
                                       axis_.dot(u * axis_);
    return 1.0 - std::abs(trace) / n_db;
  }

  // Same quantity from the exact ladder decomposition of D.
  double reduced_infidelity(const PulseParams& p) const {
    const auto ladders = propagate_ladders(target_.ions, p, target_.integrator);
    const int n_sub = std::popcount(p.addressed);
    // The reflection axis (Dicke state) and the marked ket are both the top of
    // the r = 0 ladder of their subset.
    const int axis_excitations = target_.kind == OperatorKind::Reflection ? target_.ions.excitations() : n_sub;
    cplx axis_return{0.0, 0.0};
    for (const auto& l : ladders) {
      if (l.r == 0 && l.subset_excitations == axis_excitations) axis_return = l.return_amplitude;
    }
    const cplx trace = ladder_database_trace(ladders) +
                       (std::polar(1.0, -target_.target_phase) - 1.0) * axis_return;
    return 1.0 - std::abs(trace) / basis_->database_size();
  }

  // Each Phi_k is the top of one r = 0 ladder of the marked half; for the
  // all-ion reflection the symmetric member of chain j tops ladder r = N/2 - j.
  double symmetric_infidelity(const PulseParams& p) const {
    const auto ladders = propagate_ladders(target_.ions, p, target_.integrator);
    const int half = target_.ions.excitations();
    const cplx miss = std::polar(1.0, -target_.target_phase);
    cplx trace{0.0, 0.0};
    int count = 0;
    for (const auto& l : ladders) {
      const bool in_span = target_.kind == OperatorKind::Reflection ? l.subset_excitations == half : l.r == 0;
      if (!in_span) continue;
      const bool axis = l.r == 0 && l.subset_excitations == half;
      trace += axis ? miss * l.return_amplitude : l.return_amplitude;
      ++count;
    }
    return 1.0 - std::abs(trace) / count;
  }

  double search_infidelity(double g0T, double deltaT) const {
    const PulseParams p = pulse(g0T, deltaT);
    if (target_.objective == TuneObjective::SymmetricSubspace) return symmetric_infidelity(p);
    return target_.reduced_objective ? reduced_infidelity(p) : infidelity(p);
  }

 private:
  const TuneTarget& target_;
  SectorBasisPtr basis_;
  Eigen::VectorXcd axis_;
};

std::vector<double> axis_points(const ParamRange& r, int density) {
  if (r.degenerate() || density == 1) return {r.degenerate() ? r.lo : 0.5 * (r.lo + r.hi)};
  std::vector<double> pts(static_cast<std::size_t>(density));
  for (int i = 0; i < density; ++i) pts[static_cast<std::size_t>(i)] = r.lo + (r.hi - r.lo) * i / (density - 1);
  return pts;
}

struct Candidate {
  double objective = 0.0;
  double g0T = 0.0;
  double deltaT = 0.0;
  int gi = 0;
  int di = 0;
};

// Lower objective wins; near-equal values prefer the weaker, then less detuned pulse.
bool better(const Candidate& a, const Candidate& b) {
  constexpr double kTie = 1e-9;
  if (a.objective < b.objective - kTie) return true;
  if (b.objective < a.objective - kTie) return false;
  if (a.g0T != b.g0T) return a.g0T < b.g0T;
  return a.deltaT < b.deltaT;
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested ? requested : std::max(1U, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

struct NelderMeadContext {
  const Objective* objective;
  const TuneTarget* target;
  bool free_g;
  bool free_d;
  double fixed_g;
  double fixed_d;
  int evaluations = 0;

  double eval(const gsl_vector* x) {
    int idx = 0;
    const double g = free_g ? gsl_vector_get(x, idx++) : fixed_g;
    const double d = free_d ? gsl_vector_get(x, idx) : fixed_d;
    const double gc = target->g0T.clamp(g);
    const double dc = target->deltaT.clamp(d);
    const double penalty = (g - gc) * (g - gc) + (d - dc) * (d - dc);
    ++evaluations;
    try {
      return objective->search_infidelity(gc, dc) + penalty;
    } catch (const NumericalError&) {
      return 2.0 + penalty;
    }
  }
};

extern "C" double nelder_mead_trampoline(const gsl_vector* x, void* params) {
  return static_cast<NelderMeadContext*>(params)->eval(x);
}

struct GslVectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct GslMinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

Candidate refine(const Objective& objective, const TuneTarget& target, const Candidate& start,
                 double step_g, double step_d, int& evaluations) {
  NelderMeadContext ctx{&objective, &target, !target.g0T.degenerate(), !target.deltaT.degenerate(),
                        start.g0T, start.deltaT};
  const std::size_t n = (ctx.free_g ? 1U : 0U) + (ctx.free_d ? 1U : 0U);
  if (n == 0) return start;

  std::unique_ptr<gsl_vector, GslVectorDeleter> x(gsl_vector_alloc(n));
  std::unique_ptr<gsl_vector, GslVectorDeleter> step(gsl_vector_alloc(n));
  std::size_t idx = 0;
  if (ctx.free_g) {
    gsl_vector_set(x.get(), idx, start.g0T);
    gsl_vector_set(step.get(), idx++, step_g);
  }
  if (ctx.free_d) {
    gsl_vector_set(x.get(), idx, start.deltaT);
    gsl_vector_set(step.get(), idx, step_d);
  }

  gsl_multimin_function fn{&nelder_mead_trampoline, n, &ctx};
  std::unique_ptr<gsl_multimin_fminimizer, GslMinimizerDeleter> nm(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(nm.get(), &fn, x.get(), step.get());

  // fminimizer_set leaves fval unset; the seed cell's value stands in.
  std::vector<double> history{start.objective};
  constexpr int kStallWindow = 10;
  for (int iter = 0; iter < target.max_refine_iterations; ++iter) {
    if (gsl_multimin_fminimizer_iterate(nm.get()) != GSL_SUCCESS) break;
    history.push_back(nm->fval);
    if (gsl_multimin_fminimizer_size(nm.get()) < 1e-7) break;
    const auto h = history.size();
    if (h > kStallWindow && history[h - 1 - kStallWindow] - history[h - 1] < target.refine_tolerance) break;
  }
  evaluations += ctx.evaluations;

  Candidate out = start;
  idx = 0;
  if (ctx.free_g) out.g0T = target.g0T.clamp(gsl_vector_get(nm->x, idx++));
  if (ctx.free_d) out.deltaT = target.deltaT.clamp(gsl_vector_get(nm->x, idx));
  out.objective = objective.search_infidelity(out.g0T, out.deltaT);
  ++evaluations;
  // Never return something worse than the seed cell.
  return better(start, out) ? start : out;
}

}  // namespace

double operator_infidelity(const PulseParams& pulse, const TuneTarget& target) {
  const Objective objective(target);
  if (pulse.addressed != target.addressed()) {
    throw ConfigError("pulse addressing does not match the tuning target");
  }
  return objective.infidelity(pulse);
}

double reduced_operator_infidelity(const PulseParams& pulse, const TuneTarget& target) {
  const Objective objective(target);
  if (pulse.addressed != target.addressed()) {
    throw ConfigError("pulse addressing does not match the tuning target");
  }
  return objective.reduced_infidelity(pulse);
}

double symmetric_infidelity(const PulseParams& pulse, const TuneTarget& target) {
  const Objective objective(target);
  if (pulse.addressed != target.addressed()) {
    throw ConfigError("pulse addressing does not match the tuning target");
  }
  return objective.symmetric_infidelity(pulse);
}

PhaseReport operator_phase_report(const PulseParams& pulse, const TuneTarget& target) {
  const auto basis = build_sector_basis(target.ions);
  const int half = target.ions.excitations();
  std::vector<std::string> labels;
  if (target.kind == OperatorKind::Reflection) {
    const MSBasis ms = build_ms_basis(*basis, build_sector_operators(*basis, target.ions.all_ions()));
    for (int j = half; j >= 0; --j) labels.push_back("j=" + std::to_string(j));
    return extract_phases(*basis, pulse, reflection_probes(basis, ms), labels, target.integrator);
  }
  for (int k = 0; k <= half; ++k) labels.push_back("Phi_" + std::to_string(k));
  return extract_phases(*basis, pulse, phi_states(basis, target.addressed()), labels,
                        target.integrator);
}

TuneResult tune(const TuneTarget& target) {
  gsl_set_error_handler_off();
  const Objective objective(target);
  const auto gs = axis_points(target.g0T, target.grid_density);
  const auto ds = axis_points(target.deltaT, target.grid_density);

  std::vector<Candidate> grid;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    for (std::size_t j = 0; j < ds.size(); ++j) {
      grid.push_back({0.0, gs[i], ds[j], static_cast<int>(i), static_cast<int>(j)});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < grid.size(); c = next++) {
      try {
        grid[c].objective = objective.search_infidelity(grid[c].g0T, grid[c].deltaT);
      } catch (const NumericalError&) {
        grid[c].objective = 2.0;
      }
    }
  };
  const unsigned n_workers = worker_count(target.threads, grid.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  int evaluations = static_cast<int>(grid.size());

  std::vector<Candidate> ranked = grid;
  std::sort(ranked.begin(), ranked.end(), better);

  std::vector<Candidate> seeds;
  for (const auto& c : ranked) {
    const bool adjacent = std::any_of(seeds.begin(), seeds.end(), [&](const Candidate& s) {
      return std::abs(s.gi - c.gi) <= 1 && std::abs(s.di - c.di) <= 1;
    });
    if (!adjacent) seeds.push_back(c);
    if (static_cast<int>(seeds.size()) >= target.refine_starts) break;
  }

  const double step_g = gs.size() > 1 ? 0.5 * (gs[1] - gs[0]) : 0.0;
  const double step_d = ds.size() > 1 ? 0.5 * (ds[1] - ds[0]) : 0.0;
  Candidate best = seeds.front();
  for (const auto& s : seeds) {
    const Candidate r = refine(objective, target, s, step_g, step_d, evaluations);
    if (better(r, best)) best = r;
  }

  TuneResult result;
  result.best = objective.pulse(best.g0T, best.deltaT);
  result.objective_value = best.objective;
  result.database_infidelity = target.objective == TuneObjective::Database
                                   ? best.objective
                                   : objective.reduced_infidelity(result.best);
  result.operator_fidelity = std::clamp(1.0 - result.database_infidelity, 0.0, 1.0);
  result.phase_report = operator_phase_report(result.best, target);
  result.evaluations = evaluations;
  result.converged = best.objective <= target.objective_threshold;
  result.status = result.converged ? "converged" : "tuning-failed";
  return result;
}

}  // namespace igs
