#include "igs/validate.hpp"

#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "igs/algorithm.hpp"
#include "igs/collective.hpp"
#include "igs/dynamics.hpp"
#include "igs/ideal_search.hpp"
#include "igs/tuner.hpp"

namespace igs {

bool ValidationReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

namespace {

struct Check {
  std::string name;
  // Returns a detail string; sets ok.
  std::function<std::string(bool& ok)> body;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

std::string sector_dimensions(bool& ok) {
  ok = true;
  std::ostringstream os;
  for (int n = 2; n <= 10; n += 2) {
    std::int64_t expected = 0;
    for (int p = 0; p <= n / 2; ++p) expected += binomial(n, n / 2 - p);
    const auto basis = build_sector_basis(IonConfig(n));
    ok = ok && basis->dimension() == expected && basis->database_size() == binomial(n, n / 2);
    os << "N=" << n << ":" << basis->dimension() << " ";
  }
  return os.str();
}

std::string census(bool& ok) {
  ok = true;
  for (int n = 2; n <= 12; n += 2) {
    std::int64_t total = 0;
    for (const auto& c : chain_census(IonConfig(n))) total += c.degeneracy;
    ok = ok && total == binomial(n, n / 2);
  }
  return "sum N_j = C(N, N/2) for N = 2..12";
}

std::string ms_couplings(bool& ok) {
  const auto basis = build_sector_basis(IonConfig(6));
  const auto ops = build_sector_operators(*basis, basis->config().all_ions());
  const MSBasis ms = build_ms_basis(*basis, ops);
  const Eigen::MatrixXd lowered = ms.columns().transpose() * (ops.lowering * ms.columns());
  double worst = 0.0;
  for (int p = 0; p < ms.size(); ++p) {
    const MSLabel& l = ms.labels()[static_cast<std::size_t>(p)];
    if (l.m == -l.j) continue;
    const int q = ms.position(l.j, l.m - 1, l.k);
    worst = std::max(worst, std::abs(lowered(q, p) - rung_coupling(l.j, l.m)));
  }
  ok = worst < 1e-10;
  return "N=6 max coupling error " + fmt(worst);
}

std::string grover_steps(bool& ok) {
  ok = ideal::min_steps(20) == 3 && ideal::min_steps(70) == 6 && ideal::min_steps(252) == 12;
  const ideal::Database db{20, 7};
  const auto pops = ideal::run_ideal(db, std::numbers::pi, std::numbers::pi, 6);
  const double theta = std::asin(1.0 / std::sqrt(20.0));
  double worst = 0.0;
  for (int k = 0; k < static_cast<int>(pops.size()); ++k) {
    worst = std::max(worst, std::abs(pops[static_cast<std::size_t>(k)] - std::pow(std::sin((2 * k + 1) * theta), 2)));
  }
  ok = ok && worst < 1e-10;
  return "min_steps(20,70,252) = 3,6,12; N_db=20 closed-form error " + fmt(worst);
}

std::string pulse_unitarity(bool& ok) {
  const auto basis = build_sector_basis(IonConfig(4));
  const PulseParams p{5.0, 3.0, 4.0, basis->config().all_ions(), DetuningScope::AllIons};
  const double defect = unitarity_defect(pulse_propagator(*basis, p));
  ok = defect < 1e-8;
  return "N=4 unitarity defect " + fmt(defect);
}

std::string oracle_leakage(bool& ok) {
  const IonConfig ions(6);
  const auto basis = build_sector_basis(ions);
  const IonMask marked = marked_ket(ions, "111000").ion_bits;
  const PulseParams p{28.61, 19.47, 4.0, marked, DetuningScope::AllIons};
  const Eigen::MatrixXcd u = database_propagator_columns(*basis, p);
  double leak = 0.0;
  for (int c = 0; c < basis->database_size(); ++c) {
    const int rest = std::popcount(basis->ket(c).ion_bits & ~marked);
    for (int r = 0; r < basis->dimension(); ++r) {
      if (std::popcount(basis->ket(r).ion_bits & ~marked) != rest) leak += std::norm(u(r, c));
    }
  }
  ok = leak < 1e-10;
  return "N=6 unaddressed-half leakage " + fmt(leak);
}

std::string ladder_route(bool& ok) {
  TuneTarget t;
  t.kind = OperatorKind::Oracle;
  t.ions = IonConfig(6);
  t.marked_bits = "110100";
  const PulseParams p{12.0, 7.5, 4.0, t.addressed(), DetuningScope::AllIons};
  const double diff = std::abs(operator_infidelity(p, t) - reduced_operator_infidelity(p, t));
  ok = diff < 1e-8;
  return "full vs ladder objective " + fmt(diff);
}

}  // namespace

ValidationReport run_validation_suite() {
  const std::vector<Check> checks = {
      {"sector-dimension", sector_dimensions},
      {"chain-census", census},
      {"ms-couplings", ms_couplings},
      {"grover-reference", grover_steps},
      {"pulse-unitarity", pulse_unitarity},
      {"oracle-leakage", oracle_leakage},
      {"ladder-objective", ladder_route},
  };
  ValidationReport report;
  for (const auto& c : checks) {
    CheckResult r{c.name, false, ""};
    try {
      bool ok = false;
      r.detail = c.body(ok);
      r.passed = ok;
    } catch (const std::exception& e) {
      r.detail = std::string("threw: ") + e.what();
    }
    report.checks.push_back(std::move(r));
  }
  return report;
}

}  // namespace igs
