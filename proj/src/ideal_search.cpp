#include "igs/ideal_search.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "igs/error.hpp"

namespace igs::ideal {

void Database::validate() const {
  if (dimension < 2) throw ConfigError("database dimension must be >= 2");
  if (marked < 0 || marked >= dimension) {
    throw ConfigError("marked index " + std::to_string(marked) + " outside 0.." +
                      std::to_string(dimension - 1));
  }
}

Eigen::VectorXcd uniform_state(const Database& db) {
  db.validate();
  return Eigen::VectorXcd::Constant(db.dimension, 1.0 / std::sqrt(static_cast<double>(db.dimension)));
}

namespace {

void require_normalized(const Eigen::VectorXcd& psi) {
  if (std::abs(psi.norm() - 1.0) > 1e-9) {
    throw ConfigError("reflection axis is not normalized (norm " + std::to_string(psi.norm()) + ")");
  }
}

}  // namespace

Eigen::MatrixXcd householder(const Eigen::VectorXcd& psi, double phi) {
  require_normalized(psi);
  const std::complex<double> f = std::polar(1.0, phi) - 1.0;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(psi.size(), psi.size());
  m.noalias() += f * psi * psi.adjoint();
  return m;
}

void apply_householder(const Eigen::VectorXcd& psi, double phi, Eigen::VectorXcd& state) {
  const std::complex<double> f = std::polar(1.0, phi) - 1.0;
  state += (f * psi.dot(state)) * psi;
}

Eigen::MatrixXcd grover_operator(const Database& db, double phi_w, double phi_s) {
  db.validate();
  Eigen::VectorXcd marked = Eigen::VectorXcd::Zero(db.dimension);
  marked(db.marked) = 1.0;
  return householder(uniform_state(db), phi_w) * householder(marked, phi_s);
}

void apply_grover(const Database& db, double phi_w, double phi_s, Eigen::VectorXcd& state) {
  state(db.marked) *= std::polar(1.0, phi_s);
  // M_W with |W> uniform: <W|state> is the scaled amplitude sum.
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(db.dimension));
  const std::complex<double> overlap = state.sum() * inv_sqrt;
  const std::complex<double> f = std::polar(1.0, phi_w) - 1.0;
  state.array() += f * overlap * inv_sqrt;
}

int min_steps(long n_db) {
  if (n_db < 2) throw ConfigError("database dimension must be >= 2");
  const double n = static_cast<double>(n_db);
  const double angle = std::asin(2.0 * std::sqrt(n - 1.0) / n);
  return static_cast<int>(std::floor(std::numbers::pi / (2.0 * angle)));
}

std::vector<double> run_ideal(const Database& db, double phi_w, double phi_s, int n_steps) {
  if (n_steps < 0) throw ConfigError("step count must be non-negative");
  Eigen::VectorXcd state = uniform_state(db);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(n_steps) + 1);
  trace.push_back(std::norm(state(db.marked)));
  for (int k = 0; k < n_steps; ++k) {
    apply_grover(db, phi_w, phi_s, state);
    trace.push_back(std::norm(state(db.marked)));
  }
  return trace;
}

double closed_form_population(long n_db, int k) {
  const double theta = std::asin(1.0 / std::sqrt(static_cast<double>(n_db)));
  const double s = std::sin((2.0 * k + 1.0) * theta);
  return s * s;
}

}  // namespace igs::ideal
