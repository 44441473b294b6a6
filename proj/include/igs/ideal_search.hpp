#pragma once

#include <vector>

#include <Eigen/Dense>

namespace igs::ideal {

// Unstructured search over `dimension` elements with one marked index.
struct Database {
  long dimension = 0;
  long marked = 0;

  void validate() const;
};

Eigen::VectorXcd uniform_state(const Database& db);

// 1 + (e^{i phi} - 1) |psi><psi|
Eigen::MatrixXcd householder(const Eigen::VectorXcd& psi, double phi);

// In-place application of householder(psi, phi) in O(n).
void apply_householder(const Eigen::VectorXcd& psi, double phi, Eigen::VectorXcd& state);

// G = M_W(phi_w) M_s(phi_s); the oracle M_s acts first.
Eigen::MatrixXcd grover_operator(const Database& db, double phi_w, double phi_s);

// One application of G using rank-one updates.
void apply_grover(const Database& db, double phi_w, double phi_s, Eigen::VectorXcd& state);

// Integer part of pi / (2 asin(2 sqrt(N-1) / N)).
int min_steps(long n_db);

// Marked-state population before the first step and after each of n_steps
// applications of G to the uniform state (n_steps + 1 entries).
std::vector<double> run_ideal(const Database& db, double phi_w, double phi_s, int n_steps);

// sin^2((2k+1) theta) with sin(theta) = 1/sqrt(N).
double closed_form_population(long n_db, int k);

}  // namespace igs::ideal
