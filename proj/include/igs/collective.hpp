#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "igs/hilbert.hpp"

namespace igs {

using SparseReal = Eigen::SparseMatrix<double>;

// Collective pseudospin operators summed over an addressed subset of ions.
//
// The ladder operators J+ and J- (and a, a^dagger) do not individually
// preserve the excitation sector, so they live on their own spaces: J on the
// 2^N ionic space (index = ion bitmask), a on phonon Fock states 0..N/2. The
// sector-closed combinations a J+, a^dagger J-, J_z and J^2 are given directly
// over the SectorBasis.
struct CollectiveOperators {
  IonMask addressed = 0;

  // Over the SectorBasis.
  SparseReal raising;    // a J+
  SparseReal lowering;   // a^dagger J-
  SparseReal coupling;   // a J+ + a^dagger J-
  SparseReal j_z;
  SparseReal j_squared;

  // Over the 2^N ionic space.
  SparseReal ion_j_plus;
  SparseReal ion_j_minus;
  SparseReal ion_j_z;
  SparseReal ion_j_squared;

  // Over phonon number states 0..N/2.
  SparseReal a;
  SparseReal a_dagger;
};

CollectiveOperators build_collective_operators(const SectorBasis& basis, IonMask addressed);

// Sector-only operators, skipping the 2^N ionic-space matrices.
CollectiveOperators build_sector_operators(const SectorBasis& basis, IonMask addressed);

// |W^N_n> (x) |N/2 - n phonons>.
StateVector dicke_state(const SectorBasisPtr& basis, int n_excited);

struct ChainSpec {
  int j = 0;
  int degeneracy = 0;         // N_j
  int accessible_length = 0;  // j + 1 (m_j = 0, -1, ..., -j)
  // Rung m_j -> m_j - 1 for m_j = 0, -1, ..., -j+1.
  std::vector<double> rung_couplings;
};

// Dimensionless rung factor between |j, m> and |j, m-1>; the lower state
// carries n_p = 1 - m phonons.
double rung_coupling(int j, int m);

// One entry per j = N/2 down to 0.
std::vector<ChainSpec> chain_census(const IonConfig& config);

struct MSLabel {
  int j = 0;
  int m = 0;
  int k = 0;  // 1..N_j
};

// Simultaneous eigenbasis of J^2 and J_z, organised into independent chains.
// Columns are ordered by j descending, then k ascending, then m descending.
class MSBasis {
 public:
  MSBasis(Eigen::MatrixXd columns, std::vector<MSLabel> labels);

  const Eigen::MatrixXd& columns() const noexcept { return columns_; }
  const std::vector<MSLabel>& labels() const noexcept { return labels_; }
  int size() const noexcept { return static_cast<int>(labels_.size()); }

  // Column position of (j, m, k); throws ConfigError when absent.
  int position(int j, int m, int k) const;
  Eigen::VectorXd column(int j, int m, int k) const { return columns_.col(position(j, m, k)); }

 private:
  Eigen::MatrixXd columns_;
  std::vector<MSLabel> labels_;
};

// ops must address every ion.
MSBasis build_ms_basis(const SectorBasis& basis, const CollectiveOperators& ops);

}  // namespace igs
