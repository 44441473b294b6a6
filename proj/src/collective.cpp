#include "igs/collective.hpp"

#include <bit>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "igs/error.hpp"

namespace igs {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseReal from_triplets(int rows, int cols, const Triplets& t) {
  SparseReal m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Adds J^2 |bits> restricted to addressed ions, with J^2 = J- J+ + Jz^2 + Jz.
template <typename Emit>
void apply_j_squared(IonMask bits, IonMask addressed, int n_ions, Emit&& emit) {
  const int up = std::popcount(bits & addressed);
  const int down = std::popcount(addressed) - up;
  const double jz = 0.5 * (up - down);
  double diagonal = jz * jz + jz;
  for (int k = 0; k < n_ions; ++k) {
    const IonMask bk = IonMask{1} << k;
    if (!(addressed & bk) || (bits & bk)) continue;
    const IonMask raised = bits | bk;
    for (int l = 0; l < n_ions; ++l) {
      const IonMask bl = IonMask{1} << l;
      if (!(addressed & bl) || !(raised & bl)) continue;
      const IonMask out = raised & ~bl;
      if (out == bits) {
        diagonal += 1.0;
      } else {
        emit(out, 1.0);
      }
    }
  }
  emit(bits, diagonal);
}

void check_addressed(const IonConfig& config, IonMask addressed) {
  if (addressed == 0) throw ConfigError("addressed ion set is empty");
  if ((addressed & ~config.all_ions()) != 0) {
    throw ConfigError("addressed mask names ions beyond N=" + std::to_string(config.n_ions()));
  }
}

void fill_ion_space(CollectiveOperators& ops, int n_ions) {
  const int dim = 1 << n_ions;
  const IonMask addressed = ops.addressed;
  Triplets plus, z, sq;
  for (int b = 0; b < dim; ++b) {
    const auto bits = static_cast<IonMask>(b);
    const int up = std::popcount(bits & addressed);
    z.emplace_back(b, b, 0.5 * (2 * up - std::popcount(addressed)));
    for (int k = 0; k < n_ions; ++k) {
      const IonMask bk = IonMask{1} << k;
      if ((addressed & bk) && !(bits & bk)) plus.emplace_back(static_cast<int>(bits | bk), b, 1.0);
    }
    apply_j_squared(bits, addressed, n_ions,
                    [&](IonMask out, double v) { sq.emplace_back(static_cast<int>(out), b, v); });
  }
  ops.ion_j_plus = from_triplets(dim, dim, plus);
  ops.ion_j_minus = ops.ion_j_plus.transpose();
  ops.ion_j_z = from_triplets(dim, dim, z);
  ops.ion_j_squared = from_triplets(dim, dim, sq);

  const int n_max = n_ions / 2;
  Triplets a;
  for (int n = 1; n <= n_max; ++n) a.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  ops.a = from_triplets(n_max + 1, n_max + 1, a);
  ops.a_dagger = ops.a.transpose();
}

}  // namespace

CollectiveOperators build_sector_operators(const SectorBasis& basis, IonMask addressed) {
  const IonConfig& config = basis.config();
  check_addressed(config, addressed);
  const int n = config.n_ions();
  const int dim = basis.dimension();

  CollectiveOperators ops;
  ops.addressed = addressed;

  Triplets raise, z, sq;
  for (int i = 0; i < dim; ++i) {
    const BasisKet& ket = basis.ket(i);
    const int up = std::popcount(ket.ion_bits & addressed);
    z.emplace_back(i, i, 0.5 * (2 * up - std::popcount(addressed)));
    if (ket.phonons > 0) {
      const double amp = std::sqrt(static_cast<double>(ket.phonons));
      for (int k = 0; k < n; ++k) {
        const IonMask bk = IonMask{1} << k;
        if (!(addressed & bk) || (ket.ion_bits & bk)) continue;
        raise.emplace_back(basis.index_of({ket.ion_bits | bk, ket.phonons - 1}), i, amp);
      }
    }
    apply_j_squared(ket.ion_bits, addressed, n, [&](IonMask out, double v) {
      sq.emplace_back(basis.index_of({out, ket.phonons}), i, v);
    });
  }
  ops.raising = from_triplets(dim, dim, raise);
  ops.lowering = ops.raising.transpose();
  ops.coupling = ops.raising + ops.lowering;
  ops.j_z = from_triplets(dim, dim, z);
  ops.j_squared = from_triplets(dim, dim, sq);
  return ops;
}

CollectiveOperators build_collective_operators(const SectorBasis& basis, IonMask addressed) {
  CollectiveOperators ops = build_sector_operators(basis, addressed);
  fill_ion_space(ops, basis.config().n_ions());
  return ops;
}

StateVector dicke_state(const SectorBasisPtr& basis, int n_excited) {
  const int half = basis->config().excitations();
  if (n_excited < 0 || n_excited > half) {
    throw ConfigError("Dicke excitation number " + std::to_string(n_excited) +
                      " outside 0.." + std::to_string(half));
  }
  const double amp =
      1.0 / std::sqrt(static_cast<double>(binomial(basis->config().n_ions(), n_excited)));
  StateVector s(basis);
  for (int i = 0; i < basis->dimension(); ++i) {
    if (basis->ket(i).ionic_excitations() == n_excited) s.amplitudes()(i) = amp;
  }
  return s;
}

double rung_coupling(int j, int m) {
  const int n_p = 1 - m;
  return std::sqrt(static_cast<double>(n_p) * (j + m) * (j - m + 1));
}

std::vector<ChainSpec> chain_census(const IonConfig& config) {
  const int n = config.n_ions();
  const int half = config.excitations();
  std::vector<ChainSpec> chains;
  for (int j = half; j >= 0; --j) {
    ChainSpec c;
    c.j = j;
    c.degeneracy = static_cast<int>(binomial(n, half - j) - binomial(n, half - j - 1));
    c.accessible_length = j + 1;
    for (int m = 0; m > -j; --m) c.rung_couplings.push_back(rung_coupling(j, m));
    chains.push_back(std::move(c));
  }
  return chains;
}

MSBasis::MSBasis(Eigen::MatrixXd columns, std::vector<MSLabel> labels)
    : columns_(std::move(columns)), labels_(std::move(labels)) {}

int MSBasis::position(int j, int m, int k) const {
  for (int p = 0; p < size(); ++p) {
    const MSLabel& l = labels_[static_cast<std::size_t>(p)];
    if (l.j == j && l.m == m && l.k == k) return p;
  }
  throw ConfigError("no MS state with j=" + std::to_string(j) + ", m=" + std::to_string(m) +
                    ", k=" + std::to_string(k));
}

MSBasis build_ms_basis(const SectorBasis& basis, const CollectiveOperators& ops) {
  const IonConfig& config = basis.config();
  if (ops.addressed != config.all_ions()) {
    throw ConfigError("MS basis requires operators addressing the full chain");
  }
  const int dim = basis.dimension();
  const int n_db = basis.database_size();
  // J^2 does not change ion occupation numbers, so on D it is the leading block.
  const Eigen::MatrixXd j2_db = Eigen::MatrixXd(ops.j_squared).topLeftCorner(n_db, n_db);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(j2_db);
  if (solver.info() != Eigen::Success) throw NumericalError("J^2 eigendecomposition failed");

  std::map<int, std::vector<int>, std::greater<>> by_j;
  for (int c = 0; c < n_db; ++c) {
    const double lambda = solver.eigenvalues()(c);
    const int j = static_cast<int>(std::lround((-1.0 + std::sqrt(1.0 + 4.0 * std::max(lambda, 0.0))) / 2.0));
    if (std::abs(lambda - j * (j + 1.0)) > 1e-8) {
      throw NumericalError("J^2 eigenvalue " + std::to_string(lambda) + " is not of the form j(j+1)");
    }
    by_j[j].push_back(c);
  }

  const auto census = chain_census(config);
  Eigen::MatrixXd columns = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<MSLabel> labels;
  labels.reserve(static_cast<std::size_t>(dim));

  for (const ChainSpec& chain : census) {
    const auto& eig_cols = by_j[chain.j];
    if (static_cast<int>(eig_cols.size()) != chain.degeneracy) {
      throw NumericalError("j=" + std::to_string(chain.j) + " eigenspace has dimension " +
                           std::to_string(eig_cols.size()) + ", expected " +
                           std::to_string(chain.degeneracy));
    }
    Eigen::MatrixXd v(n_db, chain.degeneracy);
    for (int c = 0; c < chain.degeneracy; ++c) v.col(c) = solver.eigenvectors().col(eig_cols[static_cast<std::size_t>(c)]);

    // Seeds are projections of the D kets onto the eigenspace, taken in
    // ascending ket order and orthogonalised; this fixes the otherwise
    // arbitrary rotation inside the degenerate space.
    std::vector<Eigen::VectorXd> seeds;
    for (int i = 0; i < n_db && static_cast<int>(seeds.size()) < chain.degeneracy; ++i) {
      Eigen::VectorXd s = v * v.row(i).transpose();
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : seeds) s -= q.dot(s) * q;
      }
      const double nrm = s.norm();
      if (nrm > 1e-6) seeds.push_back(s / nrm);
    }
    if (static_cast<int>(seeds.size()) != chain.degeneracy) {
      throw NumericalError("could not resolve degenerate j=" + std::to_string(chain.j) + " space");
    }

    for (int k = 1; k <= chain.degeneracy; ++k) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(dim);
      col.head(n_db) = seeds[static_cast<std::size_t>(k - 1)];
      for (int m = 0; m >= -chain.j; --m) {
        columns.col(static_cast<Eigen::Index>(labels.size())) = col;
        labels.push_back({chain.j, m, k});
        if (m == -chain.j) break;
        Eigen::VectorXd next = ops.lowering * col;
        const double nrm = next.norm();
        if (nrm < 1e-12) throw NumericalError("chain terminated early at j=" + std::to_string(chain.j));
        col = next / nrm;
      }
    }
  }

  if (static_cast<int>(labels.size()) != dim) {
    throw NumericalError("MS basis has " + std::to_string(labels.size()) + " states, sector has " +
                         std::to_string(dim));
  }
  const double defect =
      (columns.transpose() * columns - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (defect > 1e-10) {
    throw NumericalError("MS basis is not orthonormal (defect " + std::to_string(defect) + ")");
  }
  return MSBasis(std::move(columns), std::move(labels));
}

}  // namespace igs
