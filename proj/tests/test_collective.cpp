#include <doctest.h>

#include "igs/collective.hpp"
#include "igs/error.hpp"
#include "oracles.hpp"

using namespace igs;

namespace {

Eigen::MatrixXd sector_block(const Eigen::MatrixXd& full, const Eigen::MatrixXd& embed) {
  return embed.transpose() * full * embed;
}

}  // namespace

TEST_CASE("sector coupling and J_z match the tensor-product construction") {
  for (int n : {2, 4, 6}) {
    const auto basis = build_sector_basis(IonConfig(n));
    const oracle::TensorSpace space{n, n / 2};
    const Eigen::MatrixXd embed = oracle::sector_embedding(*basis, space);
    for (IonMask addressed : {basis->config().all_ions(), IonMask{0b1}, IonMask{0b101} & basis->config().all_ions()}) {
      const CollectiveOperators ops = build_collective_operators(*basis, addressed);
      const Eigen::MatrixXd expected = sector_block(space.coupling(addressed), embed);
      CHECK((Eigen::MatrixXd(ops.coupling) - expected).cwiseAbs().maxCoeff() < 1e-14);
      const Eigen::VectorXd jz = embed.transpose() * space.jz(addressed);
      CHECK((Eigen::VectorXd(Eigen::MatrixXd(ops.j_z).diagonal()) - jz).cwiseAbs().maxCoeff() < 1e-14);
      CHECK((Eigen::MatrixXd(ops.raising) - Eigen::MatrixXd(ops.lowering).transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("ion-space J^2 matches the Pauli construction") {
  const auto basis = build_sector_basis(IonConfig(6));
  const CollectiveOperators ops = build_collective_operators(*basis, basis->config().all_ions());
  CHECK((Eigen::MatrixXd(ops.ion_j_squared) - oracle::ion_j_squared(6)).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd jp(ops.ion_j_plus), jm(ops.ion_j_minus), jz(ops.ion_j_z);
  CHECK((jp * jm - jm * jp - 2.0 * jz).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd a(ops.a), ad(ops.a_dagger);
  CHECK((ad - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Dicke states") {
  const auto basis = build_sector_basis(IonConfig(6));
  for (int n = 0; n <= 3; ++n) {
    const StateVector w = dicke_state(basis, n);
    CHECK(w.norm() == doctest::Approx(1.0));
    int support = 0;
    for (int i = 0; i < basis->dimension(); ++i) {
      if (std::abs(w[i]) > 0) {
        ++support;
        CHECK(basis->ket(i).ionic_excitations() == n);
      }
    }
    CHECK(support == oracle::pascal(6, n));
  }
  CHECK_THROWS_AS(dicke_state(basis, 4), ConfigError);
}

TEST_CASE("chain census matches diagonalisation of J^2 on D") {
  for (int n = 2; n <= 10; n += 2) {
    const auto census = chain_census(IonConfig(n));
    const auto counted = oracle::census_by_diagonalisation(n);
    REQUIRE(census.size() == static_cast<std::size_t>(n / 2 + 1));
    int total = 0;
    for (const auto& c : census) {
      CHECK(c.degeneracy == counted[static_cast<std::size_t>(c.j)]);
      CHECK(c.degeneracy == oracle::pascal(n, n / 2 - c.j) - oracle::pascal(n, n / 2 - c.j - 1));
      CHECK(c.accessible_length == c.j + 1);
      REQUIRE(c.rung_couplings.size() == static_cast<std::size_t>(c.j));
      for (int s = 0; s < c.j; ++s) CHECK(c.rung_couplings[static_cast<std::size_t>(s)] == doctest::Approx(oracle::rung(c.j, -s)));
      total += c.degeneracy;
    }
    CHECK(total == oracle::pascal(n, n / 2));
  }
  const auto six = chain_census(IonConfig(6));
  CHECK(six[0].degeneracy == 1);
  CHECK(six[1].degeneracy == 5);
  CHECK(six[2].degeneracy == 9);
  CHECK(six[3].degeneracy == 5);
  CHECK(six[0].rung_couplings[0] == doctest::Approx(std::sqrt(12.0)));
}

TEST_CASE("MS basis is orthonormal and block-diagonalises the pulse") {
  for (int n : {2, 4, 6, 8}) {
    const auto basis = build_sector_basis(IonConfig(n));
    const CollectiveOperators ops = build_sector_operators(*basis, basis->config().all_ions());
    const MSBasis ms = build_ms_basis(*basis, ops);
    const Eigen::MatrixXd& v = ms.columns();
    CHECK(ms.size() == basis->dimension());
    CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(ms.size(), ms.size())).cwiseAbs().maxCoeff() < 1e-10);

    const oracle::TensorSpace space{n, n / 2};
    const Eigen::MatrixXd embed = oracle::sector_embedding(*basis, space);
    const Eigen::MatrixXd lowering = v.transpose() * embed.transpose() * space.lowering() * embed * v;
    const Eigen::MatrixXd j2 = v.transpose() * Eigen::MatrixXd(ops.j_squared) * v;
    for (int p = 0; p < ms.size(); ++p) {
      const MSLabel& l = ms.labels()[static_cast<std::size_t>(p)];
      CHECK(j2(p, p) == doctest::Approx(l.j * (l.j + 1.0)));
      for (int q = 0; q < ms.size(); ++q) {
        const MSLabel& r = ms.labels()[static_cast<std::size_t>(q)];
        const bool rung = r.j == l.j && r.k == l.k && r.m == l.m - 1;
        const double expected = rung ? oracle::rung(l.j, l.m) : 0.0;
        CHECK(std::abs(lowering(q, p) - expected) < 1e-10);
      }
    }
  }
}

TEST_CASE("MS basis label lookup") {
  const auto basis = build_sector_basis(IonConfig(4));
  const MSBasis ms = build_ms_basis(*basis, build_sector_operators(*basis, basis->config().all_ions()));
  CHECK(ms.labels().front().j == 2);
  CHECK(ms.labels().front().m == 0);
  CHECK(ms.labels().back().j == 0);
  CHECK_THROWS_AS(ms.position(2, 1, 1), ConfigError);
  CHECK_THROWS_AS(ms.position(1, 0, 4), ConfigError);
  CHECK_THROWS_AS(build_ms_basis(*basis, build_sector_operators(*basis, 0b11)), ConfigError);
}
